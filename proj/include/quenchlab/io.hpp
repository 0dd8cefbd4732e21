#pragma once

#include <string>
#include <vector>

#include "quenchlab/groundstate.hpp"
#include "quenchlab/meanfield.hpp"
#include "quenchlab/scaling.hpp"
#include "quenchlab/statevector.hpp"

namespace quenchlab {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All numeric CSV/JSON fields use 17 significant digits.
std::string format_g17(double v);

enum class CurveCsvStyle {
    Scaling,      // Jt,B_over_J,dGdB
    FreeFermion,  // B_over_J,Jt,value
};

void write_curves_csv(const std::string& path, const DerivativeCurveSet& curves,
                      CurveCsvStyle style = CurveCsvStyle::Scaling);
// Accepts either header order.
DerivativeCurveSet read_curves_csv(const std::string& path);

void write_series_csv(const std::string& path, const CorrelatorSeries& series);
CorrelatorSeries read_series_csv(const std::string& path);

void write_binder_csv(const std::string& path, const std::vector<BinderCurve>& curves);
std::vector<BinderCurve> read_binder_csv(const std::string& path);

void write_table_csv(const std::string& path, const std::string& header,
                     const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> read_table_csv(const std::string& path, std::string* header = nullptr);

std::string estimate_to_json(const CriticalPointEstimate& estimate);
CriticalPointEstimate estimate_from_json(const std::string& text);

std::string meanfield_to_json(const MeanFieldPrediction& prediction);
MeanFieldPrediction meanfield_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace quenchlab
