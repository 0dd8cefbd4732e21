#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace quenchlab {

enum class CurveSource { Exact, Statevector };
enum class EstimateMethod { PairwiseCrossing, CollapseFit, BinderCrossing, MeanField };

std::string method_name(EstimateMethod m);

struct NoCrossingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyOverlapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// d/dB of G_av(t) per (time, B) on a strictly increasing B grid.
struct DerivativeCurveSet {
    std::vector<double> times;
    std::vector<double> b_grid;
    std::vector<std::vector<double>> values;  // [time][B]
    CurveSource source = CurveSource::Exact;

    void validate() const;
};

struct CriticalPointEstimate {
    double b_c = 0.0;
    double uncertainty = 0.0;
    EstimateMethod method = EstimateMethod::PairwiseCrossing;
    double residual = 0.0;
};

struct CrossingResult {
    CriticalPointEstimate estimate;
    double crossing_value = 0.0;  // mean curve value at the pairwise roots
    double crossing_value_std = 0.0;
};

struct CollapseResult {
    CriticalPointEstimate estimate;
    double correction_c = 0.0;  // fitted c of the per-curve c/t offset
    double slope = 0.0;         // line fit of the master curve near x = 0
    double intercept = 0.0;
    std::vector<double> master_x;
    std::vector<double> master_y;
};

// G_av sampled at the requested times for B +- delta_b around each grid point.
struct GavSweep {
    std::vector<double> times;
    std::vector<double> b_grid;
    std::vector<std::vector<double>> plus;   // [B][time], at b_grid[i] + delta_b
    std::vector<std::vector<double>> minus;  // [B][time], at b_grid[i] - delta_b
};

DerivativeCurveSet derivative_curves(const GavSweep& sweep, double delta_b);
DerivativeCurveSet derivative_curves_exact(double J, int L, const std::vector<double>& times,
                                           const std::vector<double>& b_grid);

// Pairwise roots of interpolated curve differences. Finite-t oscillations can
// put extra sign changes near the grid edges, so each pair uses the bracket
// nearest the consensus point (argmin over B of the cross-time spread) and
// bisects inside it. b_c is the pairwise mean, uncertainty the standard
// deviation.
CrossingResult find_crossing(const DerivativeCurveSet& curves);

// Rescales to x = (B - b_c) t, fits one shared c/t offset per candidate, and
// minimizes the summed squared deviation from the pointwise mean curve over
// |x| <= x_window. Uncertainty from the residual <= 2x minimum interval.
// slope/intercept come from a line fit of the master curve on |x| <= x_window/2.
CollapseResult collapse_fit(const DerivativeCurveSet& curves, double b_lo, double b_hi,
                            double x_window = 0.3);

}  // namespace quenchlab
