#include "quenchlab/meanfield.hpp"

#include <numbers>
#include <stdexcept>

namespace quenchlab {

MeanFieldPrediction predict_critical_points(double delta) {
    if (delta < 0.0) throw std::invalid_argument("delta must be non-negative");
    MeanFieldPrediction p;
    p.delta = delta;
    p.b_c_dy = 1.0 + 1.5 * delta;
    p.b_c_gs = 1.0 + 16.0 / (3.0 * std::numbers::pi) * delta;
    p.validity_warning = delta > 0.3;
    return p;
}

}  // namespace quenchlab
