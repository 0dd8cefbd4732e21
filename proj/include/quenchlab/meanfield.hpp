#pragma once

namespace quenchlab {

struct MeanFieldPrediction {
    double delta = 0.0;
    double b_c_dy = 1.0;  // 1 + (3/2) delta, units of J
    double b_c_gs = 1.0;  // 1 + 16/(3 pi) delta
    bool validity_warning = false;  // first-order formulas checked up to delta = 0.3
};

MeanFieldPrediction predict_critical_points(double delta);

}  // namespace quenchlab
