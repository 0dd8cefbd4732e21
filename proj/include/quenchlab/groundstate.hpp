#pragma once

#include <stdexcept>
#include <vector>

#include "quenchlab/model.hpp"
#include "quenchlab/scaling.hpp"

namespace quenchlab {

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateDenominatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GroundStateResult {
    std::vector<double> state;  // real amplitudes, z basis
    double energy = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

// Matrix-free Lanczos with full reorthogonalization in the even-parity
// sector (even popcount in the z basis); residual target 1e-8.
GroundStateResult ground_state(const HamiltonianSpec& spec, int max_iterations = 500,
                               double tolerance = 1e-8);

// U4 = 1 - <M^4>/(3 <M^2>^2) with M = (1/L) sum sigma^x_i.
double binder_cumulant(const std::vector<double>& state, int L);

struct BinderCurve {
    int L = 0;
    std::vector<double> b_grid;
    std::vector<double> u4;
};

BinderCurve binder_curve(HamiltonianSpec spec, const std::vector<double>& b_grid);

CrossingResult binder_crossing(const std::vector<BinderCurve>& curves);

}  // namespace quenchlab
