#include "quenchlab/groundstate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "quenchlab/statevector.hpp"

namespace quenchlab {

namespace {

constexpr int kMaxGroundStateL = 20;

void project_even_parity(std::vector<double>& v) {
    for (std::size_t s = 0; s < v.size(); ++s)
        if (std::popcount(s) & 1u) v[s] = 0.0;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// y = H x with H = F D_x F / 2^L + D_z, all real
struct Applier {
    const HamiltonianSpec& spec;
    std::vector<double> ex;
    double fold;
    mutable std::vector<double> buf;

    explicit Applier(const HamiltonianSpec& s)
        : spec(s),
          ex(kernels::x_energy_table(s)),
          fold(std::pow(2.0, -s.L)),
          buf(std::size_t(1) << s.L) {}

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        buf = x;
        kernels::fwht_raw(buf.data(), spec.L);
        for (std::size_t s = 0; s < buf.size(); ++s) buf[s] *= ex[s];
        kernels::fwht_raw(buf.data(), spec.L);
        for (std::size_t s = 0; s < y.size(); ++s)
            y[s] = fold * buf[s] + kernels::z_energy(s, spec.B, spec.L) * x[s];
    }
};

}  // namespace

GroundStateResult ground_state(const HamiltonianSpec& spec, int max_iterations, double tolerance) {
    spec.validate();
    if (spec.L > kMaxGroundStateL) throw SpecError("L exceeds the ground-state cap");
    const std::size_t n = std::size_t(1) << spec.L;
    const Applier H(spec);

    std::vector<double> v(n);
    for (std::size_t s = 0; s < n; ++s) v[s] = 1.0 + 1e-3 * std::sin(0.37 * s + 0.2);
    project_even_parity(v);
    double beta = std::sqrt(dot(v, v));
    for (auto& a : v) a /= beta;

    std::vector<std::vector<double>> basis;
    basis.push_back(v);
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> w(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    double theta = 0.0;
    double ritz_residual = 0.0;
    int iterations = 0;
    bool converged = false;

    for (int j = 0; j < max_iterations && !converged; ++j) {
        H.apply(basis[j], w);
        project_even_parity(w);
        const double alpha = dot(basis[j], w);
        alphas.push_back(alpha);
        axpy(-alpha, basis[j], w);
        if (j > 0) axpy(-betas[j - 1], basis[j - 1], w);
        for (const auto& q : basis) axpy(-dot(q, w), q, w);
        beta = std::sqrt(dot(w, w));
        iterations = j + 1;

        Eigen::Map<const Eigen::VectorXd> diag(alphas.data(), alphas.size());
        Eigen::Map<const Eigen::VectorXd> sub(betas.data(), betas.size());
        solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        theta = solver.eigenvalues()(0);
        ritz_residual = beta * std::abs(solver.eigenvectors()(alphas.size() - 1, 0));
        if (ritz_residual <= tolerance || beta <= 1e-14) {
            converged = true;
            break;
        }
        betas.push_back(beta);
        for (auto& a : w) a /= beta;
        basis.push_back(w);
    }
    if (!converged)
        throw ConvergenceError("Lanczos residual " + std::to_string(ritz_residual) +
                               " above target after " + std::to_string(max_iterations) +
                               " iterations");

    GroundStateResult result;
    result.state.assign(n, 0.0);
    for (std::size_t i = 0; i < alphas.size(); ++i)
        axpy(solver.eigenvectors()(i, 0), basis[i], result.state);
    const double nrm = std::sqrt(dot(result.state, result.state));
    for (auto& a : result.state) a /= nrm;
    result.energy = theta;
    result.iterations = iterations;

    H.apply(result.state, w);
    axpy(-theta, result.state, w);
    result.residual = std::sqrt(dot(w, w));
    return result;
}

double binder_cumulant(const std::vector<double>& state, int L) {
    const std::size_t n = std::size_t(1) << L;
    if (state.size() != n) throw std::invalid_argument("state length must be 2^L");
    std::vector<double> xbasis(state);
    kernels::fwht_raw(xbasis.data(), L);
    const double fold = std::pow(2.0, -L);

    double norm = 0.0, m2 = 0.0, m4 = 0.0;
    std::vector<double> pm2(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double p = fold * xbasis[s] * xbasis[s];
        const double m = double(L - 2 * static_cast<int>(std::popcount(s))) / L;
        pm2[s] = p * m * m;
        norm += p;
    }
    m2 = kernels::block_tree_sum(pm2.data(), n);
    for (std::size_t s = 0; s < n; ++s) {
        const double m = double(L - 2 * static_cast<int>(std::popcount(s))) / L;
        pm2[s] *= m * m;
    }
    m4 = kernels::block_tree_sum(pm2.data(), n);
    m2 /= norm;
    m4 /= norm;
    if (m2 < 1e-12)
        throw DegenerateDenominatorError("<M^2> below 1e-12, Binder ratio undefined");
    return 1.0 - m4 / (3.0 * m2 * m2);
}

BinderCurve binder_curve(HamiltonianSpec spec, const std::vector<double>& b_grid) {
    BinderCurve curve;
    curve.L = spec.L;
    curve.b_grid = b_grid;
    curve.u4.reserve(b_grid.size());
    for (double b : b_grid) {
        spec.B = b;
        const GroundStateResult gs = ground_state(spec);
        curve.u4.push_back(binder_cumulant(gs.state, spec.L));
    }
    return curve;
}

CrossingResult binder_crossing(const std::vector<BinderCurve>& curves) {
    if (curves.size() < 2) throw std::invalid_argument("need at least two system sizes");
    std::vector<const BinderCurve*> sorted;
    for (const auto& c : curves) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const BinderCurve* a, const BinderCurve* b) { return a->L < b->L; });

    DerivativeCurveSet set;
    set.b_grid = sorted.front()->b_grid;
    for (const BinderCurve* c : sorted) {
        if (c->b_grid != set.b_grid)
            throw std::invalid_argument("Binder curves must share one B grid");
        set.times.push_back(static_cast<double>(c->L));
        set.values.push_back(c->u4);
    }
    CrossingResult result = find_crossing(set);
    result.estimate.method = EstimateMethod::BinderCrossing;
    return result;
}

}  // namespace quenchlab
