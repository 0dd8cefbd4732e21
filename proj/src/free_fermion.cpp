#include "quenchlab/free_fermion.hpp"

#include <cmath>
#include <numbers>

namespace quenchlab {

namespace {

constexpr double kOmegaTiny = 1e-8;

// Fixed-topology pairwise sum so parallel evaluation cannot change results.
double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double sinc_j0(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

// d/du of j0(u) = (cos u - j0(u)) / u.
double sinc_j0_prime(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return -x / 3.0 + x * x2 / 30.0;
    }
    return (std::cos(x) - sinc_j0(x)) / x;
}

void require_even_size(int L) {
    if (L < 2 || L % 2 != 0) throw std::invalid_argument("L must be even and at least 2");
}

// Periodic-sector momenta entering the paired sum (q = 2 pi n / L without the
// unpaired q = 0 and q = pi modes, which contribute the constant 2/L).
std::vector<double> ramond_momenta(int L) {
    std::vector<double> q(L / 2 - 1);
    for (int n = 1; n < L / 2; ++n) q[n - 1] = 2.0 * std::numbers::pi * n / L;
    return q;
}

// Summand of Eq.-4-type sums; osc is the time factor at this mode's omega
// (j0(2wt) for the running average, cos(2wt) instantaneous, 0 stationary).
template <typename Osc>
double mode_sum(double B, double J, const std::vector<double>& momenta, Osc osc) {
    std::vector<double> terms(momenta.size());
    for (std::size_t i = 0; i < momenta.size(); ++i) {
        const double q = momenta[i];
        const double c = std::cos(q);
        const double s = std::sin(q);
        const double w = dispersion(B, J, q);
        if (w < kOmegaTiny * J) {
            // gapless mode: (J - B c)^2 + B^2 s^2 equals omega^2/4 there, so
            // the term is the time-independent constant 2
            terms[i] = 2.0;
            continue;
        }
        const double a = J - B * c;
        terms[i] = 8.0 * (a * a + B * B * s * s * osc(w)) / (w * w);
    }
    return pairwise_sum(terms.data(), terms.size());
}

template <typename Osc>
double sector_averaged(double B, double J, int L, Osc osc) {
    const double ns = mode_sum(B, J, momentum_grid(L).momenta, osc) / L;
    const double r = mode_sum(B, J, ramond_momenta(L), osc) / L + 2.0 / L;
    return 0.5 * (ns + r);
}

}  // namespace

MomentumGrid momentum_grid(int L) {
    require_even_size(L);
    MomentumGrid grid;
    grid.L = L;
    grid.momenta.resize(L / 2);
    for (int n = 0; n < L / 2; ++n)
        grid.momenta[n] = (2.0 * n + 1.0) * std::numbers::pi / L;
    return grid;
}

std::vector<double> full_zone_momenta(int L) {
    require_even_size(L);
    std::vector<double> q(L);
    for (int n = 0; n < L; ++n) q[n] = (2.0 * n + 1.0 - L) * std::numbers::pi / L;
    return q;
}

double dispersion(double B, double J, double q) {
    return 2.0 * std::sqrt(B * B - 2.0 * B * J * std::cos(q) + J * J);
}

double g_av_exact(double B, double J, int L, double t) {
    require_even_size(L);
    if (t == 0.0) return 1.0;
    return sector_averaged(B, J, L, [t](double w) { return sinc_j0(2.0 * w * t); });
}

double g_exact(double B, double J, int L, double t) {
    require_even_size(L);
    if (t == 0.0) return 1.0;
    return sector_averaged(B, J, L, [t](double w) { return std::cos(2.0 * w * t); });
}

double g_av_stationary(double B, double J, int L) {
    require_even_size(L);
    return mode_sum(B, J, momentum_grid(L).momenta, [](double) { return 0.0; }) / L;
}

double g_inf(double B, double J) {
    if (B <= J) return 1.0 - B * B / (2.0 * J * J);
    return 0.5;
}

double gge_correlator_on(const std::vector<double>& momenta, const std::vector<double>& occupations,
                         double B, double J) {
    if (momenta.size() != occupations.size())
        throw std::invalid_argument("occupations must match the momentum grid");
    std::vector<double> terms(momenta.size());
    for (std::size_t i = 0; i < momenta.size(); ++i) {
        const double w = dispersion(B, J, momenta[i]);
        const double bracket = 1.0 - 2.0 * occupations[i];
        if (w < kOmegaTiny * J) {
            if (std::abs(bracket) > 1e-6)
                throw SingularModeError("occupation at a gapless mode must satisfy 1-2<I_q> -> 0");
            terms[i] = 0.0;
            continue;
        }
        terms[i] = 2.0 * (J - B * std::cos(momenta[i])) / w * bracket;
    }
    return pairwise_sum(terms.data(), terms.size()) / static_cast<double>(momenta.size());
}

double gge_correlator(double B, double J, int L, const std::vector<double>& occupations) {
    return gge_correlator_on(full_zone_momenta(L), occupations, B, J);
}

std::vector<double> polarized_occupations(double B, double J, const std::vector<double>& momenta) {
    std::vector<double> occ(momenta.size());
    for (std::size_t i = 0; i < momenta.size(); ++i) {
        const double w = dispersion(B, J, momenta[i]);
        if (w < kOmegaTiny * J) {
            occ[i] = 0.5;
            continue;
        }
        occ[i] = 0.5 * (1.0 - 2.0 * (J - B * std::cos(momenta[i])) / w);
    }
    return occ;
}

std::vector<double> thermal_occupations(double B, double J, double beta,
                                        const std::vector<double>& momenta) {
    std::vector<double> occ(momenta.size());
    for (std::size_t i = 0; i < momenta.size(); ++i)
        occ[i] = 0.5 * (1.0 - std::tanh(0.5 * beta * dispersion(B, J, momenta[i])));
    return occ;
}

double dgdb_exact(double B, double J, int L, double t) {
    require_even_size(L);
    auto zone_derivative = [&](const std::vector<double>& momenta) {
        std::vector<double> terms(momenta.size());
        for (std::size_t i = 0; i < momenta.size(); ++i) {
            const double q = momenta[i];
            const double c = std::cos(q);
            const double s = std::sin(q);
            const double w = dispersion(B, J, q);
            if (w < kOmegaTiny * J) {
                terms[i] = 0.0;
                continue;
            }
            const double w2 = w * w;
            const double a = J - B * c;
            const double u = 2.0 * w * t;
            const double j0 = sinc_j0(u);
            const double dj0_db = sinc_j0_prime(u) * 2.0 * t * 4.0 * (B - J * c) / w;
            const double numerator = a * a + B * B * s * s * j0;
            const double dnumerator = -2.0 * a * c + 2.0 * B * s * s * j0 + B * B * s * s * dj0_db;
            terms[i] = 8.0 * dnumerator / w2 - 64.0 * (B - J * c) * numerator / (w2 * w2);
        }
        return pairwise_sum(terms.data(), terms.size());
    };
    const double dns = zone_derivative(momentum_grid(L).momenta);
    const double dr = zone_derivative(ramond_momenta(L));
    return 0.5 * (dns + dr) / L;
}

double scaling_function_reference(double epsilon_t) { return -0.5 + epsilon_t; }

}  // namespace quenchlab
