#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dense_oracle.hpp"
#include "quenchlab/free_fermion.hpp"
#include "quenchlab/model.hpp"

using namespace quenchlab;
constexpr double kPi = std::numbers::pi;

TEST_CASE("momentum grids") {
    const MomentumGrid grid = momentum_grid(8);
    REQUIRE(grid.momenta.size() == 4);
    CHECK(grid.momenta[0] == doctest::Approx(kPi / 8.0));
    CHECK(grid.momenta[3] == doctest::Approx(7.0 * kPi / 8.0));

    const auto full = full_zone_momenta(4);
    REQUIRE(full.size() == 4);
    CHECK(full[0] == doctest::Approx(-3.0 * kPi / 4.0));
    CHECK(full[3] == doctest::Approx(3.0 * kPi / 4.0));

    CHECK_THROWS_AS(momentum_grid(7), std::invalid_argument);
    CHECK_THROWS_AS(full_zone_momenta(9), std::invalid_argument);
}

TEST_CASE("dispersion limits") {
    CHECK(dispersion(1.0, 1.0, 0.0) == doctest::Approx(0.0));
    CHECK(dispersion(0.0, 1.0, 0.3) == doctest::Approx(2.0));
    CHECK(dispersion(0.0, 1.0, 2.9) == doctest::Approx(2.0));
    CHECK(dispersion(0.7, 1.0, kPi) == doctest::Approx(2.0 * 1.7));
    CHECK(dispersion(0.7, 1.0, 0.4) == doctest::Approx(dispersion(0.7, 1.0, -0.4)));
}

TEST_CASE("infinite-time values") {
    CHECK(g_inf(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(g_inf(0.5, 1.0) == doctest::Approx(0.875));
    CHECK(g_inf(1.0, 1.0) == doctest::Approx(0.5));
    CHECK(g_inf(2.0, 1.0) == doctest::Approx(0.5));
    // continuous at the kink
    CHECK(g_inf(1.0 - 1e-9, 1.0) == doctest::Approx(g_inf(1.0 + 1e-9, 1.0)).epsilon(1e-8));
}

TEST_CASE("time-averaged correlator basics") {
    for (double t : {0.0, 1.0, 7.3})
        CHECK(g_av_exact(0.0, 1.0, 24, t) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g_av_exact(0.9, 1.0, 24, 0.0) == 1.0);
    CHECK(g_exact(0.9, 1.0, 24, 0.0) == 1.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> bdist(0.0, 2.0), tdist(0.0, 20.0);
    for (int k = 0; k < 50; ++k) {
        const double v = g_av_exact(bdist(rng), 1.0, 30, tdist(rng));
        CHECK(std::abs(v) <= 1.0 + 1e-12);
    }

    CHECK(g_av_exact(2.0, 1.0, 1000, 1e4) == doctest::Approx(0.5).epsilon(5e-3));
    CHECK(g_av_exact(0.5, 1.0, 2000, 5e3) == doctest::Approx(0.875).epsilon(5e-3));
}

TEST_CASE("dense diagonalization oracle for the correlator dynamics") {
    // anchor the bit-flip Hamiltonian builder to literal Kronecker products
    for (double b : {0.0, 0.8}) {
        HamiltonianSpec tiny;
        tiny.L = 4;
        tiny.B = b;
        CHECK((oracle::dense_hamiltonian(tiny) - oracle::dense_hamiltonian_kron(tiny)).norm() ==
              doctest::Approx(0.0).epsilon(1e-14));
    }

    HamiltonianSpec spec;
    spec.L = 8;
    for (double b : {0.3, 0.7, 1.0, 1.4}) {
        spec.B = b;
        const oracle::Evolution ed(spec);
        for (double t : {0.7, 2.3, 5.0}) {
            CHECK(g_exact(b, 1.0, 8, t) == doctest::Approx(ed.g_at(t)).epsilon(1e-12));
            CHECK(g_av_exact(b, 1.0, 8, t) == doctest::Approx(ed.g_av_at(t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("analytic field derivative against finite differences") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> bdist(0.2, 1.8), tdist(0.5, 12.0);
    const int sizes[3] = {8, 20, 100};
    const double h = 1e-5;
    for (int k = 0; k < 100; ++k) {
        const double b = bdist(rng);
        const double t = tdist(rng);
        const int L = sizes[k % 3];
        const double an = dgdb_exact(b, 1.0, L, t);
        const double fd = (g_av_exact(b + h, 1.0, L, t) - g_av_exact(b - h, 1.0, L, t)) / (2.0 * h);
        CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("field derivative at the critical point") {
    CHECK(dgdb_exact(0.0, 1.0, 500, 40.0) == doctest::Approx(0.0).epsilon(1e-10));
    for (double t : {4.0, 6.0, 8.0, 10.0})
        CHECK(dgdb_exact(1.0, 1.0, 100, t) == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("generalized Gibbs correlator") {
    const auto zone = full_zone_momenta(100);
    CHECK(gge_correlator(0.0, 1.0, 100, std::vector<double>(100, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gge_correlator(0.7, 1.0, 100, std::vector<double>(100, 0.5)) ==
          doctest::Approx(0.0).epsilon(1e-13));
    CHECK_THROWS_AS(gge_correlator_on(zone, std::vector<double>(3, 0.0), 1.0, 1.0),
                    std::invalid_argument);

    const auto big_zone = full_zone_momenta(2000);
    const double v = gge_correlator(1.0, 1.0, 2000, polarized_occupations(1.0, 1.0, big_zone));
    CHECK(v == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("polarized occupations close the stationary sum") {
    for (int L : {8, 100, 1000})
        for (double b : {0.3, 0.9, 1.0, 1.3}) {
            const auto occ = polarized_occupations(b, 1.0, full_zone_momenta(L));
            CHECK(gge_correlator(b, 1.0, L, occ) ==
                  doctest::Approx(g_av_stationary(b, 1.0, L)).epsilon(1e-10));
        }
}

TEST_CASE("singular gapless mode") {
    const std::vector<double> gapless = {0.0};
    CHECK_THROWS_AS(gge_correlator_on(gapless, {0.3}, 1.0, 1.0), SingularModeError);
    CHECK_NOTHROW(gge_correlator_on(gapless, {0.5}, 1.0, 1.0));
}

TEST_CASE("polarized occupations against the two-level quench oracle") {
    // Each +-q pair of the quadratic chain closes on a two-dimensional block
    // spanned by the empty state and the doubly excited state:
    //   H_q = [[-2(B - J cos q), 2 J sin q], [2 J sin q, +2(B - J cos q)]].
    // The quench starts in the ground state of the B=0 block; the conserved
    // quasiparticle density is the weight on the upper eigenvector at field B.
    auto two_level = [](double B, double J, double q) {
        Eigen::Matrix2d m0, mb;
        m0 << 2.0 * J * std::cos(q), 2.0 * J * std::sin(q), 2.0 * J * std::sin(q),
            -2.0 * J * std::cos(q);
        mb << -2.0 * (B - J * std::cos(q)), 2.0 * J * std::sin(q), 2.0 * J * std::sin(q),
            2.0 * (B - J * std::cos(q));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> s0(m0), sb(mb);
        const Eigen::Vector2d ground0 = s0.eigenvectors().col(0);
        const Eigen::Vector2d excited_b = sb.eigenvectors().col(1);
        const double amp = excited_b.dot(ground0);
        return amp * amp;
    };

    const auto grid = momentum_grid(12).momenta;
    for (double b : {0.4, 1.0, 1.7}) {
        const auto occ = polarized_occupations(b, 1.0, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(occ[i] == doctest::Approx(two_level(b, 1.0, grid[i])).epsilon(1e-12));
    }

    const auto zeros = polarized_occupations(0.0, 1.0, grid);
    for (double n : zeros) CHECK(n == doctest::Approx(0.0).epsilon(1e-14));

    CHECK(polarized_occupations(1.0, 1.0, {1e-6})[0] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("thermal occupations") {
    const auto grid = momentum_grid(10).momenta;
    for (double n : thermal_occupations(0.7, 1.0, 0.0, grid)) CHECK(n == doctest::Approx(0.5));
    for (double n : thermal_occupations(0.7, 1.0, 500.0, grid))
        CHECK(n == doctest::Approx(0.0).epsilon(1e-12));
    // omega = 2 at q = pi/3 when B = J = 1
    CHECK(thermal_occupations(1.0, 1.0, 1.0, {kPi / 3.0})[0] ==
          doctest::Approx(0.5 * (1.0 - std::tanh(1.0))).epsilon(1e-12));
    CHECK(thermal_occupations(1.0, 1.0, 1.0, {kPi / 3.0})[0] == doctest::Approx(0.11920).epsilon(1e-4));
}

namespace {

double gge_curve(double b, int L, double beta, bool thermal) {
    const auto zone = full_zone_momenta(L);
    const auto occ = thermal ? thermal_occupations(b, 1.0, beta, zone)
                             : polarized_occupations(b, 1.0, zone);
    return gge_correlator(b, 1.0, L, occ);
}

double second_derivative_at_j(int L, double beta, bool thermal) {
    const double h = 1e-4;
    const double f0 = gge_curve(1.0 - h, L, beta, thermal);
    const double f1 = gge_curve(1.0, L, beta, thermal);
    const double f2 = gge_curve(1.0 + h, L, beta, thermal);
    return (f0 - 2.0 * f1 + f2) / (h * h);
}

}  // namespace

TEST_CASE("thermal curves stay smooth across B=J, polarized curves do not") {
    const double thermal_ratio = std::abs(second_derivative_at_j(1000, 2.0, true)) /
                                 std::abs(second_derivative_at_j(500, 2.0, true));
    const double polarized_ratio = std::abs(second_derivative_at_j(1000, 0.0, false)) /
                                   std::abs(second_derivative_at_j(500, 0.0, false));
    CHECK(thermal_ratio < 1.2);
    CHECK(polarized_ratio > 1.5);
}

TEST_CASE("reference scaling function") {
    CHECK(scaling_function_reference(0.0) == doctest::Approx(-0.5));
    CHECK(scaling_function_reference(0.1) == doctest::Approx(-0.4));
    CHECK(scaling_function_reference(-0.2) == doctest::Approx(-0.7));
}
