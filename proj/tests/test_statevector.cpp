#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>
#include <vector>

#include "dense_oracle.hpp"
#include "doctest.h"
#include "quenchlab/free_fermion.hpp"
#include "quenchlab/statevector.hpp"

using namespace quenchlab;

namespace {

HamiltonianSpec nn_spec(int L, double B) {
    HamiltonianSpec s;
    s.family = Family::NearestNeighbor;
    s.B = B;
    s.L = L;
    return s;
}

HamiltonianSpec nnn_spec(int L, double B, double delta) {
    HamiltonianSpec s = nn_spec(L, B);
    s.family = Family::NextNearestNeighbor;
    s.Delta = delta;
    return s;
}

HamiltonianSpec lr_spec(int L, double B, double alpha) {
    HamiltonianSpec s = nn_spec(L, B);
    s.family = Family::LongRange;
    s.alpha = alpha;
    return s;
}

StateVector random_state(int L, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    StateVector psi;
    psi.L = L;
    psi.amp.resize(std::size_t(1) << L);
    double norm2 = 0.0;
    for (auto& a : psi.amp) {
        a = {dist(rng), dist(rng)};
        norm2 += std::norm(a);
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& a : psi.amp) a *= scale;
    return psi;
}

double state_norm(const StateVector& psi) {
    double n2 = 0.0;
    for (const auto& a : psi.amp) n2 += std::norm(a);
    return std::sqrt(n2);
}

StateVector evolve_from_polarized(const HamiltonianSpec& spec, double t, double dt) {
    StateVector psi = prepare_polarized_x(spec.L);
    Evolver ev(spec, TrotterPlan::make(dt));
    const long long steps = std::llround(t / dt);
    for (long long k = 0; k < steps; ++k) ev.step(psi);
    return psi;
}

double state_distance(const StateVector& psi, const Eigen::VectorXcd& ref) {
    REQUIRE(psi.amp.size() == static_cast<std::size_t>(ref.size()));
    double d2 = 0.0;
    for (std::size_t s = 0; s < psi.amp.size(); ++s) d2 += std::norm(psi.amp[s] - ref(s));
    return std::sqrt(d2);
}

std::filesystem::path temp_file(const char* stem) {
    return std::filesystem::temp_directory_path() /
           (std::string(stem) + "_" + std::to_string(::getpid()) + ".bin");
}

}  // namespace

TEST_CASE("trotter plan coefficients") {
    const TrotterPlan plan = TrotterPlan::make(0.02);
    CHECK(plan.dt == 0.02);
    CHECK(plan.order == 4);
    const double p = 1.0 / (4.0 - std::cbrt(4.0));
    CHECK(plan.stage_coefficients[0] == doctest::Approx(p).epsilon(1e-15));
    CHECK(plan.stage_coefficients[1] == doctest::Approx(p).epsilon(1e-15));
    CHECK(plan.stage_coefficients[2] == doctest::Approx(1.0 - 4.0 * p).epsilon(1e-15));
    CHECK(plan.stage_coefficients[3] == plan.stage_coefficients[1]);
    CHECK(plan.stage_coefficients[4] == plan.stage_coefficients[0]);
    double sum = 0.0;
    for (double c : plan.stage_coefficients) sum += c;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fwht small examples") {
    StateVector psi;
    psi.L = 1;
    psi.amp = {{1.0, 0.0}, {0.0, 0.0}};
    fwht(psi);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(psi.amp[0].real() == doctest::Approx(r).epsilon(1e-15));
    CHECK(psi.amp[1].real() == doctest::Approx(r).epsilon(1e-15));

    psi.L = 2;
    psi.amp = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    fwht(psi);
    CHECK(psi.amp[0].real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(psi.amp[1].real() == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(psi.amp[2].real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(psi.amp[3].real() == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("fwht is involutive") {
    for (int L : {1, 3, 7, 12}) {
        StateVector psi = random_state(L, 100 + L);
        const StateVector orig = psi;
        fwht(psi);
        CHECK(state_norm(psi) == doctest::Approx(1.0).epsilon(1e-13));
        fwht(psi);
        double maxdiff = 0.0;
        for (std::size_t s = 0; s < psi.amp.size(); ++s)
            maxdiff = std::max(maxdiff, std::abs(psi.amp[s] - orig.amp[s]));
        CHECK(maxdiff < 1e-13);
    }
}

TEST_CASE("fwht rejects non power of two lengths") {
    StateVector psi;
    psi.L = 2;
    psi.amp.resize(3);
    CHECK_THROWS_AS(fwht(psi), std::invalid_argument);
}

TEST_CASE("raw fwht double and complex kernels agree") {
    const int L = 11;
    StateVector psi = random_state(L, 7);
    std::vector<double> re(psi.amp.size());
    for (std::size_t s = 0; s < re.size(); ++s) re[s] = psi.amp[s].real();
    kernels::fwht_raw(psi.amp.data(), L);
    kernels::fwht_raw(re.data(), L);
    for (std::size_t s = 0; s < re.size(); ++s)
        CHECK(psi.amp[s].real() == doctest::Approx(re[s]).epsilon(1e-13));
}

TEST_CASE("polarized state is uniform and x-magnetized") {
    for (int L : {1, 2, 5, 10}) {
        const StateVector psi = prepare_polarized_x(L);
        CHECK(psi.amp.size() == (std::size_t(1) << L));
        const double expect = std::pow(2.0, -0.5 * L);
        for (const auto& a : psi.amp) {
            CHECK(a.real() == doctest::Approx(expect).epsilon(1e-15));
            CHECK(a.imag() == 0.0);
        }
        // <sigma^x_i> = 1 for every site
        StateVector xbasis = psi;
        fwht(xbasis);
        for (int i = 0; i < L; ++i) {
            double mx = 0.0;
            for (std::size_t s = 0; s < xbasis.amp.size(); ++s)
                mx += std::norm(xbasis.amp[s]) * (s >> i & 1 ? -1.0 : 1.0);
            CHECK(mx == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(prepare_polarized_x(0), SpecError);
    CHECK_THROWS_AS(prepare_polarized_x(27), SpecError);
}

TEST_CASE("x_energy matches the classical pair sum") {
    std::vector<HamiltonianSpec> specs = {
        nn_spec(3, 0.7),  nn_spec(6, 1.2),  nnn_spec(3, 0.5, 0.3), nnn_spec(4, 0.5, 0.3),
        nnn_spec(5, 1.0, 0.1), nnn_spec(8, 1.0, 0.25), lr_spec(3, 0.9, 6.0), lr_spec(4, 0.9, 6.0),
        lr_spec(6, 1.1, 2.3), lr_spec(8, 0.4, 6.0),
    };
    HamiltonianSpec open_nn = nn_spec(6, 0.8);
    open_nn.boundary = Boundary::Open;
    specs.push_back(open_nn);
    HamiltonianSpec open_nnn = nnn_spec(7, 0.8, 0.2);
    open_nnn.boundary = Boundary::Open;
    specs.push_back(open_nnn);

    for (const auto& spec : specs) {
        CAPTURE(family_name(spec.family));
        CAPTURE(spec.L);
        const CouplingMatrix jij = build_couplings(spec);
        for (std::uint64_t s = 0; s < (std::uint64_t(1) << spec.L); ++s) {
            const double expect = classical_ising_energy(s, jij);
            CHECK(kernels::x_energy(s, spec) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("x_energy_table enumerates every configuration") {
    const HamiltonianSpec spec = nnn_spec(6, 1.0, 0.1);
    const std::vector<double> table = kernels::x_energy_table(spec);
    REQUIRE(table.size() == 64);
    for (std::uint64_t s = 0; s < 64; ++s) CHECK(table[s] == kernels::x_energy(s, spec));
}

TEST_CASE("block_tree_sum matches sequential accumulation") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(10000);
    double plain = 0.0;
    for (auto& x : v) {
        x = dist(rng);
        plain += x;
    }
    const double blocked = kernels::block_tree_sum(v.data(), v.size());
    CHECK(blocked == doctest::Approx(plain).epsilon(1e-12));
    CHECK(kernels::block_tree_sum(v.data(), v.size()) == blocked);
    CHECK(kernels::block_tree_sum(v.data(), 0) == 0.0);
}

TEST_CASE("measure_g on simple states") {
    const HamiltonianSpec spec = nn_spec(8, 1.0);
    CHECK(measure_g(prepare_polarized_x(8), spec) == doctest::Approx(1.0).epsilon(1e-14));

    // Neel pattern in the x basis: every nearest-neighbor bond anti-aligned
    StateVector neel;
    neel.L = 8;
    neel.amp.assign(256, {0.0, 0.0});
    neel.amp[0b01010101] = {1.0, 0.0};
    fwht(neel);  // x-basis point mass -> z-basis amplitudes
    CHECK(measure_g(neel, spec) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(measure_bond_xx(neel, 0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(measure_bond_xx(neel, 0, 2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("measure_energy against the dense Hamiltonian") {
    const HamiltonianSpec spec = nnn_spec(6, 0.9, 0.15);
    const Eigen::MatrixXd h = oracle::dense_hamiltonian(spec);
    for (unsigned seed : {1u, 2u, 3u}) {
        const StateVector psi = random_state(6, seed);
        Eigen::VectorXcd v(64);
        for (int s = 0; s < 64; ++s) v(s) = psi.amp[s];
        const double expect = (v.adjoint() * (h * v)).value().real();
        CHECK(measure_energy(psi, spec) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("evolver rejects unsupported specs") {
    HamiltonianSpec open_spec = nn_spec(6, 1.0);
    open_spec.boundary = Boundary::Open;
    CHECK_THROWS_AS(Evolver(open_spec, TrotterPlan::make(0.01)), SpecError);
}

TEST_CASE("ising eigenstate stays stationary at B=0") {
    const HamiltonianSpec spec = nn_spec(8, 0.0);
    StateVector psi = prepare_polarized_x(8);
    Evolver ev(spec, TrotterPlan::make(0.01));
    for (int k = 0; k < 300; ++k) ev.step(psi);
    CHECK(measure_g(psi, spec) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(state_norm(psi) - 1.0) < 1e-12);
}

TEST_CASE("trotter evolution matches the dense propagator") {
    // NNN breaks integrability, so nothing here leans on the free-fermion
    // solution: the reference is a full eigendecomposition.
    const HamiltonianSpec spec = nnn_spec(6, 0.8, 0.1);
    const oracle::Evolution exact(spec);
    const double t = 3.0;
    const StateVector psi = evolve_from_polarized(spec, t, 0.01);
    const double err = state_distance(psi, exact.psi_at(t));
    CHECK(err < 1e-6);

    SUBCASE("global error scales as dt^4") {
        std::vector<double> errs;
        for (double dt : {0.04, 0.02, 0.01}) {
            const StateVector p = evolve_from_polarized(spec, 1.0, dt);
            errs.push_back(state_distance(p, exact.psi_at(1.0)));
        }
        const double slope = std::log(errs[0] / errs[2]) / std::log(4.0);
        CAPTURE(errs[0]);
        CAPTURE(errs[2]);
        CHECK(slope == doctest::Approx(4.0).epsilon(0.075));
    }
}

TEST_CASE("long-range evolution matches the dense propagator") {
    const HamiltonianSpec spec = lr_spec(6, 1.03, 6.0);
    const oracle::Evolution exact(spec);
    const StateVector psi = evolve_from_polarized(spec, 2.0, 0.01);
    CHECK(state_distance(psi, exact.psi_at(2.0)) < 1e-6);
}

TEST_CASE("long-range kick modes agree") {
    const HamiltonianSpec spec = lr_spec(8, 1.0, 6.0);
    const TrotterPlan plan = TrotterPlan::make(0.02);

    auto step_with_budget = [&](const char* budget) {
        if (budget)
            ::setenv("QUENCHLAB_MEM_BUDGET_BYTES", budget, 1);
        else
            ::unsetenv("QUENCHLAB_MEM_BUDGET_BYTES");
        StateVector psi = prepare_polarized_x(8);
        Evolver ev(spec, plan);
        for (int k = 0; k < 50; ++k) ev.step(psi);
        ::unsetenv("QUENCHLAB_MEM_BUDGET_BYTES");
        return psi;
    };

    const StateVector table = step_with_budget(nullptr);   // table mode, default budget
    const StateVector energy = step_with_budget("8000");   // energy table only
    const StateVector recompute = step_with_budget("5000");// per-element recompute
    for (std::size_t s = 0; s < table.amp.size(); ++s) {
        CHECK(std::abs(table.amp[s] - energy.amp[s]) < 1e-14);
        CHECK(std::abs(table.amp[s] - recompute.amp[s]) < 1e-14);
    }
}

TEST_CASE("norm is conserved over long runs") {
    const HamiltonianSpec spec = nn_spec(8, 1.1);
    StateVector psi = prepare_polarized_x(8);
    Evolver ev(spec, TrotterPlan::make(0.01));
    for (int k = 0; k < 10000; ++k) ev.step(psi);
    CHECK(std::abs(state_norm(psi) - 1.0) < 1e-10);
}

TEST_CASE("energy drift shrinks by 12x when dt halves") {
    const HamiltonianSpec spec = nnn_spec(8, 0.9, 0.1);
    auto drift = [&](double dt) {
        StateVector psi = prepare_polarized_x(8);
        Evolver ev(spec, TrotterPlan::make(dt));
        const double e0 = measure_energy(psi, spec);
        const long long steps = std::llround(2.0 / dt);
        double worst = 0.0;
        for (long long k = 1; k <= steps; ++k) {
            ev.step(psi);
            if (k % 25 == 0 || k == steps)
                worst = std::max(worst, std::abs(measure_energy(psi, spec) - e0));
        }
        return worst;
    };
    const double coarse = drift(0.02);
    const double fine = drift(0.01);
    CAPTURE(coarse);
    CAPTURE(fine);
    CHECK(coarse / fine >= 12.0);
}

TEST_CASE("translation invariance of evolved bonds") {
    const HamiltonianSpec spec = nnn_spec(8, 0.9, 0.1);
    const StateVector psi = evolve_from_polarized(spec, 1.3, 0.01);
    const double first = measure_bond_xx(psi, 0, 1);
    for (int i = 1; i < 8; ++i)
        CHECK(measure_bond_xx(psi, i, (i + 1) % 8) == doctest::Approx(first).epsilon(1e-9));
    CHECK(measure_g(psi, spec) == doctest::Approx(first).epsilon(1e-9));
}

TEST_CASE("statevector g matches the free-fermion solution") {
    const HamiltonianSpec spec = nn_spec(8, 1.0);
    const StateVector psi = evolve_from_polarized(spec, 2.0, 0.01);
    CHECK(measure_g(psi, spec) == doctest::Approx(g_exact(1.0, 1.0, 8, 2.0)).epsilon(1e-5));
}

TEST_CASE("run_quench reproduces the exact running average") {
    HamiltonianSpec spec = nn_spec(10, 1.0);
    QuenchConfig config;
    config.t_max = 5.0;
    config.dt = 0.01;
    const CorrelatorSeries series = run_quench(spec, config);
    REQUIRE(series.t.size() == 501);
    CHECK(series.b_over_j == 1.0);
    CHECK(series.t.front() == 0.0);
    CHECK(series.t.back() == doctest::Approx(5.0).epsilon(1e-12));
    double worst = 0.0;
    for (std::size_t i = 0; i < series.t.size(); ++i)
        worst = std::max(worst,
                         std::abs(series.g_av[i] - g_av_exact(1.0, 1.0, 10, series.t[i])));
    CAPTURE(worst);
    CHECK(worst <= 1e-5);
}

TEST_CASE("run_quench basics") {
    HamiltonianSpec spec = nn_spec(4, 0.7);
    QuenchConfig config;
    config.t_max = 0.0;
    const CorrelatorSeries series = run_quench(spec, config);
    REQUIRE(series.t.size() == 1);
    CHECK(series.g[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(series.g_av[0] == series.g[0]);

    SUBCASE("sample_stride subsamples the same trajectory") {
        QuenchConfig dense_cfg;
        dense_cfg.t_max = 1.0;
        dense_cfg.dt = 0.01;
        QuenchConfig strided = dense_cfg;
        strided.sample_stride = 4;
        const CorrelatorSeries a = run_quench(spec, dense_cfg);
        const CorrelatorSeries b = run_quench(spec, strided);
        REQUIRE(b.t.size() == 26);
        for (std::size_t i = 0; i < b.t.size(); ++i) {
            CHECK(b.t[i] == doctest::Approx(a.t[4 * i]).epsilon(1e-12));
            CHECK(b.g[i] == a.g[4 * i]);
        }
    }

    SUBCASE("thermal start is rejected") {
        QuenchConfig bad;
        bad.initial_state = InitialState::Thermal;
        bad.beta = 1.0;
        CHECK_THROWS_AS(run_quench(spec, bad), SpecError);
    }

    SUBCASE("memory budget is enforced") {
        ::setenv("QUENCHLAB_MEM_BUDGET_BYTES", "1000", 1);
        QuenchConfig small;
        small.t_max = 0.1;
        CHECK_THROWS_AS(run_quench(nn_spec(10, 1.0), small), MemoryBudgetError);
        ::unsetenv("QUENCHLAB_MEM_BUDGET_BYTES");
    }
}

TEST_CASE("evolution is deterministic") {
    const HamiltonianSpec spec = nnn_spec(8, 1.05, 0.1);
    QuenchConfig config;
    config.t_max = 2.0;
    config.dt = 0.02;
    const CorrelatorSeries a = run_quench(spec, config);
    const CorrelatorSeries b = run_quench(spec, config);
    REQUIRE(a.g.size() == b.g.size());
    for (std::size_t i = 0; i < a.g.size(); ++i) {
        CHECK(a.g[i] == b.g[i]);
        CHECK(a.g_av[i] == b.g_av[i]);
    }
}

TEST_CASE("running_average quadrature") {
    SUBCASE("constant samples") {
        const std::vector<double> g(40, 0.25);
        const std::vector<double> avg = running_average(g, 0.1);
        for (double v : avg) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("linear samples are integrated exactly") {
        const double dt = 0.05;
        std::vector<double> g(50);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = 3.0 * (i * dt) - 1.0;
        const std::vector<double> avg = running_average(g, dt);
        for (std::size_t i = 1; i < g.size(); ++i) {
            const double t = i * dt;
            CHECK(avg[i] == doctest::Approx(1.5 * t - 1.0).epsilon(1e-13));
        }
    }
    SUBCASE("fourth-order convergence on a smooth integrand") {
        auto err = [](double dt) {
            const double t_end = 2.0;
            const std::size_t n = std::size_t(std::llround(t_end / dt)) + 1;
            std::vector<double> g(n);
            for (std::size_t i = 0; i < n; ++i) g[i] = std::cos(3.0 * i * dt);
            const std::vector<double> avg = running_average(g, dt);
            const double exact = std::sin(3.0 * t_end) / (3.0 * t_end);
            return std::abs(avg.back() - exact);
        };
        const double ratio = err(0.01) / err(0.005);
        CAPTURE(ratio);
        CHECK(ratio >= 12.0);
    }
    SUBCASE("short inputs fall back to trapezoids") {
        const std::vector<double> g = {0.0, 1.0, 2.0};
        const std::vector<double> avg = running_average(g, 1.0);
        CHECK(avg[0] == 0.0);
        CHECK(avg[1] == doctest::Approx(0.5));
        CHECK(avg[2] == doctest::Approx(1.0));
    }
}

TEST_CASE("checkpoint round trip") {
    const StateVector psi = random_state(6, 2024);
    const auto path = temp_file("quenchlab_ckpt");
    save_checkpoint(path.string(), psi);
    const StateVector back = load_checkpoint(path.string());
    CHECK(back.L == psi.L);
    REQUIRE(back.amp.size() == psi.amp.size());
    for (std::size_t s = 0; s < psi.amp.size(); ++s) CHECK(back.amp[s] == psi.amp[s]);

    SUBCASE("header layout") {
        std::ifstream in(path, std::ios::binary);
        char magic[4];
        std::uint32_t version = 0, L = 0;
        in.read(magic, 4);
        in.read(reinterpret_cast<char*>(&version), 4);
        in.read(reinterpret_cast<char*>(&L), 4);
        CHECK(std::string(magic, 4) == "QLSV");
        CHECK(version == 1);
        CHECK(L == 6);
    }

    SUBCASE("corrupt magic is rejected") {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.write("XXXX", 4);
        f.close();
        CHECK_THROWS(load_checkpoint(path.string()));
    }

    std::filesystem::remove(path);
    CHECK_THROWS(load_checkpoint(path.string()));
}
