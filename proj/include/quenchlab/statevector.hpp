#pragma once

#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "quenchlab/model.hpp"

namespace quenchlab {

struct MemoryBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// QUENCHLAB_MEM_BUDGET_BYTES, or a 4 GiB default.
std::size_t memory_budget_bytes();

struct StateVector {
    int L = 0;
    std::vector<std::complex<double>> amp;
};

// Fourth-order triple-jump composition: (p, p, 1-4p, p, p) with
// p = 1/(4 - 4^(1/3)) applied to the symmetric field/Ising/field base step.
struct TrotterPlan {
    double dt = 0.01;
    int order = 4;
    std::array<double, 5> stage_coefficients{};

    static TrotterPlan make(double dt);
};

// Normalized in-place Walsh-Hadamard transform (involutive).
void fwht(StateVector& psi);

StateVector prepare_polarized_x(int L);

// Owns the per-spec phase tables; one dt step = 11 fused passes over the
// amplitudes (tile passes handle the low FWHT levels and z kicks, panel
// passes handle the high levels around the Ising kick).
class Evolver {
  public:
    Evolver(const HamiltonianSpec& spec, const TrotterPlan& plan);
    ~Evolver();
    Evolver(Evolver&&) noexcept;
    Evolver& operator=(Evolver&&) noexcept;

    void step(StateVector& psi) const;
    const TrotterPlan& plan() const;
    std::size_t table_bytes() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// (1/L) sum over nearest-neighbor bonds of <sigma^x_i sigma^x_{i+1}>,
// periodic wraparound; one FWHT then a diagonal expectation.
double measure_g(const StateVector& psi, const HamiltonianSpec& spec);

// Single-bond <sigma^x_i sigma^x_j>.
double measure_bond_xx(const StateVector& psi, int i, int j);

double measure_energy(const StateVector& psi, const HamiltonianSpec& spec);

struct CorrelatorSeries {
    double b_over_j = 0.0;
    std::vector<double> t;
    std::vector<double> g;
    std::vector<double> g_av;
};

CorrelatorSeries run_quench(const HamiltonianSpec& spec, const QuenchConfig& config);

// Running average (1/t) * integral of g on an evenly spaced sample grid.
// Cumulative 4th-order rule (sliding cubic panels); the first entry is g[0].
std::vector<double> running_average(const std::vector<double>& g, double dt);

void save_checkpoint(const std::string& path, const StateVector& psi);
StateVector load_checkpoint(const std::string& path);

namespace kernels {

// Unnormalized 2-sweep FWHT (tile pass for low levels, panel pass for high).
void fwht_raw(std::complex<double>* a, int L);
void fwht_raw(double* a, int L);

// Diagonal Ising energy of basis state s in the x basis; matches
// classical_ising_energy on build_couplings(spec).
double x_energy(std::uint64_t s, const HamiltonianSpec& spec);

std::vector<double> x_energy_table(const HamiltonianSpec& spec);

inline double z_energy(std::uint64_t s, double B, int L) {
    return B * (L - 2 * static_cast<int>(std::popcount(s)));
}

// Deterministic fixed-block pairwise reduction.
double block_tree_sum(const double* v, std::size_t n);

}  // namespace kernels

}  // namespace quenchlab
