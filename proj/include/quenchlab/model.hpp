#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace quenchlab {

enum class Family { NearestNeighbor, NextNearestNeighbor, LongRange };
enum class Boundary { Periodic, Open };
enum class InitialState { PolarizedX, Thermal, CustomOccupations };

struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Couplings J, Delta, alpha and the field B are all in units where J sets the
// energy scale; public interfaces treat B/J and J*t as dimensionless.
struct HamiltonianSpec {
    Family family = Family::NearestNeighbor;
    double J = 1.0;
    double Delta = 0.0;  // NextNearestNeighbor only
    double alpha = 0.0;  // LongRange only
    double B = 0.0;
    int L = 0;
    Boundary boundary = Boundary::Periodic;

    void validate() const;
};

struct QuenchConfig {
    InitialState initial_state = InitialState::PolarizedX;
    double beta = 0.0;  // Thermal only
    double t_max = 9.0;
    double dt = 0.01;
    std::vector<double> b_grid;
    int sample_stride = 1;

    void validate() const;
};

// Symmetric pair couplings, stored as the strict upper triangle.
class CouplingMatrix {
  public:
    CouplingMatrix() = default;
    explicit CouplingMatrix(int L) : L_(L), jij_(static_cast<std::size_t>(L) * L, 0.0) {}

    int size() const { return L_; }

    double operator()(int i, int j) const { return jij_[idx(i, j)]; }
    void set(int i, int j, double v) {
        jij_[idx(i, j)] = v;
        jij_[idx(j, i)] = v;
    }

  private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * L_ + j; }

    int L_ = 0;
    std::vector<double> jij_;
};

CouplingMatrix build_couplings(const HamiltonianSpec& spec);

// Energy of one x-basis configuration: -sum_{i<j} J_ij s_i s_j with s_i = 1-2*bit_i.
double classical_ising_energy(std::uint64_t bits, const CouplingMatrix& couplings);

std::string family_name(Family f);
std::string boundary_name(Boundary b);
std::string initial_state_name(InitialState s);
Family family_from_name(const std::string& name);
Boundary boundary_from_name(const std::string& name);
InitialState initial_state_from_name(const std::string& name);

std::string spec_to_json(const HamiltonianSpec& spec);
HamiltonianSpec spec_from_json(const std::string& text);
std::string config_to_json(const QuenchConfig& config);
QuenchConfig config_from_json(const std::string& text);

}  // namespace quenchlab
