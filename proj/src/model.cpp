#include "quenchlab/model.hpp"

#include <bit>
#include <cmath>
#include <nlohmann/json.hpp>

namespace quenchlab {

using nlohmann::json;

void HamiltonianSpec::validate() const {
    if (L < 3) throw SpecError("L must be at least 3");
    if (J <= 0.0) throw SpecError("J must be positive");
    if (B < 0.0) throw SpecError("B must be non-negative");
    if (family == Family::NextNearestNeighbor && Delta < 0.0)
        throw SpecError("Delta must be non-negative");
    if (family == Family::LongRange) {
        if (alpha <= 0.0) throw SpecError("alpha must be positive");
        if (boundary == Boundary::Open)
            throw SpecError("long-range couplings require Periodic boundaries (image term)");
    }
}

void QuenchConfig::validate() const {
    if (dt <= 0.0) throw SpecError("dt must be positive");
    if (t_max < 0.0) throw SpecError("t_max must be non-negative");
    if (t_max > 0.0 && dt > t_max) throw SpecError("dt must not exceed t_max");
    if (sample_stride < 1) throw SpecError("sample_stride must be at least 1");
    for (std::size_t i = 1; i < b_grid.size(); ++i)
        if (b_grid[i] <= b_grid[i - 1]) throw SpecError("b_grid must be strictly increasing");
    if (initial_state == InitialState::Thermal && beta < 0.0)
        throw SpecError("beta must be non-negative");
}

CouplingMatrix build_couplings(const HamiltonianSpec& spec) {
    spec.validate();
    const int L = spec.L;
    CouplingMatrix m(L);
    const bool periodic = spec.boundary == Boundary::Periodic;

    auto bond_distance = [&](int i, int j) {
        int d = j - i;
        if (periodic) d = std::min(d, L - d);
        return d;
    };

    for (int i = 0; i < L; ++i) {
        for (int j = i + 1; j < L; ++j) {
            const int d = j - i;
            switch (spec.family) {
                case Family::NearestNeighbor:
                    if (bond_distance(i, j) == 1) m.set(i, j, spec.J);
                    break;
                case Family::NextNearestNeighbor:
                    if (bond_distance(i, j) == 1)
                        m.set(i, j, spec.J);
                    else if (bond_distance(i, j) == 2)
                        m.set(i, j, spec.J * spec.Delta);
                    break;
                case Family::LongRange:
                    m.set(i, j, spec.J * (std::pow(d, -spec.alpha) + std::pow(L - d, -spec.alpha)));
                    break;
            }
        }
    }
    return m;
}

double classical_ising_energy(std::uint64_t bits, const CouplingMatrix& couplings) {
    const int L = couplings.size();
    if (L > 0 && L < 64 && (bits >> L) != 0)
        throw SpecError("spin configuration has bits beyond length L");
    double e = 0.0;
    for (int i = 0; i < L; ++i) {
        const double si = 1.0 - 2.0 * ((bits >> i) & 1u);
        for (int j = i + 1; j < L; ++j) {
            const double jij = couplings(i, j);
            if (jij == 0.0) continue;
            const double sj = 1.0 - 2.0 * ((bits >> j) & 1u);
            e -= jij * si * sj;
        }
    }
    return e;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::NearestNeighbor: return "NearestNeighbor";
        case Family::NextNearestNeighbor: return "NextNearestNeighbor";
        case Family::LongRange: return "LongRange";
    }
    return "NearestNeighbor";
}

std::string boundary_name(Boundary b) {
    return b == Boundary::Periodic ? "Periodic" : "Open";
}

std::string initial_state_name(InitialState s) {
    switch (s) {
        case InitialState::PolarizedX: return "PolarizedX";
        case InitialState::Thermal: return "Thermal";
        case InitialState::CustomOccupations: return "CustomOccupations";
    }
    return "PolarizedX";
}

Family family_from_name(const std::string& name) {
    if (name == "NearestNeighbor" || name == "nn") return Family::NearestNeighbor;
    if (name == "NextNearestNeighbor" || name == "nnn") return Family::NextNearestNeighbor;
    if (name == "LongRange" || name == "lr") return Family::LongRange;
    throw SpecError("unknown family: " + name);
}

Boundary boundary_from_name(const std::string& name) {
    if (name == "Periodic" || name == "periodic") return Boundary::Periodic;
    if (name == "Open" || name == "open") return Boundary::Open;
    throw SpecError("unknown boundary: " + name);
}

InitialState initial_state_from_name(const std::string& name) {
    if (name == "PolarizedX") return InitialState::PolarizedX;
    if (name == "Thermal") return InitialState::Thermal;
    if (name == "CustomOccupations") return InitialState::CustomOccupations;
    throw SpecError("unknown initial_state: " + name);
}

std::string spec_to_json(const HamiltonianSpec& spec) {
    json j;
    j["family"] = family_name(spec.family);
    j["J"] = spec.J;
    j["Delta"] = spec.Delta;
    j["alpha"] = spec.alpha;
    j["B"] = spec.B;
    j["L"] = spec.L;
    j["boundary"] = boundary_name(spec.boundary);
    return j.dump(2);
}

HamiltonianSpec spec_from_json(const std::string& text) {
    const json j = json::parse(text);
    HamiltonianSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.J = j.at("J").get<double>();
    if (j.contains("Delta")) spec.Delta = j["Delta"].get<double>();
    if (j.contains("alpha")) spec.alpha = j["alpha"].get<double>();
    spec.B = j.at("B").get<double>();
    spec.L = j.at("L").get<int>();
    if (j.contains("boundary")) spec.boundary = boundary_from_name(j["boundary"].get<std::string>());
    spec.validate();
    return spec;
}

std::string config_to_json(const QuenchConfig& config) {
    json j;
    j["initial_state"] = initial_state_name(config.initial_state);
    j["beta"] = config.beta;
    j["t_max"] = config.t_max;
    j["dt"] = config.dt;
    j["b_grid"] = config.b_grid;
    j["sample_stride"] = config.sample_stride;
    return j.dump(2);
}

QuenchConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    QuenchConfig config;
    if (j.contains("initial_state"))
        config.initial_state = initial_state_from_name(j["initial_state"].get<std::string>());
    if (j.contains("beta")) config.beta = j["beta"].get<double>();
    if (j.contains("t_max")) config.t_max = j["t_max"].get<double>();
    if (j.contains("dt")) config.dt = j["dt"].get<double>();
    if (j.contains("b_grid")) config.b_grid = j["b_grid"].get<std::vector<double>>();
    if (j.contains("sample_stride")) config.sample_stride = j["sample_stride"].get<int>();
    config.validate();
    return config;
}

}  // namespace quenchlab
