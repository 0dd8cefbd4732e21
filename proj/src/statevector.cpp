#include "quenchlab/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>

namespace quenchlab {

namespace {

constexpr int kMaxL = 26;

inline std::uint64_t rotl_bits(std::uint64_t s, int d, int L, std::uint64_t mask) {
    return ((s << d) | (s >> (L - d))) & mask;
}

// Bond count sum_i s_i s_{i+d} around the ring.
inline int cyclic_bonds(std::uint64_t s, int d, int L, std::uint64_t mask) {
    return L - 2 * static_cast<int>(std::popcount((s ^ rotl_bits(s, d, L, mask)) & mask));
}

inline int open_bonds(std::uint64_t s, int d, int L) {
    const std::uint64_t pairs = (s ^ (s >> d)) & ((std::uint64_t(1) << (L - d)) - 1);
    return (L - d) - 2 * static_cast<int>(std::popcount(pairs));
}

template <typename T>
void fwht_tile(T* a, std::size_t n) {
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const T x = a[j];
                const T y = a[j + h];
                a[j] = x + y;
                a[j + h] = x - y;
            }
        }
    }
}

// High FWHT levels as panel-resident butterflies over tile rows.
template <typename T>
void fwht_high(T* a, std::size_t nrows, std::size_t ncols) {
    constexpr std::size_t kPanel = 32;
    for (std::size_t c0 = 0; c0 < ncols; c0 += kPanel) {
        const std::size_t w = std::min(kPanel, ncols - c0);
        for (std::size_t h = 1; h < nrows; h <<= 1) {
            for (std::size_t r = 0; r < nrows; r += h << 1) {
                for (std::size_t rr = r; rr < r + h; ++rr) {
                    T* p = a + rr * ncols + c0;
                    T* q = a + (rr + h) * ncols + c0;
                    for (std::size_t k = 0; k < w; ++k) {
                        const T x = p[k];
                        const T y = q[k];
                        p[k] = x + y;
                        q[k] = x - y;
                    }
                }
            }
        }
    }
}

template <typename T>
void fwht_raw_impl(T* a, int L) {
    const int Ll = std::min(L, 10);
    const std::size_t tile = std::size_t(1) << Ll;
    const std::size_t n = std::size_t(1) << L;
    for (std::size_t t0 = 0; t0 < n; t0 += tile) fwht_tile(a + t0, tile);
    if (L > Ll) fwht_high(a, n >> Ll, tile);
}

template <typename F>
double blocked_sum(std::size_t n, F value_at) {
    constexpr std::size_t kBlock = 4096;
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        double acc = 0.0;
        for (std::size_t i = b * kBlock; i < end; ++i) acc += value_at(i);
        partial[b] = acc;
    }
    // pairwise fold with fixed topology
    std::size_t m = nblocks;
    while (m > 1) {
        const std::size_t half = m / 2;
        for (std::size_t i = 0; i < half; ++i) partial[i] = partial[2 * i] + partial[2 * i + 1];
        if (m % 2) partial[half] = partial[m - 1];
        m = half + (m % 2);
    }
    return partial.empty() ? 0.0 : partial[0];
}

}  // namespace

namespace kernels {

void fwht_raw(std::complex<double>* a, int L) { fwht_raw_impl(a, L); }
void fwht_raw(double* a, int L) { fwht_raw_impl(a, L); }

double x_energy(std::uint64_t s, const HamiltonianSpec& spec) {
    const int L = spec.L;
    const std::uint64_t mask = (L == 64) ? ~std::uint64_t(0) : (std::uint64_t(1) << L) - 1;
    const bool periodic = spec.boundary == Boundary::Periodic;
    double e = 0.0;
    switch (spec.family) {
        case Family::NearestNeighbor:
            e = -spec.J * (periodic ? cyclic_bonds(s, 1, L, mask) : open_bonds(s, 1, L));
            break;
        case Family::NextNearestNeighbor: {
            e = -spec.J * (periodic ? cyclic_bonds(s, 1, L, mask) : open_bonds(s, 1, L));
            if (periodic) {
                // ring distance 2 exists only for L>=4; at L=4 the cyclic sum
                // visits each pair twice
                if (L >= 5)
                    e -= spec.J * spec.Delta * cyclic_bonds(s, 2, L, mask);
                else if (L == 4)
                    e -= 0.5 * spec.J * spec.Delta * cyclic_bonds(s, 2, L, mask);
            } else if (L >= 3) {
                e -= spec.J * spec.Delta * open_bonds(s, 2, L);
            }
            break;
        }
        case Family::LongRange:
            for (int d = 1; d < L; ++d)
                e -= spec.J * std::pow(d, -spec.alpha) * cyclic_bonds(s, d, L, mask);
            break;
    }
    return e;
}

std::vector<double> x_energy_table(const HamiltonianSpec& spec) {
    const std::size_t n = std::size_t(1) << spec.L;
    std::vector<double> table(n);
    for (std::size_t s = 0; s < n; ++s) table[s] = x_energy(s, spec);
    return table;
}

double block_tree_sum(const double* v, std::size_t n) {
    return blocked_sum(n, [v](std::size_t i) { return v[i]; });
}

}  // namespace kernels

std::size_t memory_budget_bytes() {
    if (const char* env = std::getenv("QUENCHLAB_MEM_BUDGET_BYTES")) {
        char* end = nullptr;
        const unsigned long long parsed = std::strtoull(env, &end, 10);
        if (end != env && parsed > 0) return static_cast<std::size_t>(parsed);
    }
    return std::size_t(4) << 30;
}

TrotterPlan TrotterPlan::make(double dt) {
    TrotterPlan plan;
    plan.dt = dt;
    plan.order = 4;
    const double p = 1.0 / (4.0 - std::cbrt(4.0));
    plan.stage_coefficients = {p, p, 1.0 - 4.0 * p, p, p};
    return plan;
}

void fwht(StateVector& psi) {
    if (psi.amp.size() != (std::size_t(1) << psi.L))
        throw std::invalid_argument("state length must be 2^L");
    kernels::fwht_raw(psi.amp.data(), psi.L);
    const double norm = std::pow(2.0, -0.5 * psi.L);
    for (auto& a : psi.amp) a *= norm;
}

StateVector prepare_polarized_x(int L) {
    if (L < 1 || L > kMaxL) throw SpecError("L out of range for state preparation");
    StateVector psi;
    psi.L = L;
    psi.amp.assign(std::size_t(1) << L, std::pow(2.0, -0.5 * L));
    return psi;
}

struct Evolver::Impl {
    enum class XMode { Popcount2d, TableLr, EnergyLr, RecomputeLr };

    HamiltonianSpec spec;
    TrotterPlan plan_;
    int L = 0;
    int Ll = 0;
    std::uint64_t mask = 0;
    XMode xmode = XMode::Popcount2d;

    // merged z kicks: 6 boundary tables indexed by popcount
    std::array<std::vector<std::complex<double>>, 6> zph;
    // x kick per distinct stage angle; stage -> distinct index
    std::array<int, 5> stage_table{};
    // Popcount2d: [(L+1)*(L+1)] over (k1, k2); TableLr: [2^L]
    std::vector<std::vector<std::complex<double>>> xph;
    std::vector<double> ex;        // EnergyLr
    std::array<double, 2> tau{};   // distinct stage angles * dt

    double delta_coeff() const {
        if (spec.family != Family::NextNearestNeighbor) return 0.0;
        if (spec.L >= 5) return spec.Delta;
        if (spec.L == 4) return 0.5 * spec.Delta;
        return 0.0;
    }

    void build(const HamiltonianSpec& s, const TrotterPlan& p) {
        spec = s;
        plan_ = p;
        L = s.L;
        Ll = std::min(L, 10);
        mask = (std::uint64_t(1) << L) - 1;

        const auto& a = p.stage_coefficients;
        const std::array<double, 6> zb = {0.5 * a[0],         0.5 * (a[0] + a[1]), 0.5 * (a[1] + a[2]),
                                          0.5 * (a[2] + a[3]), 0.5 * (a[3] + a[4]), 0.5 * a[4]};
        for (int m = 0; m < 6; ++m) {
            zph[m].resize(L + 1);
            for (int k = 0; k <= L; ++k)
                zph[m][k] = std::polar(1.0, -zb[m] * p.dt * s.B * (L - 2 * k));
        }

        tau = {a[0] * p.dt, a[2] * p.dt};
        stage_table = {0, 0, 1, 0, 0};

        const double fold = std::pow(2.0, -L);  // the two unnormalized FWHTs per stage
        if (spec.family == Family::LongRange) {
            const std::size_t n = std::size_t(1) << L;
            const std::size_t state_bytes = n * sizeof(std::complex<double>) * 2;
            const std::size_t table_bytes = 2 * n * sizeof(std::complex<double>);
            if (L <= 24 && state_bytes + table_bytes <= memory_budget_bytes()) {
                xmode = XMode::TableLr;
                auto energies = kernels::x_energy_table(spec);
                xph.resize(2);
                for (int v = 0; v < 2; ++v) {
                    xph[v].resize(n);
                    for (std::size_t i = 0; i < n; ++i)
                        xph[v][i] = std::polar(fold, -tau[v] * energies[i]);
                }
            } else if (state_bytes + n * sizeof(double) <= memory_budget_bytes()) {
                xmode = XMode::EnergyLr;
                ex = kernels::x_energy_table(spec);
            } else {
                xmode = XMode::RecomputeLr;
            }
        } else {
            xmode = XMode::Popcount2d;
            xph.resize(2);
            const double dc = delta_coeff();
            for (int v = 0; v < 2; ++v) {
                xph[v].resize(std::size_t(L + 1) * (L + 1));
                for (int k1 = 0; k1 <= L; ++k1) {
                    for (int k2 = 0; k2 <= L; ++k2) {
                        const double e = -spec.J * (L - 2 * k1) - spec.J * dc * (L - 2 * k2);
                        xph[v][std::size_t(k1) * (L + 1) + k2] = std::polar(fold, -tau[v] * e);
                    }
                }
            }
        }
    }

    std::size_t table_bytes() const {
        std::size_t b = ex.size() * sizeof(double);
        for (const auto& t : xph) b += t.size() * sizeof(std::complex<double>);
        return b;
    }

    void apply_z_tile(std::complex<double>* a, std::uint64_t base, std::size_t n, int which) const {
        const int hi = static_cast<int>(std::popcount(base));
        const auto* table = zph[which].data();
        for (std::size_t c = 0; c < n; ++c)
            a[c] *= table[hi + std::popcount(c)];
    }

    void apply_x_panel(std::complex<double>* amp, std::size_t rr, std::size_t c0, std::size_t w,
                       int stage) const {
        const std::size_t tile = std::size_t(1) << Ll;
        const std::uint64_t base = rr * tile + c0;
        std::complex<double>* p = amp + base;
        const int v = stage_table[stage];
        switch (xmode) {
            case XMode::Popcount2d: {
                const auto* table = xph[v].data();
                const bool nnn = delta_coeff() != 0.0;
                for (std::size_t k = 0; k < w; ++k) {
                    const std::uint64_t s = base + k;
                    const int k1 = static_cast<int>(std::popcount((s ^ rotl_bits(s, 1, L, mask)) & mask));
                    const int k2 =
                        nnn ? static_cast<int>(std::popcount((s ^ rotl_bits(s, 2, L, mask)) & mask)) : 0;
                    p[k] *= table[std::size_t(k1) * (L + 1) + k2];
                }
                break;
            }
            case XMode::TableLr: {
                const auto* table = xph[v].data();
                for (std::size_t k = 0; k < w; ++k) p[k] *= table[base + k];
                break;
            }
            case XMode::EnergyLr: {
                const double fold = std::pow(2.0, -L);
                for (std::size_t k = 0; k < w; ++k)
                    p[k] *= std::polar(fold, -tau[v] * ex[base + k]);
                break;
            }
            case XMode::RecomputeLr: {
                const double fold = std::pow(2.0, -L);
                for (std::size_t k = 0; k < w; ++k)
                    p[k] *= std::polar(fold, -tau[v] * kernels::x_energy(base + k, spec));
                break;
            }
        }
    }

    // panel pass: high FWHT levels, x kick, high levels again
    void panel_pass(std::complex<double>* amp, int stage) const {
        const std::size_t tile = std::size_t(1) << Ll;
        const std::size_t nrows = std::size_t(1) << (L - Ll);
        constexpr std::size_t kPanel = 32;
        for (std::size_t c0 = 0; c0 < tile; c0 += kPanel) {
            const std::size_t w = std::min(kPanel, tile - c0);
            auto half = [&](auto dummy) {
                (void)dummy;
                for (std::size_t h = 1; h < nrows; h <<= 1) {
                    for (std::size_t r = 0; r < nrows; r += h << 1) {
                        for (std::size_t rr = r; rr < r + h; ++rr) {
                            std::complex<double>* p = amp + rr * tile + c0;
                            std::complex<double>* q = amp + (rr + h) * tile + c0;
                            for (std::size_t k = 0; k < w; ++k) {
                                const std::complex<double> x = p[k];
                                const std::complex<double> y = q[k];
                                p[k] = x + y;
                                q[k] = x - y;
                            }
                        }
                    }
                }
            };
            half(0);
            for (std::size_t rr = 0; rr < nrows; ++rr) apply_x_panel(amp, rr, c0, w, stage);
            half(0);
        }
    }

    void step(StateVector& psi) const {
        const std::size_t n = std::size_t(1) << L;
        const std::size_t tile = std::size_t(1) << Ll;
        std::complex<double>* a = psi.amp.data();

        for (std::size_t t0 = 0; t0 < n; t0 += tile) {
            apply_z_tile(a + t0, t0, tile, 0);
            fwht_tile(a + t0, tile);
        }
        for (int stage = 0; stage < 5; ++stage) {
            panel_pass(a, stage);
            if (stage < 4) {
                for (std::size_t t0 = 0; t0 < n; t0 += tile) {
                    fwht_tile(a + t0, tile);
                    apply_z_tile(a + t0, t0, tile, stage + 1);
                    fwht_tile(a + t0, tile);
                }
            } else {
                for (std::size_t t0 = 0; t0 < n; t0 += tile) {
                    fwht_tile(a + t0, tile);
                    apply_z_tile(a + t0, t0, tile, 5);
                }
            }
        }
    }
};

Evolver::Evolver(const HamiltonianSpec& spec, const TrotterPlan& plan) : impl_(new Impl) {
    spec.validate();
    if (spec.boundary != Boundary::Periodic)
        throw SpecError("state-vector evolution requires Periodic boundaries");
    if (spec.L > kMaxL) throw SpecError("L exceeds the state-vector cap");
    impl_->build(spec, plan);
}

Evolver::~Evolver() = default;
Evolver::Evolver(Evolver&&) noexcept = default;
Evolver& Evolver::operator=(Evolver&&) noexcept = default;

void Evolver::step(StateVector& psi) const {
    if (psi.L != impl_->L || psi.amp.size() != (std::size_t(1) << impl_->L))
        throw std::invalid_argument("state does not match the evolver's L");
    impl_->step(psi);
}

const TrotterPlan& Evolver::plan() const { return impl_->plan_; }
std::size_t Evolver::table_bytes() const { return impl_->table_bytes(); }

namespace {

double xx_ring_average(const std::vector<std::complex<double>>& xbasis, int L) {
    const std::uint64_t mask = (std::uint64_t(1) << L) - 1;
    const double fold = std::pow(2.0, -L);
    const double sum = blocked_sum(xbasis.size(), [&](std::size_t s) {
        const double bonds = cyclic_bonds(s, 1, L, mask);
        return std::norm(xbasis[s]) * bonds;
    });
    return fold * sum / L;
}

}  // namespace

double measure_g(const StateVector& psi, const HamiltonianSpec& spec) {
    if (psi.L != spec.L) throw std::invalid_argument("state does not match the spec's L");
    std::vector<std::complex<double>> scratch(psi.amp);
    kernels::fwht_raw(scratch.data(), psi.L);
    return xx_ring_average(scratch, psi.L);
}

double measure_bond_xx(const StateVector& psi, int i, int j) {
    if (i < 0 || j < 0 || i >= psi.L || j >= psi.L || i == j)
        throw std::invalid_argument("bond sites out of range");
    std::vector<std::complex<double>> scratch(psi.amp);
    kernels::fwht_raw(scratch.data(), psi.L);
    const double fold = std::pow(2.0, -psi.L);
    const double sum = blocked_sum(scratch.size(), [&](std::size_t s) {
        const double sign = (((s >> i) ^ (s >> j)) & 1u) ? -1.0 : 1.0;
        return std::norm(scratch[s]) * sign;
    });
    return fold * sum;
}

double measure_energy(const StateVector& psi, const HamiltonianSpec& spec) {
    if (psi.L != spec.L) throw std::invalid_argument("state does not match the spec's L");
    const double ez = blocked_sum(psi.amp.size(), [&](std::size_t s) {
        return std::norm(psi.amp[s]) * kernels::z_energy(s, spec.B, spec.L);
    });
    std::vector<std::complex<double>> scratch(psi.amp);
    kernels::fwht_raw(scratch.data(), psi.L);
    const double fold = std::pow(2.0, -psi.L);
    const double exp_x = blocked_sum(scratch.size(), [&](std::size_t s) {
        return std::norm(scratch[s]) * kernels::x_energy(s, spec);
    });
    return ez + fold * exp_x;
}

std::vector<double> running_average(const std::vector<double>& g, double dt) {
    const std::size_t n = g.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    out[0] = g[0];
    if (n == 1) return out;
    if (n < 4) {
        double integral = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            integral += 0.5 * dt * (g[i - 1] + g[i]);
            out[i] = integral / (dt * i);
        }
        return out;
    }
    // cumulative 4th-order rule: integrate each interval over the cubic
    // through the nearest 4 samples
    static constexpr double w0[4] = {9.0, 19.0, -5.0, 1.0};
    static constexpr double w1[4] = {-1.0, 13.0, 13.0, -1.0};
    static constexpr double w2[4] = {1.0, -5.0, 19.0, 9.0};
    double integral = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t j = std::min(i - 1, n - 4);
        const double* w = (i - 1 == j) ? w0 : ((i - 1 == j + 1) ? w1 : w2);
        integral +=
            dt / 24.0 * (w[0] * g[j] + w[1] * g[j + 1] + w[2] * g[j + 2] + w[3] * g[j + 3]);
        out[i] = integral / (dt * i);
    }
    return out;
}

CorrelatorSeries run_quench(const HamiltonianSpec& spec, const QuenchConfig& config) {
    spec.validate();
    config.validate();
    if (config.initial_state != InitialState::PolarizedX)
        throw SpecError("state-vector quenches start from the PolarizedX state");
    if (spec.L > kMaxL) throw SpecError("L exceeds the state-vector cap");

    const std::size_t n = std::size_t(1) << spec.L;
    const std::size_t state_bytes = 2 * n * sizeof(std::complex<double>);  // amplitudes + scratch
    if (state_bytes > memory_budget_bytes())
        throw MemoryBudgetError("2^L amplitudes exceed QUENCHLAB_MEM_BUDGET_BYTES");

    StateVector psi = prepare_polarized_x(spec.L);
    Evolver evolver(spec, TrotterPlan::make(config.dt));

    const long long steps = std::llround(config.t_max / config.dt);
    std::vector<std::complex<double>> scratch(n);

    auto sample_g = [&]() {
        std::memcpy(scratch.data(), psi.amp.data(), n * sizeof(std::complex<double>));
        kernels::fwht_raw(scratch.data(), spec.L);
        return xx_ring_average(scratch, spec.L);
    };

    CorrelatorSeries series;
    series.b_over_j = spec.B / spec.J;
    series.t.push_back(0.0);
    series.g.push_back(sample_g());
    for (long long k = 1; k <= steps; ++k) {
        evolver.step(psi);
        if (k % config.sample_stride == 0) {
            series.t.push_back(k * config.dt);
            series.g.push_back(sample_g());
        }
    }
    series.g_av = running_average(series.g, config.dt * config.sample_stride);
    return series;
}

void save_checkpoint(const std::string& path, const StateVector& psi) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint format assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write("QLSV", 4);
    const std::uint32_t version = 1;
    const std::uint32_t L = psi.L;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&L), sizeof(L));
    out.write(reinterpret_cast<const char*>(psi.amp.data()),
              static_cast<std::streamsize>(psi.amp.size() * sizeof(std::complex<double>)));
    if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

StateVector load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (std::memcmp(magic, "QLSV", 4) != 0) throw std::runtime_error("bad checkpoint magic");
    std::uint32_t version = 0;
    std::uint32_t L = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&L), sizeof(L));
    if (version != 1) throw std::runtime_error("unsupported checkpoint version");
    if (L < 1 || L > kMaxL) throw std::runtime_error("checkpoint L out of range");
    StateVector psi;
    psi.L = static_cast<int>(L);
    psi.amp.resize(std::size_t(1) << L);
    in.read(reinterpret_cast<char*>(psi.amp.data()),
            static_cast<std::streamsize>(psi.amp.size() * sizeof(std::complex<double>)));
    if (!in) throw std::runtime_error("short read from checkpoint: " + path);
    return psi;
}

}  // namespace quenchlab
