#include "quenchlab/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "quenchlab/free_fermion.hpp"
#include "quenchlab/groundstate.hpp"
#include "quenchlab/io.hpp"
#include "quenchlab/meanfield.hpp"
#include "quenchlab/model.hpp"
#include "quenchlab/scaling.hpp"
#include "quenchlab/statevector.hpp"
#include "quenchlab/version.hpp"

namespace quenchlab {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> make_grid(double lo, double hi, double step) {
    if (step <= 0.0) throw UsageError("--b-step must be positive");
    if (hi < lo) throw UsageError("--b-max must not be below --b-min");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (n < 2) throw UsageError("--b-step too coarse for the [--b-min, --b-max] interval");
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = lo + i * step;
    return grid;
}

void require_times(const std::vector<double>& times) {
    if (times.size() < 2) throw UsageError("--times needs at least two comma-separated values");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] <= 0.0) throw UsageError("--times must be positive");
        if (i && times[i] <= times[i - 1]) throw UsageError("--times must be strictly increasing");
    }
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

class Manifest {
  public:
    Manifest(std::string command, std::string out_dir)
        : command_(std::move(command)), out_dir_(std::move(out_dir)), start_(clock_t::now()) {
        std::filesystem::create_directories(out_dir_);
    }

    std::string path(const std::string& name) {
        const std::string p = (std::filesystem::path(out_dir_) / name).string();
        outputs_.push_back(p);
        return p;
    }

    void set_config(json config) { config_ = std::move(config); }

    void write() {
        const double wall =
            std::chrono::duration<double>(clock_t::now() - start_).count();
        json j;
        j["command"] = command_;
        j["config"] = config_;
        j["version"] = kVersion;
        j["wall_time_seconds"] = wall;
        j["outputs"] = outputs_;
        write_text_file((std::filesystem::path(out_dir_) / "manifest.json").string(),
                        j.dump(2) + "\n");
    }

  private:
    using clock_t = std::chrono::steady_clock;
    std::string command_;
    std::string out_dir_;
    clock_t::time_point start_;
    std::vector<std::string> outputs_;
    json config_;
};

void report_estimate(const char* label, const CriticalPointEstimate& e) {
    std::printf("%s: b_c = %.6g +- %.3g (%s)\n", label, e.b_c, e.uncertainty,
                method_name(e.method).c_str());
}

struct ExactSweepArgs {
    int L = 100;
    double b_min = 0.8, b_max = 1.2, b_step = 0.01;
    std::vector<double> times;
    std::string out_dir = ".";
};

int cmd_exact_sweep(const ExactSweepArgs& a) {
    require_times(a.times);
    const auto grid = make_grid(a.b_min, a.b_max, a.b_step);
    Manifest manifest("exact-sweep", a.out_dir);
    manifest.set_config(json{{"L", a.L},
                             {"b_min", a.b_min},
                             {"b_max", a.b_max},
                             {"b_step", a.b_step},
                             {"times", a.times}});

    const DerivativeCurveSet curves = derivative_curves_exact(1.0, a.L, a.times, grid);
    write_curves_csv(manifest.path("curves.csv"), curves, CurveCsvStyle::FreeFermion);

    const CrossingResult crossing = find_crossing(curves);
    write_text_file(manifest.path("estimate.json"), estimate_to_json(crossing.estimate));
    if (curves.times.size() >= 3) {
        const CollapseResult collapse = collapse_fit(curves, grid.front(), grid.back());
        write_text_file(manifest.path("collapse.json"), estimate_to_json(collapse.estimate));
        report_estimate("collapse", collapse.estimate);
    }

    manifest.write();
    report_estimate("crossing", crossing.estimate);
    return kExitOk;
}

struct SvSweepArgs {
    std::string family = "nnn";
    double delta = 0.0;
    double alpha = 6.0;
    int L = 12;
    double dt = 0.02;
    double t_max = 0.0;
    double b_min = 0.9, b_max = 1.1, b_step = 0.025;
    std::vector<double> times;
    double delta_b = 1e-3;
    int threads = 0;
    std::string out_dir = ".";
};

int cmd_sv_sweep(const SvSweepArgs& a) {
    require_times(a.times);
    const auto grid = make_grid(a.b_min, a.b_max, a.b_step);

    HamiltonianSpec spec;
    spec.family = family_from_name(a.family);
    spec.J = 1.0;
    spec.Delta = a.delta;
    spec.alpha = a.alpha;
    spec.L = a.L;
    spec.boundary = Boundary::Periodic;

    QuenchConfig config;
    config.initial_state = InitialState::PolarizedX;
    config.dt = a.dt;
    config.t_max = (a.t_max > 0.0) ? a.t_max : a.times.back();
    config.sample_stride = 1;
    if (config.t_max + 1e-9 < a.times.back())
        throw UsageError("--t-max must cover the largest entry of --times");

    std::vector<std::size_t> sample_index(a.times.size());
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        const double steps = a.times[i] / a.dt;
        sample_index[i] = static_cast<std::size_t>(std::llround(steps));
        if (std::abs(steps - std::round(steps)) > 1e-6)
            throw UsageError("--times must be integer multiples of --dt");
    }

    Manifest manifest("sv-sweep", a.out_dir);
    manifest.set_config(json{{"spec", json::parse(spec_to_json(spec))},
                             {"quench", json::parse(config_to_json(config))},
                             {"b_min", a.b_min},
                             {"b_max", a.b_max},
                             {"b_step", a.b_step},
                             {"times", a.times},
                             {"delta_b", a.delta_b},
                             {"threads", a.threads}});

    GavSweep sweep;
    sweep.times = a.times;
    sweep.b_grid = grid;
    sweep.plus.assign(grid.size(), std::vector<double>(a.times.size()));
    sweep.minus.assign(grid.size(), std::vector<double>(a.times.size()));

    const int threads =
        (a.threads > 0) ? a.threads : static_cast<int>(std::thread::hardware_concurrency());
    parallel_for(static_cast<int>(grid.size()) * 2, threads, [&](int task) {
        const int bi = task / 2;
        const bool plus = (task % 2) == 0;
        HamiltonianSpec s = spec;
        s.B = grid[bi] + (plus ? a.delta_b : -a.delta_b);
        const CorrelatorSeries series = run_quench(s, config);
        auto& slot = plus ? sweep.plus[bi] : sweep.minus[bi];
        for (std::size_t ti = 0; ti < a.times.size(); ++ti) {
            if (sample_index[ti] >= series.g_av.size())
                throw UsageError("--times exceed the simulated span");
            slot[ti] = series.g_av[sample_index[ti]];
        }
    });

    const DerivativeCurveSet curves = derivative_curves(sweep, a.delta_b);
    write_curves_csv(manifest.path("curves.csv"), curves, CurveCsvStyle::Scaling);

    const CrossingResult crossing = find_crossing(curves);
    write_text_file(manifest.path("estimate.json"), estimate_to_json(crossing.estimate));
    if (curves.times.size() >= 3) {
        const CollapseResult collapse = collapse_fit(curves, grid.front(), grid.back());
        write_text_file(manifest.path("collapse.json"), estimate_to_json(collapse.estimate));
        report_estimate("collapse", collapse.estimate);
    }

    manifest.write();
    report_estimate("crossing", crossing.estimate);
    return kExitOk;
}

struct BinderArgs {
    std::string family = "nn";
    double delta = 0.0;
    std::vector<int> sizes;
    double b_min = 0.8, b_max = 1.2, b_step = 0.05;
    int threads = 0;
    std::string out_dir = ".";
};

int cmd_binder(const BinderArgs& a) {
    if (a.sizes.size() < 2) throw UsageError("--sizes needs at least two system sizes");
    const auto grid = make_grid(a.b_min, a.b_max, a.b_step);

    HamiltonianSpec spec;
    spec.family = family_from_name(a.family);
    spec.J = 1.0;
    spec.Delta = a.delta;
    spec.boundary = Boundary::Periodic;

    Manifest manifest("binder", a.out_dir);
    manifest.set_config(json{{"family", a.family},
                             {"delta", a.delta},
                             {"sizes", a.sizes},
                             {"b_min", a.b_min},
                             {"b_max", a.b_max},
                             {"b_step", a.b_step},
                             {"threads", a.threads}});

    std::vector<BinderCurve> curves(a.sizes.size());
    const int threads =
        (a.threads > 0) ? a.threads : static_cast<int>(std::thread::hardware_concurrency());
    parallel_for(static_cast<int>(a.sizes.size()), threads, [&](int i) {
        HamiltonianSpec s = spec;
        s.L = a.sizes[i];
        curves[i] = binder_curve(s, grid);
    });

    write_binder_csv(manifest.path("curves.csv"), curves);
    const CrossingResult crossing = binder_crossing(curves);
    write_text_file(manifest.path("estimate.json"), estimate_to_json(crossing.estimate));

    manifest.write();
    report_estimate("binder", crossing.estimate);
    return kExitOk;
}

struct MeanFieldArgs {
    double delta = 0.0;
    std::string out_dir = ".";
};

int cmd_meanfield(const MeanFieldArgs& a) {
    Manifest manifest("meanfield", a.out_dir);
    manifest.set_config(json{{"delta", a.delta}});
    const MeanFieldPrediction p = predict_critical_points(a.delta);
    const std::string text = meanfield_to_json(p);
    write_text_file(manifest.path("meanfield.json"), text);
    manifest.write();
    std::fputs(text.c_str(), stdout);
    return kExitOk;
}

struct DispersionArgs {
    int L = 100;
    double b = 1.0;
    std::string out_dir = ".";
};

int cmd_dispersion(const DispersionArgs& a) {
    Manifest manifest("dispersion", a.out_dir);
    manifest.set_config(json{{"L", a.L}, {"b", a.b}});
    const MomentumGrid grid = momentum_grid(a.L);
    std::vector<std::vector<double>> rows;
    rows.reserve(grid.momenta.size());
    for (double q : grid.momenta) rows.push_back({q, dispersion(a.b, 1.0, q)});
    write_table_csv(manifest.path("curves.csv"), "q,omega_over_J", rows);
    manifest.write();
    return kExitOk;
}

struct GgeArgs {
    int L = 1000;
    double b_min = 0.5, b_max = 1.5, b_step = 0.01;
    bool thermal = false;
    bool polarized = false;
    double beta = 1.0;
    std::string occupations_path;
    std::string out_dir = ".";
};

int cmd_gge(const GgeArgs& a) {
    const int modes = int(a.thermal) + int(a.polarized) + int(!a.occupations_path.empty());
    if (modes > 1)
        throw UsageError("choose one of --thermal, --polarized, --occupations");
    const auto grid = make_grid(a.b_min, a.b_max, a.b_step);
    const auto momenta = full_zone_momenta(a.L);

    std::vector<double> fixed_occ;
    if (!a.occupations_path.empty()) {
        for (const auto& row : read_table_csv(a.occupations_path)) {
            if (row.empty()) continue;
            fixed_occ.push_back(row.back());
        }
        if (fixed_occ.size() != momenta.size())
            throw UsageError("--occupations must list one value per momentum (" +
                             std::to_string(momenta.size()) + " for this L)");
    }

    Manifest manifest("gge", a.out_dir);
    manifest.set_config(json{{"L", a.L},
                             {"b_min", a.b_min},
                             {"b_max", a.b_max},
                             {"b_step", a.b_step},
                             {"mode", a.thermal ? "thermal"
                                                : (!a.occupations_path.empty() ? "custom" : "polarized")},
                             {"beta", a.beta},
                             {"occupations", a.occupations_path}});

    std::vector<std::vector<double>> rows;
    rows.reserve(grid.size());
    for (double b : grid) {
        std::vector<double> occ;
        if (a.thermal)
            occ = thermal_occupations(b, 1.0, a.beta, momenta);
        else if (!fixed_occ.empty())
            occ = fixed_occ;
        else
            occ = polarized_occupations(b, 1.0, momenta);
        rows.push_back({b, gge_correlator(b, 1.0, a.L, occ)});
    }
    write_table_csv(manifest.path("curves.csv"), "B_over_J,value", rows);
    manifest.write();
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("quenchlab");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), const_cast<char**>(argv.data()));
}

int run_cli(int argc, char** argv) {
    CLI::App app{"transverse-field Ising chain quench toolkit"};
    app.require_subcommand(1);

    ExactSweepArgs exact;
    auto* exact_cmd = app.add_subcommand(
        "exact-sweep", "free-fermion dG_av/dB sweep with crossing and collapse estimates");
    exact_cmd->add_option("--L", exact.L, "chain length");
    exact_cmd->add_option("--b-min", exact.b_min, "lowest B/J");
    exact_cmd->add_option("--b-max", exact.b_max, "highest B/J");
    exact_cmd->add_option("--b-step", exact.b_step, "B/J grid step");
    exact_cmd->add_option("--times", exact.times, "comma list of Jt values")
        ->delimiter(',')
        ->required();
    exact_cmd->add_option("--out-dir", exact.out_dir, "output directory");

    SvSweepArgs sv;
    auto* sv_cmd = app.add_subcommand(
        "sv-sweep", "state-vector dG_av/dB sweep via central differences at B +- delta-b");
    sv_cmd->add_option("--family", sv.family, "nn, nnn, or lr")
        ->check(CLI::IsMember({"nn", "nnn", "lr"}));
    sv_cmd->add_option("--delta", sv.delta, "next-nearest coupling ratio");
    sv_cmd->add_option("--alpha", sv.alpha, "long-range exponent");
    sv_cmd->add_option("--L", sv.L, "chain length");
    sv_cmd->add_option("--dt", sv.dt, "Trotter step");
    sv_cmd->add_option("--t-max", sv.t_max, "simulated span (default: largest time)");
    sv_cmd->add_option("--b-min", sv.b_min, "lowest B/J");
    sv_cmd->add_option("--b-max", sv.b_max, "highest B/J");
    sv_cmd->add_option("--b-step", sv.b_step, "B/J grid step");
    sv_cmd->add_option("--times", sv.times, "comma list of Jt values")->delimiter(',')->required();
    sv_cmd->add_option("--delta-b", sv.delta_b, "central-difference half step");
    sv_cmd->add_option("--threads", sv.threads, "worker threads (default: hardware)");
    sv_cmd->add_option("--out-dir", sv.out_dir, "output directory");

    BinderArgs binder;
    auto* binder_cmd =
        app.add_subcommand("binder", "ground-state Binder cumulant curves and their crossing");
    binder_cmd->add_option("--family", binder.family, "nn or nnn")
        ->check(CLI::IsMember({"nn", "nnn"}));
    binder_cmd->add_option("--delta", binder.delta, "next-nearest coupling ratio");
    binder_cmd->add_option("--sizes", binder.sizes, "comma list of chain lengths")
        ->delimiter(',')
        ->required();
    binder_cmd->add_option("--b-min", binder.b_min, "lowest B/J");
    binder_cmd->add_option("--b-max", binder.b_max, "highest B/J");
    binder_cmd->add_option("--b-step", binder.b_step, "B/J grid step");
    binder_cmd->add_option("--threads", binder.threads, "worker threads (default: hardware)");
    binder_cmd->add_option("--out-dir", binder.out_dir, "output directory");

    MeanFieldArgs mf;
    auto* mf_cmd = app.add_subcommand("meanfield", "first-order critical-point predictions");
    mf_cmd->add_option("--delta", mf.delta, "next-nearest coupling ratio")->required();
    mf_cmd->add_option("--out-dir", mf.out_dir, "output directory");

    DispersionArgs disp;
    auto* disp_cmd = app.add_subcommand("dispersion", "quasiparticle dispersion table");
    disp_cmd->add_option("--L", disp.L, "chain length");
    disp_cmd->add_option("--b", disp.b, "transverse field B/J");
    disp_cmd->add_option("--out-dir", disp.out_dir, "output directory");

    GgeArgs gge;
    auto* gge_cmd = app.add_subcommand("gge", "generalized-Gibbs correlator across a B/J range");
    gge_cmd->add_option("--L", gge.L, "chain length");
    gge_cmd->add_option("--b-min", gge.b_min, "lowest B/J");
    gge_cmd->add_option("--b-max", gge.b_max, "highest B/J");
    gge_cmd->add_option("--b-step", gge.b_step, "B/J grid step");
    gge_cmd->add_flag("--thermal", gge.thermal, "thermal occupations at --beta");
    gge_cmd->add_flag("--polarized", gge.polarized, "post-quench occupations (default)");
    gge_cmd->add_option("--beta", gge.beta, "inverse temperature times J");
    gge_cmd->add_option("--occupations", gge.occupations_path, "CSV with one occupation per momentum");
    gge_cmd->add_option("--out-dir", gge.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*exact_cmd) return cmd_exact_sweep(exact);
        if (*sv_cmd) return cmd_sv_sweep(sv);
        if (*binder_cmd) return cmd_binder(binder);
        if (*mf_cmd) return cmd_meanfield(mf);
        if (*disp_cmd) return cmd_dispersion(disp);
        if (*gge_cmd) return cmd_gge(gge);
    } catch (const MemoryBudgetError& e) {
        std::fprintf(stderr, "resource limit: %s\n", e.what());
        return kExitResource;
    } catch (const NoCrossingError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const EmptyOverlapError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const SingularModeError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const DegenerateDenominatorError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const SpecError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace quenchlab
