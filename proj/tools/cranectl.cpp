// cranectl: synthesize state-feedback gains for the overhead-crane
// models, simulate the closed loop, certify stability, export
// feed-forward force profiles and compare transport experiments.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "crane/config.hpp"
#include "crane/model.hpp"
#include "crane/simulate.hpp"
#include "crane/stability.hpp"
#include "crane/synthesis.hpp"

namespace fs = std::filesystem;
using namespace crane;

namespace {

// Exit codes, also documented in the README.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitUncontrollable = 3;
constexpr int kExitPlacement = 4;
constexpr int kExitIntegration = 5;
constexpr int kExitNoCertificate = 6;
constexpr int kExitIncompatible = 7;

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

std::string matrix_text(const numkit::Mat& m, const char* indent = "  ") {
    std::string out;
    for (int i = 0; i < m.rows(); ++i) {
        out += indent;
        for (int j = 0; j < m.cols(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%12.6g", m(i, j));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string gain_csv(const numkit::Mat& k) {
    std::string out;
    for (int i = 0; i < k.rows(); ++i) {
        for (int j = 0; j < k.cols(); ++j) {
            if (j) out += ',';
            out += sim::format_double(k(i, j));
        }
        out += '\n';
    }
    return out;
}

numkit::Mat load_gain_csv(const std::string& path, int rows, int cols) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open gain file '" + path + "'");
    std::vector<std::vector<double>> grid;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        grid.push_back(std::move(row));
    }
    if (static_cast<int>(grid.size()) != rows)
        throw ConfigError("gain file '" + path + "' must have " + std::to_string(rows) + " rows");
    numkit::Mat k(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(grid[i].size()) != cols)
            throw ConfigError("gain file row has wrong column count");
        for (int j = 0; j < cols; ++j) k(i, j) = grid[i][j];
    }
    return k;
}

std::string spectrum_text(const std::vector<numkit::Complex>& vals) {
    std::string out;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        char buf[64];
        if (std::fabs(vals[i].imag()) > 1e-12)
            std::snprintf(buf, sizeof buf, "%.6g%+.6gi", vals[i].real(), vals[i].imag());
        else
            std::snprintf(buf, sizeof buf, "%.6g", vals[i].real());
        if (i) out += ", ";
        out += buf;
    }
    return out;
}

struct SynthesisResult {
    numkit::Mat a, b;
    synthesis::Gain k;
    synthesis::Gain kt;
    synthesis::ControllabilityReport ctrb;
    synthesis::PlacementCheck check;
};

// Controllability + gain + verification for a scenario; prints the
// synthesis part of the report and fills in the result.
int synthesize_pipeline(const sim::Scenario& sc, SynthesisResult& out,
                        const std::optional<std::string>& gain_path = std::nullopt) {
    if (sc.model == sim::CraneModelKind::varying6)
        model::linearize6(sc.params, out.a, out.b);
    else
        model::linearize4(sc.params, out.a, out.b);

    out.ctrb = synthesis::is_controllable(out.a, out.b);
    std::printf("controllability: rank %d / %d -> %s\n", out.ctrb.rank, out.ctrb.dimension,
                out.ctrb.controllable ? "controllable" : "NOT controllable");
    if (!out.ctrb.controllable) {
        std::fprintf(stderr, "error: the linearized pair (A, B) is not controllable\n");
        return kExitUncontrollable;
    }

    if (gain_path) {
        out.k.k = load_gain_csv(*gain_path, out.b.cols(), out.a.rows());
        std::printf("gain source: %s\n", gain_path->c_str());
    } else {
        out.k = sim::synthesize_gain(sc);
    }
    out.kt = (sc.model == sim::CraneModelKind::varying6) ? synthesis::gain_transform(out.k)
                                                         : out.k;

    std::printf("K =\n%s", matrix_text(out.k.k).c_str());
    if (sc.model == sim::CraneModelKind::varying6)
        std::printf("Ktilde =\n%s", matrix_text(out.kt.k).c_str());

    out.check = synthesis::verify_placement(out.a, out.b, out.k, sc.poles, 1e-6);
    std::printf("closed-loop eigenvalues: %s\n",
                spectrum_text(out.check.closed_loop_eigenvalues).c_str());
    std::printf("max pole mismatch: %.3g -> %s\n", out.check.max_mismatch,
                out.check.pass ? "PASS" : "FAIL");
    return kExitOk;
}

std::string plot_script(const sim::Scenario& sc) {
    const bool six = sc.model == sim::CraneModelKind::varying6;
    std::string gp;
    gp += "# gnuplot script: one panel per state variable and per force\n";
    gp += "set datafile separator ','\n";
    gp += "set grid\nset key off\nset xlabel 't [s]'\n";
    gp += "set terminal pngcairo size 1200,900\n";
    gp += "set output 'states.png'\n";
    if (six) {
        gp += "set multiplot layout 3,2\n";
        const char* titles[6] = {"x1: trolley position [m]", "x2: rope length [m]",
                                 "x3: sway angle [rad]",     "x4: trolley velocity [m/s]",
                                 "x5: rope rate [m/s]",      "x6: sway rate [rad/s]"};
        for (int i = 0; i < 6; ++i)
            gp += "set title '" + std::string(titles[i]) + "'\nplot 'trajectory.csv' using 1:" +
                  std::to_string(i + 2) + " with lines\n";
    } else {
        gp += "set multiplot layout 2,2\n";
        const char* titles[4] = {"x1: trolley position [m]", "x3: sway angle [rad]",
                                 "x4: trolley velocity [m/s]", "x6: sway rate [rad/s]"};
        for (int i = 0; i < 4; ++i)
            gp += "set title '" + std::string(titles[i]) + "'\nplot 'trajectory.csv' using 1:" +
                  std::to_string(i + 2) + " with lines\n";
    }
    gp += "unset multiplot\n";
    gp += "set output 'forces.png'\n";
    if (six) {
        gp += "set multiplot layout 2,2\n";
        const char* ft[3] = {"Fz [kN]", "Fl [kN]", "Ftheta [kN m]"};
        for (int i = 0; i < 3; ++i)
            gp += "set title '" + std::string(ft[i]) + "'\nplot 'trajectory.csv' using 1:" +
                  std::to_string(11 + i) + " with lines\n";
        gp += "unset multiplot\n";
    } else {
        gp += "set title 'Fz [kN]'\nplot 'trajectory.csv' using 1:7 with lines\n";
    }
    return gp;
}

void print_run_summary(const sim::Scenario& sc, const sim::Trajectory& tr) {
    for (const auto& w : tr.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    double err = 0.0;
    for (int i = 0; i < tr.state_dim; ++i) {
        const double d = tr.states.back()[i] - sc.target[i];
        err += d * d;
    }
    std::printf("samples: %zu (T = %g s)\n", tr.times.size(), tr.times.back());
    std::printf("|x(T) - target|_2 = %.6g\n", std::sqrt(err));
    const auto settle = sim::settle_time(tr, sc.target, sc.settle_fraction);
    const auto transport = sim::transport_time(tr, sc.target, sc.settle_fraction);
    if (settle)
        std::printf("settle time (all channels): %.4g s\n", *settle);
    else
        std::printf("settle time (all channels): not settled within horizon\n");
    if (transport)
        std::printf("transport time (trolley): %.4g s\n", *transport);
    else
        std::printf("transport time (trolley): not settled within horizon\n");
    std::printf("peak |theta|: %.6g rad\n", sim::peak_sway(tr));
}

int cmd_synthesize(const std::string& config_path, const std::string& out_dir) {
    config::RunConfig cfg = config::load_file(config_path);
    std::printf("model: %s\n",
                cfg.scenario.model == sim::CraneModelKind::varying6 ? "varying6" : "constant4");
    SynthesisResult syn;
    const int rc = synthesize_pipeline(cfg.scenario, syn);
    if (rc != kExitOk) return rc;
    if (!syn.check.pass) {
        std::fprintf(stderr, "error: closed-loop eigenvalues missed the requested poles\n");
        return kExitPlacement;
    }
    const fs::path gain_path = fs::path(out_dir) / "gain.csv";
    write_file(gain_path, gain_csv(syn.k.k));
    std::printf("gain file: %s\n", gain_path.string().c_str());
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool export_forces,
                 bool playback, std::optional<double> step, std::optional<double> horizon,
                 bool adaptive) {
    config::RunConfig cfg = config::load_file(config_path);
    sim::Scenario& sc = cfg.scenario;
    if (step) sc.step = *step;
    if (horizon) sc.horizon = *horizon;
    if (adaptive) sc.adaptive = true;
    sc.validate();

    std::printf("model: %s\n", sc.model == sim::CraneModelKind::varying6 ? "varying6" : "constant4");
    SynthesisResult syn;
    int rc = synthesize_pipeline(sc, syn);
    if (rc != kExitOk) return rc;
    if (!syn.check.pass) {
        std::fprintf(stderr, "error: closed-loop eigenvalues missed the requested poles\n");
        return kExitPlacement;
    }

    sim::Trajectory tr;
    try {
        tr = sim::integrate_closed_loop(sc, syn.k);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: integration failed: %s\n", e.what());
        return kExitIntegration;
    }
    print_run_summary(sc, tr);

    const fs::path out(out_dir);
    write_file(out / "trajectory.csv", sim::trajectory_csv(tr));
    write_file(out / "gain.csv", gain_csv(syn.k.k));
    write_file(out / "plots.gp", plot_script(sc));
    std::string files = (out / "trajectory.csv").string() + " " + (out / "gain.csv").string() +
                        " " + (out / "plots.gp").string();
    if (export_forces) {
        write_file(out / "forces.csv", sim::forces_csv(tr));
        files += " " + (out / "forces.csv").string();
    }
    std::printf("files: %s\n", files.c_str());

    if (playback) {
        try {
            const auto replay = sim::integrate_open_loop(sc, sim::ForceProfile::from_trajectory(tr));
            std::printf("playback max deviation: %.6g\n", sim::max_state_deviation(tr, replay));
        } catch (const Error& e) {
            std::fprintf(stderr, "error: playback failed: %s\n", e.what());
            return kExitIntegration;
        }
    }
    return kExitOk;
}

int cmd_analyze(const std::string& config_path, std::optional<std::uint64_t> seed,
                std::optional<int> samples, std::optional<double> rmax,
                const std::optional<std::string>& gain_path, bool linear_plant) {
    config::RunConfig cfg = config::load_file(config_path);
    const sim::Scenario& sc = cfg.scenario;
    if (seed) cfg.stability.seed = *seed;
    if (samples) cfg.stability.samples = *samples;
    if (rmax) cfg.stability.radius_max = *rmax;

    std::printf("model: %s\n", sc.model == sim::CraneModelKind::varying6 ? "varying6" : "constant4");
    SynthesisResult syn;
    const int rc = synthesize_pipeline(sc, syn, gain_path);
    if (rc != kExitOk) return rc;

    const numkit::Mat a_cl = syn.a - syn.b * syn.k.k;
    const numkit::Mat q = numkit::Mat::identity(a_cl.rows());

    stability::ClosedLoopRhs rhs;
    if (linear_plant) {
        rhs = [a_cl](std::span<const double> x, std::span<double> dx) {
            for (int i = 0; i < a_cl.rows(); ++i) {
                double acc = 0.0;
                for (int j = 0; j < a_cl.cols(); ++j) acc += a_cl(i, j) * x[j];
                dx[i] = acc;
            }
        };
        std::printf("plant: linearized closed loop (diagnostic mode)\n");
    } else {
        rhs = sim::shifted_closed_loop(sc, syn.k);
    }

    std::vector<stability::RoaProbe> probes;
    double radius = 0.0;
    try {
        radius = stability::roa_radius(a_cl, q, rhs, cfg.stability.radius_max,
                                       cfg.stability.samples, cfg.stability.seed, &probes);
    } catch (const NotHurwitz& e) {
        std::fprintf(stderr, "error: NotHurwitz: %s\n", e.what());
        return kExitNoCertificate;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNoCertificate;
    }

    std::printf("sigma probes (radius, sigma, margin):\n");
    for (const auto& p : probes)
        std::printf("  %-12.6g %-12.6g %-12.6g\n", p.radius, p.sigma, p.margin);
    if (radius <= 0.0) {
        std::fprintf(stderr,
                     "error: no radius up to %g yields a positive margin "
                     "(lambda_min(Q) <= 2 sigma lambda_max(P) everywhere)\n",
                     cfg.stability.radius_max);
        return kExitNoCertificate;
    }

    const double sigma =
        stability::estimate_sigma(rhs, a_cl, radius, cfg.stability.samples, cfg.stability.seed);
    const auto cert = stability::certify(a_cl, q, sigma, radius);
    std::printf("certified radius: %.6g\n", cert.radius);
    std::printf("sigma at certified radius: %.6g\n", cert.sigma);
    std::printf("P extremes: lambda_min(P) = %.6g, lambda_max(P) = %.6g\n", cert.lambda_min_p,
                cert.lambda_max_p);
    std::printf("lambda_min(Q) = %.6g\n", cert.lambda_min_q);
    std::printf("margin: %.6g (%s)\n", cert.margin, cert.valid() ? "valid" : "invalid");
    return kExitOk;
}

int cmd_compare(const std::string& config_a, const std::string& config_b,
                const std::string& out_dir) {
    config::RunConfig ca = config::load_file(config_a);
    config::RunConfig cb = config::load_file(config_b);

    sim::ComparisonReport rep;
    sim::Trajectory ta, tb;
    try {
        rep = sim::compare_scenarios(ca.scenario, cb.scenario);
        ta = sim::integrate_closed_loop(ca.scenario, sim::synthesize_gain(ca.scenario));
        tb = sim::integrate_closed_loop(cb.scenario, sim::synthesize_gain(cb.scenario));
    } catch (const IncompatibleScenarios& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIncompatible;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIntegration;
    }

    auto show = [](const char* name, const std::optional<double>& transport,
                   const std::optional<double>& settle, double sway) {
        auto fmt = [](const std::optional<double>& v) {
            char buf[32];
            if (v)
                std::snprintf(buf, sizeof buf, "%.4g", *v);
            else
                std::snprintf(buf, sizeof buf, "n/a");
            return std::string(buf);
        };
        std::printf("%s: transport %s s, settle %s s, peak |theta| %.6g rad\n", name,
                    fmt(transport).c_str(), fmt(settle).c_str(), sway);
    };
    std::printf("A = %s\nB = %s\n", config_a.c_str(), config_b.c_str());
    show("A", rep.transport_a, rep.settle_a, rep.peak_sway_a);
    show("B", rep.transport_b, rep.settle_b, rep.peak_sway_b);
    std::printf("transport ratio A/B: %.6g\n", rep.ratio);

    const fs::path out(out_dir);
    write_file(out / "compare_a.csv", sim::trajectory_csv(ta));
    write_file(out / "compare_b.csv", sim::trajectory_csv(tb));
    std::string summary = "scenario,transport_time,settle_time,peak_sway\n";
    auto row = [](const std::string& name, const std::optional<double>& tt,
                  const std::optional<double>& st, double sway) {
        return name + "," + (tt ? sim::format_double(*tt) : "nan") + "," +
               (st ? sim::format_double(*st) : "nan") + "," + sim::format_double(sway) + "\n";
    };
    summary += row("A", rep.transport_a, rep.settle_a, rep.peak_sway_a);
    summary += row("B", rep.transport_b, rep.settle_b, rep.peak_sway_b);
    write_file(out / "comparison.csv", summary);
    std::printf("files: %s %s %s\n", (out / "comparison.csv").string().c_str(),
                (out / "compare_a.csv").string().c_str(), (out / "compare_b.csv").string().c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overhead-crane feed-forward controller toolkit"};
    app.require_subcommand(1);

    std::string config_path, config_b, out_dir = "./out";
    bool export_forces = false, playback = false, adaptive = false, linear_plant = false;
    double step_v = 0.0, horizon_v = 0.0, rmax_v = 0.0;
    std::uint64_t seed_v = 0;
    int samples_v = 0;
    std::string gain_path;

    auto* synth = app.add_subcommand("synthesize", "Check controllability and compute the gain");
    synth->add_option("config", config_path, "scenario config file")->required();
    synth->add_option("--out", out_dir, "output directory");

    auto* simc = app.add_subcommand("simulate", "Run the closed loop and export trajectories");
    simc->add_option("config", config_path, "scenario config file")->required();
    simc->add_option("--out", out_dir, "output directory");
    auto* opt_step = simc->add_option("--step", step_v, "integrator step (s)");
    auto* opt_horizon = simc->add_option("--horizon", horizon_v, "simulation horizon (s)");
    simc->add_flag("--adaptive", adaptive, "use the embedded 4(5) adaptive integrator");
    simc->add_flag("--export-forces", export_forces, "write the feed-forward force profile");
    simc->add_flag("--playback", playback, "replay the exported forces open loop and report deviation");

    auto* ana = app.add_subcommand("analyze", "Compute the Lyapunov stability certificate");
    ana->add_option("config", config_path, "scenario config file")->required();
    auto* opt_seed = ana->add_option("--seed", seed_v, "sampling seed");
    auto* opt_samples = ana->add_option("--samples", samples_v, "sigma sample count");
    auto* opt_rmax = ana->add_option("--rmax", rmax_v, "largest radius to certify");
    auto* opt_gain = ana->add_option("--gain", gain_path, "gain CSV to analyze instead of synthesizing");
    ana->add_flag("--linear-plant", linear_plant, "diagnostic: analyze the linearized loop");

    auto* cmp = app.add_subcommand("compare", "Compare two scenarios' transport performance");
    cmp->add_option("configA", config_path, "first scenario config")->required();
    cmp->add_option("configB", config_b, "second scenario config")->required();
    cmp->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synthesize(config_path, out_dir);
        if (simc->parsed())
            return cmd_simulate(config_path, out_dir, export_forces, playback,
                                opt_step->count() ? std::optional<double>(step_v) : std::nullopt,
                                opt_horizon->count() ? std::optional<double>(horizon_v)
                                                     : std::nullopt,
                                adaptive);
        if (ana->parsed())
            return cmd_analyze(config_path,
                               opt_seed->count() ? std::optional<std::uint64_t>(seed_v)
                                                 : std::nullopt,
                               opt_samples->count() ? std::optional<int>(samples_v) : std::nullopt,
                               opt_rmax->count() ? std::optional<double>(rmax_v) : std::nullopt,
                               opt_gain->count() ? std::optional<std::string>(gain_path)
                                                 : std::nullopt,
                               linear_plant);
        if (cmp->parsed()) return cmd_compare(config_path, config_b, out_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
