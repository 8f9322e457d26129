#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "prodmp/boundary.hpp"
#include "prodmp/config.hpp"
#include "prodmp/core_math.hpp"
#include "prodmp/distribution.hpp"
#include "prodmp/errors.hpp"
#include "prodmp/io.hpp"
#include "prodmp/learning.hpp"
#include "prodmp/oracle.hpp"
#include "prodmp/prob_ops.hpp"
#include "prodmp/replan.hpp"

namespace fs = std::filesystem;
using namespace prodmp;

namespace {

constexpr double kDefaultRate = 100.0;

struct Common {
    std::string config;
    std::string bank;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string svg;
};

struct Boundary {
    std::vector<double> y0;
    std::vector<double> dy0;
    double t_b = 0.0;
};

void add_common(CLI::App* cmd, Common& c, bool needs_bank) {
    cmd->add_option("--config", c.config, "key = value run configuration");
    if (needs_bank) cmd->add_option("--bank", c.bank, "precomputed basis bank")->required();
    cmd->add_option("--out", c.out, "output file")->required();
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--svg", c.svg, "also write an SVG plot to this path");
}

void add_boundary(CLI::App* cmd, Boundary& b) {
    cmd->add_option("--y0", b.y0, "boundary position per DoF")->delimiter(',');
    cmd->add_option("--dy0", b.dy0, "boundary velocity per DoF (default 0)")->delimiter(',');
    cmd->add_option("--tb", b.t_b, "boundary time");
}

std::optional<io::RunConfig> load_config(const Common& c) {
    if (c.config.empty()) return std::nullopt;
    return io::load_run_config(c.config);
}

/// Loads the bank and refuses it if its config differs from the run config.
BasisBank load_bank_checked(const Common& c, const std::optional<io::RunConfig>& rc) {
    BasisBank bank = io::load_bank(c.bank);
    if (rc) {
        const auto expected = rc->dmp_config();
        if (expected.hash() != bank.config().hash()) {
            throw ValidationError("bank config hash " + io::hex64(bank.config().hash()) +
                                  " does not match config hash " + io::hex64(expected.hash()) + " (" +
                                  expected.describe() + ")");
        }
    }
    return bank;
}

std::uint64_t seed_of(const Common& c, const std::optional<io::RunConfig>& rc) {
    if (c.seed) return *c.seed;
    if (rc && rc->seed) return *rc->seed;
    return 0;
}

double rate_of(const std::optional<io::RunConfig>& rc) { return rc && rc->rate ? *rc->rate : kDefaultRate; }

double noise_of(const std::optional<io::RunConfig>& rc) {
    return rc && rc->noise_var ? *rc->noise_var : kDefaultNoiseVar;
}

BoundaryCondition boundary_of(const Boundary& b, std::size_t dofs) {
    if (b.y0.empty()) throw ValidationError("--y0 is required");
    if (b.y0.size() != dofs) {
        throw DimensionError("--y0 has " + std::to_string(b.y0.size()) + " entries, the weights describe " +
                             std::to_string(dofs) + " DoFs");
    }
    BoundaryCondition bc;
    bc.t_b = b.t_b;
    bc.y_b = Eigen::Map<const Eigen::VectorXd>(b.y0.data(), static_cast<Eigen::Index>(dofs));
    if (b.dy0.empty()) {
        bc.dy_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs));
    } else if (b.dy0.size() != dofs) {
        throw DimensionError("--dy0 must have one entry per DoF");
    } else {
        bc.dy_b = Eigen::Map<const Eigen::VectorXd>(b.dy0.data(), static_cast<Eigen::Index>(dofs));
    }
    return bc;
}

std::size_t dofs_of(const WeightsDistribution& wdist, const BasisBank& bank) {
    const auto cols = bank.columns();
    if (wdist.dim() == 0 || wdist.dim() % cols != 0) {
        throw DimensionError("weight dimension " + std::to_string(wdist.dim()) + " is not a multiple of " +
                             std::to_string(cols) + " columns per DoF");
    }
    return wdist.dim() / cols;
}

/// Uniform times from t_b to the end of the bank at the given rate.
std::vector<double> horizon(double t_b, double rate, const BasisBank& bank) {
    if (!(rate > 0.0)) throw ValidationError("rate must be positive");
    const double span = bank.duration() - t_b;
    if (span < 0.0) throw ValidationError("boundary time lies beyond the bank duration");
    const auto steps = static_cast<std::size_t>(std::floor(span * rate + 1e-9));
    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) times[k] = t_b + static_cast<double>(k) / rate;
    return times;
}

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.cols(); ++i) v[static_cast<std::size_t>(i)] = m(r, i);
    return v;
}

void write_svg(const std::string& path, const std::string& title, const std::vector<io::PlotSeries>& series) {
    if (!path.empty()) io::write_file_atomic(path, io::svg_plot(title, series));
}

/// Position mean and 2-sigma band per DoF from per-time marginals.
std::vector<io::PlotSeries> band_series(std::span<const double> times, const std::vector<Gaussian>& steps) {
    std::vector<io::PlotSeries> series;
    if (steps.empty()) return series;
    const auto dofs = steps.front().mean.size();
    for (Eigen::Index d = 0; d < dofs; ++d) {
        io::PlotSeries s;
        s.label = "dof" + std::to_string(d);
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const double mu = steps[k].mean[d];
            const double sd = std::sqrt(std::max(steps[k].cov(d, d), 0.0));
            s.x.push_back(times[k]);
            s.y.push_back(mu);
            s.band_low.push_back(mu - 2.0 * sd);
            s.band_high.push_back(mu + 2.0 * sd);
        }
        series.push_back(std::move(s));
    }
    return series;
}

// ---------------------------------------------------------------------------

int cmd_precompute(const Common& c, const std::string& format) {
    const auto rc = load_config(c);
    if (!rc) throw ValidationError("precompute needs --config");
    const auto bank = precompute_basis(rc->dmp_config());
    io::save_bank(bank, c.out, format == "json" ? io::BankFormat::Json : io::BankFormat::Binary);
    std::printf("grid points %zu, columns per DoF %zu, config hash %s, checksum %s\n", bank.size(), bank.columns(),
                io::hex64(bank.config().hash()).c_str(), io::hex64(io::bank_checksum(bank)).c_str());
    return 0;
}

int cmd_generate(const Common& c, const Boundary& b, const std::string& weights_path, bool velocities) {
    const auto rc = load_config(c);
    const auto bank = load_bank_checked(c, rc);
    const auto wdist = io::load_weights(weights_path);
    const auto dofs = dofs_of(wdist, bank);
    const auto bc = boundary_of(b, dofs);
    const auto times = horizon(bc.t_b, rate_of(rc), bank);

    io::TrajectoryTable table;
    table.times = times;
    table.pos = evaluate_position(wdist.mean(), bc, times, bank);
    if (velocities) table.vel = evaluate_velocity(wdist.mean(), bc, times, bank);
    io::write_file_atomic(c.out, io::trajectory_csv(table));

    std::vector<io::PlotSeries> series;
    for (Eigen::Index d = 0; d < table.pos.rows(); ++d) {
        series.push_back({"dof" + std::to_string(d), times, row_of(table.pos, d), {}, {}});
    }
    write_svg(c.svg, "mean trajectory", series);
    return 0;
}

int cmd_sample(const Common& c, const Boundary& b, const std::string& weights_path, std::size_t count,
               const std::string& dist_out) {
    const auto rc = load_config(c);
    const auto bank = load_bank_checked(c, rc);
    const auto wdist = io::load_weights(weights_path);
    const auto dofs = dofs_of(wdist, bank);
    const auto bc = boundary_of(b, dofs);
    const auto times = horizon(bc.t_b, rate_of(rc), bank);
    if (count == 0) throw ValidationError("--count must be positive");

    const auto draws = sample_trajectories(wdist, bc, times, bank, count, seed_of(c, rc));
    io::TrajectoryTable table;
    table.id_name = "sample_id";
    table.pos.resize(static_cast<Eigen::Index>(dofs), static_cast<Eigen::Index>(count * times.size()));
    for (std::size_t s = 0; s < count; ++s) {
        table.pos.middleCols(static_cast<Eigen::Index>(s * times.size()), static_cast<Eigen::Index>(times.size())) =
            draws[s];
        for (double t : times) {
            table.times.push_back(t);
            table.ids.push_back(s);
        }
    }
    io::write_file_atomic(c.out, io::trajectory_csv(table));

    if (!dist_out.empty() || !c.svg.empty()) {
        const auto dist = trajectory_distribution(wdist, bc, times, bank, noise_of(rc));
        if (!dist_out.empty()) io::write_file_atomic(dist_out, io::distribution_json(dist));
        write_svg(c.svg, "trajectory distribution (mean +/- 2 sd)", band_series(times, per_time_marginals(dist)));
    }
    return 0;
}

int cmd_fit(const Common& c, const std::vector<std::string>& demo_paths) {
    const auto rc = load_config(c);
    const auto bank = load_bank_checked(c, rc);
    std::vector<Demonstration> demos;
    for (const auto& p : demo_paths) demos.push_back(io::read_demonstration(p));
    const std::optional<double> ridge = rc ? rc->ridge : std::nullopt;
    const double floor = rc && rc->cov_floor ? *rc->cov_floor : kDefaultCovFloor;

    std::optional<WeightsDistribution> wdist;
    if (demos.size() == 1) {
        if (!(floor > 0.0)) throw ValidationError("a single demonstration needs cov_floor > 0");
        auto w = fit_weights(demos.front(), bank, ridge);
        const auto n = w.size();
        wdist.emplace(std::move(w), std::sqrt(floor) * Eigen::MatrixXd::Identity(n, n));
    } else {
        wdist.emplace(fit_distribution(demos, bank, ridge, floor));
    }
    const auto dofs = demos.front().dofs();
    io::write_file_atomic(c.out, io::weights_json(*wdist, dofs, bank.columns()));
    std::printf("fitted %zu demonstration(s), %zu DoF, %zu weights\n", demos.size(), dofs, wdist->dim());
    return 0;
}

/// Per-time marginals of each weight file, all pinned to the same boundary.
std::vector<std::vector<Gaussian>> marginals_of(const std::vector<std::string>& paths, const Boundary& b,
                                                const BasisBank& bank, std::span<const double> times,
                                                double noise) {
    std::vector<std::vector<Gaussian>> out;
    std::optional<std::size_t> dofs;
    for (const auto& p : paths) {
        const auto wdist = io::load_weights(p);
        const auto d = dofs_of(wdist, bank);
        if (dofs && *dofs != d) throw DimensionError("weight files disagree in DoF count");
        dofs = d;
        out.push_back(per_time_marginals(trajectory_distribution(wdist, boundary_of(b, d), times, bank, noise)));
    }
    return out;
}

int cmd_combine(const Common& c, const Boundary& b, const std::vector<std::string>& weights,
                const std::vector<double>& activation) {
    const auto rc = load_config(c);
    const auto bank = load_bank_checked(c, rc);
    if (weights.size() < 2) throw ValidationError("combine needs at least two --weights files");
    if (!activation.empty() && activation.size() != weights.size()) {
        throw DimensionError("--activation needs one value per --weights file");
    }
    const auto times = horizon(b.t_b, rate_of(rc), bank);
    const auto prims = marginals_of(weights, b, bank, times, noise_of(rc));
    Eigen::MatrixXd acts = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(weights.size()),
                                                 static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < activation.size(); ++k) acts.row(static_cast<Eigen::Index>(k)).setConstant(activation[k]);
    const auto result = combine(prims, acts);
    io::write_file_atomic(c.out, io::gaussians_json(times, result));
    write_svg(c.svg, "combination (mean +/- 2 sd)", band_series(times, result.steps));
    return 0;
}

int cmd_blend(const Common& c, const Boundary& b, const std::vector<std::string>& weights) {
    const auto rc = load_config(c);
    const auto bank = load_bank_checked(c, rc);
    if (weights.size() != 2) throw ValidationError("blend needs exactly two --weights files");
    const auto times = horizon(b.t_b, rate_of(rc), bank);
    const auto prims = marginals_of(weights, b, bank, times, noise_of(rc));
    // Linear hand-over from the first to the second primitive over the horizon.
    Eigen::VectorXd act(static_cast<Eigen::Index>(times.size()));
    const double span = std::max(times.back() - times.front(), 1e-300);
    for (std::size_t k = 0; k < times.size(); ++k) {
        act[static_cast<Eigen::Index>(k)] = std::clamp(1.0 - (times[k] - times.front()) / span, 0.0, 1.0);
    }
    const auto result = blend(prims[0], prims[1], act);
    io::write_file_atomic(c.out, io::gaussians_json(times, result));
    write_svg(c.svg, "blend (mean +/- 2 sd)", band_series(times, result.steps));
    return 0;
}

/// Scenario JSON:
///   {"initial": {"t": 0, "y": [...], "dy": [...]}, "end_time": 3.0,
///    "rate": 1000, "mode": "local" | "global", "sample": false,
///    "stale_boundary": false,
///    "segments": [{"switch_time": 0, "weights": "w0.json"}, ...]}
/// Weight paths are relative to the scenario file.
int cmd_replan(const Common& c, const std::string& scenario_path) {
    const auto rc = load_config(c);
    const auto bank = load_bank_checked(c, rc);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(scenario_path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("replan scenario is not valid JSON: ") + e.what());
    }

    RobotState init;
    std::vector<ScheduledSegment> segments;
    ChainOptions opt;
    try {
        const auto& i = j.at("initial");
        const auto y = i.at("y").get<std::vector<double>>();
        const auto dy = i.value("dy", std::vector<double>(y.size(), 0.0));
        if (dy.size() != y.size()) throw DimensionError("initial y and dy differ in length");
        init.t = i.value("t", 0.0);
        init.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
        init.dy = Eigen::Map<const Eigen::VectorXd>(dy.data(), static_cast<Eigen::Index>(dy.size()));
        opt.end_time = j.at("end_time").get<double>();
        opt.rate = j.value("rate", rate_of(rc));
        opt.sample = j.value("sample", false);
        opt.stale_boundary = j.value("stale_boundary", false);
        opt.seed = seed_of(c, rc);
        const auto mode = j.value("mode", std::string("local"));
        if (mode == "local") opt.mode = TimeMode::Local;
        else if (mode == "global") opt.mode = TimeMode::Global;
        else throw ValidationError("replan mode must be 'local' or 'global', got '" + mode + "'");
        const auto base = fs::path(scenario_path).parent_path();
        for (const auto& s : j.at("segments")) {
            const fs::path w = s.at("weights").get<std::string>();
            segments.push_back({s.at("switch_time").get<double>(), io::load_weights(w.is_absolute() ? w : base / w)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("replan scenario: ") + e.what());
    }
    if (segments.empty()) throw ValidationError("replan scenario has no segments");
    for (const auto& s : segments) {
        if (dofs_of(s.wdist, bank) != static_cast<std::size_t>(init.y.size())) {
            throw DimensionError("segment weights do not match the DoF count of the initial state");
        }
    }

    const auto trace = run_chain(init, segments, bank, opt);
    io::TrajectoryTable table;
    table.times = trace.times;
    table.pos = trace.pos;
    table.vel = trace.vel;
    table.id_name = "segment_id";
    table.ids = trace.segment_id;
    io::write_file_atomic(c.out, io::trajectory_csv(table));

    double jump = 0.0, vel_jump = 0.0;
    for (const auto& s : trace.jumps) jump = std::max(jump, s.position), vel_jump = std::max(vel_jump, s.velocity);
    std::printf("segments %zu, samples %zu, max position jump %.3g, max velocity jump %.3g, ASA %.6g\n",
                segments.size(), trace.times.size(), jump, vel_jump, smoothness_metric(trace.pos, 1.0 / opt.rate));

    std::vector<io::PlotSeries> series;
    for (Eigen::Index d = 0; d < trace.pos.rows(); ++d) {
        series.push_back({"dof" + std::to_string(d), trace.times, row_of(trace.pos, d), {}, {}});
    }
    write_svg(c.svg, "replanned trajectory", series);
    return 0;
}

int cmd_bench(const Common& c, BenchScenario scenario) {
    const auto rc = load_config(c);
    if (c.seed) scenario.seed = *c.seed;
    else if (rc && rc->seed) scenario.seed = *rc->seed;
    const auto bank = precompute_basis(scenario.bank_config());
    std::vector<BenchReport> reports{run_benchmark(scenario, bank, false), run_benchmark(scenario, bank, true)};
    io::write_file_atomic(c.out, io::bench_json(reports));
    std::fputs(io::bench_table(reports).c_str(), stdout);
    return 0;
}

std::string escape(std::string s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += (ch == '\n' || ch == '\r') ? ' ' : ch;
    }
    return out;
}

int report(int code, const char* kind, const std::string& message) {
    std::fprintf(stderr, "error code=%d kind=%s message=\"%s\"\n", code, kind, escape(message).c_str());
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory generation with boundary-aware movement primitives"};
    app.require_subcommand(1);

    Common c;
    Boundary b;
    std::string format = "binary";
    std::string weights_path, dist_out, scenario_path;
    std::vector<std::string> weights, demos;
    std::vector<double> activation;
    std::size_t count = 10;
    bool velocities = true;
    BenchScenario bench;

    auto* pre = app.add_subcommand("precompute", "precompute the basis bank for a config");
    add_common(pre, c, false);
    pre->add_option("--format", format, "bank container")->check(CLI::IsMember({"binary", "json"}));

    auto* gen = app.add_subcommand("generate", "mean trajectory of a weight file from a boundary state");
    add_common(gen, c, true);
    add_boundary(gen, b);
    gen->add_option("--weights", weights_path, "weights distribution JSON")->required();
    gen->add_flag("!--no-velocity", velocities, "omit velocity columns");

    auto* smp = app.add_subcommand("sample", "sample trajectories pinned to a boundary state");
    add_common(smp, c, true);
    add_boundary(smp, b);
    smp->add_option("--weights", weights_path, "weights distribution JSON")->required();
    smp->add_option("--count", count, "number of trajectories");
    smp->add_option("--distribution-out", dist_out, "also dump the trajectory distribution JSON");

    auto* fit = app.add_subcommand("fit", "fit a weights distribution to demonstration CSVs");
    add_common(fit, c, true);
    fit->add_option("--demo", demos, "demonstration CSV (repeatable)")->required();

    auto* cmb = app.add_subcommand("combine", "activated product of trajectory distributions");
    add_common(cmb, c, true);
    add_boundary(cmb, b);
    cmb->add_option("--weights", weights, "weights distribution JSON (repeatable)")->required();
    cmb->add_option("--activation", activation, "constant activation per primitive")->delimiter(',');

    auto* bln = app.add_subcommand("blend", "linear hand-over between two trajectory distributions");
    add_common(bln, c, true);
    add_boundary(bln, b);
    bln->add_option("--weights", weights, "two weights distribution JSON files")->required();

    auto* rpl = app.add_subcommand("replan", "execute a scripted replanning scenario");
    add_common(rpl, c, true);
    rpl->add_option("--scenario", scenario_path, "scenario JSON")->required();

    auto* bch = app.add_subcommand("bench", "time basis-bank generation against Euler integration");
    add_common(bch, c, false);
    bch->add_option("--dofs", bench.dofs, "degrees of freedom");
    bch->add_option("--duration", bench.duration, "trajectory length in seconds");
    bch->add_option("--rate", bench.rate, "samples per second");
    bch->add_option("--num-basis", bench.num_basis, "basis functions per DoF");
    bch->add_option("--repetitions", bench.repetitions, "timed repetitions");
    bch->add_option("--warmup", bench.warmup, "untimed warm-up runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report(static_cast<int>(ErrorKind::Validation), "validation", e.what());
    }

    try {
        if (*pre) return cmd_precompute(c, format);
        if (*gen) return cmd_generate(c, b, weights_path, velocities);
        if (*smp) return cmd_sample(c, b, weights_path, count, dist_out);
        if (*fit) return cmd_fit(c, demos);
        if (*cmb) return cmd_combine(c, b, weights, activation);
        if (*bln) return cmd_blend(c, b, weights);
        if (*rpl) return cmd_replan(c, scenario_path);
        if (*bch) return cmd_bench(c, bench);
    } catch (const Error& e) {
        return report(e.exit_code(), to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
        return report(1, "internal", e.what());
    }
    return 0;
}
