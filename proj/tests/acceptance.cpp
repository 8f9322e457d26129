// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/boundary.hpp"
#include "prodmp/core_math.hpp"
#include "prodmp/distribution.hpp"
#include "prodmp/errors.hpp"
#include "prodmp/learning.hpp"
#include "prodmp/oracle.hpp"
#include "prodmp/prob_ops.hpp"
#include "prodmp/replan.hpp"

using namespace prodmp;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

Eigen::VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index n, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

WeightsDistribution random_wdist(std::mt19937_64& rng, Eigen::Index dim, double mean_scale, double cov_scale) {
    Eigen::MatrixXd a(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) a.col(j) = normal_vector(rng, dim, cov_scale);
    Eigen::MatrixXd cov = a * a.transpose() / static_cast<double>(dim);
    cov.diagonal().array() += 1e-3 * cov_scale * cov_scale;
    return WeightsDistribution::from_covariance(normal_vector(rng, dim, mean_scale), cov);
}

std::vector<double> grid_of(const BasisBank& bank) { return {bank.times().begin(), bank.times().end()}; }

const BasisBank& reference_bank() {
    static const BasisBank bank = precompute_basis(DmpConfig::standard());
    return bank;
}

// 1. Basis trajectories against RK4 integration of the second-order system.
Outcome oracle_equivalence() {
    const auto& bank = reference_bank();
    const auto& cfg = bank.config();
    std::mt19937_64 rng(101);
    const auto grid = grid_of(bank);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto w = normal_vector(rng, 26, 200.0);
        const Eigen::VectorXd y0 = normal_vector(rng, 1, 1.0), dy0 = normal_vector(rng, 1, 1.0);
        const auto ref = integrate_dmp(w, y0, dy0, cfg, {IntegratorMethod::Rk4, 1e-4});
        const auto y = evaluate_position(w, {0.0, y0, dy0}, grid, bank);
        const double ptp = ref.pos.maxCoeff() - ref.pos.minCoeff();
        double err = 0.0;
        for (Eigen::Index k = 0; k < y.cols(); ++k) err = std::max(err, std::abs(y(0, k) - ref.pos(0, 10 * k)));
        worst = std::max(worst, err / ptp);
    }
    return {worst <= 1e-3, fmt("max |basis - RK4| / peak-to-peak = %.3g over 20 weight vectors (limit 1e-3)", worst)};
}

// 2. Sampled trajectories pass through the boundary state.
Outcome boundary_exactness() {
    const auto& bank = reference_bank();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> t_dist(0.0, bank.duration());
    double pos_err = 0.0, vel_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dofs = 1 + static_cast<std::size_t>(trial % 3);
        const auto d = static_cast<Eigen::Index>(dofs);
        const BoundaryCondition bc{t_dist(rng), normal_vector(rng, d, 1.0), normal_vector(rng, d, 1.0)};
        const auto wdist = random_wdist(rng, d * 26, 100.0, 50.0);
        const Eigen::MatrixXd draws = sample_weights(wdist, 10, static_cast<std::uint64_t>(trial));
        const std::vector<double> at{bc.t_b};
        for (Eigen::Index k = 0; k < draws.cols(); ++k) {
            const Eigen::VectorXd w = draws.col(k);
            pos_err = std::max(pos_err, (evaluate_position(w, bc, at, bank).col(0) - bc.y_b).cwiseAbs().maxCoeff());
            vel_err = std::max(vel_err, (evaluate_velocity(w, bc, at, bank).col(0) - bc.dy_b).cwiseAbs().maxCoeff());
        }
    }
    return {pos_err <= 1e-9 && vel_err <= 1e-8,
            fmt("100 cases x 10 samples: max |y(t_b)-y_b| = %.3g (limit 1e-9), max |dy(t_b)-dy_b| = %.3g (limit 1e-8)",
                pos_err, vel_err)};
}

// 3. Large speed-up with cached coefficients, smaller with renewed boundaries.
Outcome speedup() {
    const BenchScenario scenario;
    const auto bank = precompute_basis(scenario.bank_config());
    const auto plain = run_benchmark(scenario, bank, false);
    const auto renewed = run_benchmark(scenario, bank, true);
    const bool ok = plain.speedup >= 50.0 && renewed.speedup < plain.speedup;
    return {ok, fmt("speed-up %.0fx without boundary renewal (limit 50x), %.0fx with renewal (must be smaller); "
                    "Euler median %.3g s",
                    plain.speedup, renewed.speedup, plain.oracle_seconds)};
}

// 4. Monte-Carlo moments of sampled trajectories against the analytic distribution.
Outcome distribution_correctness() {
    const auto& bank = reference_bank();
    std::mt19937_64 rng(404);
    const auto wdist = random_wdist(rng, 52, 50.0, 20.0);
    const BoundaryCondition bc{0.3, normal_vector(rng, 2, 1.0), normal_vector(rng, 2, 1.0)};
    const std::pair<double, double> pairs[] = {{0.7, 1.4}, {1.1, 2.6}, {2.0, 2.9}};
    const std::size_t count = 10000;
    double worst_mean = 0.0, worst_cov = 0.0;
    for (const auto& [t0, t1] : pairs) {
        const std::vector<double> times{t0, t1};
        const auto dist = trajectory_distribution(wdist, bc, times, bank, 0.0);
        const auto samples = sample_trajectories(wdist, bc, times, bank, count, 405);
        Eigen::MatrixXd stacked(4, static_cast<Eigen::Index>(count));
        for (std::size_t k = 0; k < count; ++k) {
            const auto& s = samples[k];
            stacked.col(static_cast<Eigen::Index>(k)) << s(0, 0), s(0, 1), s(1, 0), s(1, 1);
        }
        const Eigen::VectorXd mean = stacked.rowwise().mean();
        const Eigen::MatrixXd centered = stacked.colwise() - mean;
        const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(count - 1);
        worst_mean = std::max(worst_mean, (mean - dist.mean).norm() / dist.mean.norm());
        worst_cov = std::max(worst_cov, (cov - dist.cov).norm() / dist.cov.norm());
    }
    return {worst_mean <= 0.05 && worst_cov <= 0.05,
            fmt("10^4 samples, 3 time pairs: relative Frobenius error mean %.3g, covariance %.3g (limit 0.05)",
                worst_mean, worst_cov)};
}

// 5. Pair NLL against sub-blocks of the full distribution, plus the closed form.
Outcome pair_nll_coherence() {
    const auto& bank = reference_bank();
    std::mt19937_64 rng(505);
    const auto wdist = random_wdist(rng, 52, 20.0, 10.0);
    const BoundaryCondition bc{0.5, normal_vector(rng, 2, 1.0), normal_vector(rng, 2, 1.0)};
    std::vector<double> horizon;
    for (int k = 0; k <= 150; ++k) horizon.push_back(0.02 * k);
    const auto n = horizon.size();
    const auto full = trajectory_distribution(wdist, bc, horizon, bank, 1e-4);
    const auto demo = evaluate_position(normal_vector(rng, 52, 20.0), bc, horizon, bank);
    const auto pairs = sample_time_pairs(horizon, 100, 506);
    const auto batch = make_pair_batch(pairs, demo);
    double worst = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const std::size_t sub[] = {pairs[j].first, pairs[j].second, n + pairs[j].first, n + pairs[j].second};
        const auto m = marginal(full, sub);
        const double direct = pair_nll(TimePairBatch{{pairs[j]}, {batch.truths[j]}}, wdist, bc, bank, 1e-4);
        worst = std::max(worst, std::abs(direct - gaussian_nll(batch.truths[j], m.mean, m.cov)));
    }

    const Eigen::VectorXd w1 = normal_vector(rng, 26, 20.0);
    const BoundaryCondition bc1{0.0, normal_vector(rng, 1, 1.0), normal_vector(rng, 1, 1.0)};
    const auto at_mean = make_pair_batch(sample_time_pairs(horizon, 20, 507), evaluate_position(w1, bc1, horizon, bank));
    const double unit = pair_nll(at_mean, WeightsDistribution::point_mass(w1), bc1, bank, 1.0);
    const double closed = std::log(2.0 * std::numbers::pi);
    const double unit_err = std::abs(unit - closed);
    return {worst <= 1e-10 && unit_err <= 1e-12,
            fmt("100 pairs: max |direct - sub-block| = %.3g (limit 1e-10); identity case |NLL - ln 2pi| = %.3g "
                "(limit 1e-12)",
                worst, unit_err)};
}

// 6. Bayesian aggregation identities.
Outcome bayesian_aggregation() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> var_dist(0.05, 4.0);
    auto latent = [&](Eigen::Index dim) {
        LatentGaussian g{normal_vector(rng, dim, 2.0), Eigen::VectorXd(dim)};
        for (Eigen::Index i = 0; i < dim; ++i) g.var[i] = var_dist(rng);
        return g;
    };
    double seq_err = 0.0;
    bool permutation_exact = true;
    for (int trial = 0; trial < 50; ++trial) {
        const auto prior = latent(16);
        std::vector<LatentGaussian> obs;
        for (int m = 0; m < 10; ++m) obs.push_back(latent(16));
        const auto batch = bayesian_aggregate(prior, obs);
        LatentGaussian seq = prior;
        for (const auto& o : obs) seq = bayesian_aggregate(seq, {o});
        seq_err = std::max({seq_err, (batch.mean - seq.mean).cwiseAbs().maxCoeff(),
                            (batch.var - seq.var).cwiseAbs().maxCoeff()});
        for (int p = 0; p < 10; ++p) {
            std::shuffle(obs.begin(), obs.end(), rng);
            const auto again = bayesian_aggregate(prior, obs);
            permutation_exact = permutation_exact && again.mean == batch.mean && again.var == batch.var;
        }
    }
    const auto unit = bayesian_aggregate({Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)},
                                         {{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)}});
    const double unit_err = std::max(std::abs(unit.mean[0] - 0.5), std::abs(unit.var[0] - 0.5));
    return {seq_err <= 1e-10 && unit_err <= 1e-15 && permutation_exact,
            fmt("batch vs sequential %.3g (limit 1e-10); unit example error %.3g (limit 1e-15); permutations "
                "bit-exact: ",
                seq_err, unit_err) +
                (permutation_exact ? "yes" : "no")};
}

// 7. Replanning chain continuity, stale-boundary control and ASA.
Outcome replanning_continuity() {
    const auto& bank = reference_bank();
    std::mt19937_64 rng(707);
    const auto base = random_wdist(rng, 52, 200.0, 20.0);
    const RobotState init{0.0, normal_vector(rng, 2, 1.0), normal_vector(rng, 2, 1.0)};
    std::vector<ScheduledSegment> segments;
    for (int k = 0; k < 6; ++k) {
        Eigen::VectorXd mean = base.mean();
        if (k > 0) mean += normal_vector(rng, 52, 5.0);
        segments.push_back({0.5 * k, WeightsDistribution(mean, base.chol())});
    }
    ChainOptions opt;
    opt.end_time = 2.999;
    const auto trace = run_chain(init, segments, bank, opt);

    // The previous segment's own prediction at each switch sample against the trace.
    double jump = 0.0, vel_jump = 0.0;
    for (std::size_t k = 1; k < segments.size(); ++k) {
        const auto start = static_cast<Eigen::Index>(std::lround(segments[k - 1].switch_time * opt.rate));
        const auto stop = static_cast<Eigen::Index>(std::lround(segments[k].switch_time * opt.rate));
        const RobotState from{segments[k - 1].switch_time, trace.pos.col(start), trace.vel.col(start)};
        const auto prev = replan_segment(from, segments[k - 1].wdist, segments[k].switch_time - from.t, bank, opt.rate,
                                         opt.mode, false);
        jump = std::max(jump, (prev.pos.col(prev.pos.cols() - 1) - trace.pos.col(stop)).cwiseAbs().maxCoeff());
        vel_jump = std::max(vel_jump, (prev.vel.col(prev.vel.cols() - 1) - trace.vel.col(stop)).cwiseAbs().maxCoeff());
    }

    opt.stale_boundary = true;
    const auto stale = run_chain(init, segments, bank, opt);
    double stale_jump = 0.0;
    for (const auto& j : stale.jumps) stale_jump = std::max(stale_jump, j.position);
    opt.stale_boundary = false;

    const auto single = run_chain(init, {{0.0, base}}, bank, opt);
    const double dt = 1.0 / opt.rate;
    const double asa_replanned = smoothness_metric(trace.pos, dt);
    const double asa_single = smoothness_metric(single.pos, dt);
    const double ratio = asa_replanned / asa_single;
    const bool ok = jump <= 1e-9 && vel_jump <= 1e-8 && stale_jump >= 1e6 * std::max(jump, 1e-9) && ratio <= 2.0;
    return {ok, fmt("6 segments: max position jump %.3g (limit 1e-9), stale-boundary jump %.3g (needs >= 1e6 x "
                    "max(jump, 1e-9)), ASA ratio replanned/unsegmented %.3g (limit 2)",
                    jump, stale_jump, ratio)};
}

// 8. Combination and blending identities on real per-time marginals.
Outcome combination_identities() {
    const auto& bank = reference_bank();
    std::mt19937_64 rng(808);
    std::vector<double> times;
    for (int k = 1; k <= 30; ++k) times.push_back(0.1 * k);
    const BoundaryCondition bc{0.0, normal_vector(rng, 2, 1.0), normal_vector(rng, 2, 1.0)};
    const auto a = per_time_marginals(trajectory_distribution(random_wdist(rng, 52, 50.0, 20.0), bc, times, bank));
    const auto b = per_time_marginals(trajectory_distribution(random_wdist(rng, 52, 50.0, 20.0), bc, times, bank));
    const auto steps = static_cast<Eigen::Index>(times.size());

    const auto self = combine({a, a}, Eigen::MatrixXd::Ones(2, steps));
    double halve = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double scale = a[t].cov.cwiseAbs().maxCoeff();
        halve = std::max(halve, (self.steps[t].cov - 0.5 * a[t].cov).cwiseAbs().maxCoeff() / scale);
    }
    const auto only_a = blend(a, b, Eigen::VectorXd::Ones(steps));
    const auto only_b = blend(a, b, Eigen::VectorXd::Zero(steps));
    double endpoint = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        endpoint = std::max({endpoint, (only_a.steps[t].mean - a[t].mean).cwiseAbs().maxCoeff(),
                             (only_a.steps[t].cov - a[t].cov).cwiseAbs().maxCoeff(),
                             (only_b.steps[t].mean - b[t].mean).cwiseAbs().maxCoeff(),
                             (only_b.steps[t].cov - b[t].cov).cwiseAbs().maxCoeff()});
    }
    return {halve <= 1e-12 && endpoint <= 1e-12,
            fmt("self-combination relative deviation from Sigma/2: %.3g (limit 1e-12); blend endpoint error %.3g "
                "(limit 1e-12)",
                halve, endpoint)};
}

// 9. Fit round trip on noiseless and noisy demonstrations.
Outcome fit_round_trip() {
    const auto& bank = reference_bank();
    std::mt19937_64 rng(909);
    const auto grid = grid_of(bank);
    double clean = 0.0, noisy = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto w = normal_vector(rng, 52, 200.0);
        const BoundaryCondition bc{0.0, normal_vector(rng, 2, 1.0), normal_vector(rng, 2, 1.0)};
        const Eigen::MatrixXd pos = evaluate_position(w, bc, grid, bank);
        const Eigen::MatrixXd vel = evaluate_velocity(w, bc, grid, bank);
        const double amplitude = (pos.rowwise().maxCoeff() - pos.rowwise().minCoeff()).maxCoeff();
        const double vel_amplitude = (vel.rowwise().maxCoeff() - vel.rowwise().minCoeff()).maxCoeff();
        auto rmse = [&](const Eigen::MatrixXd& fit) {
            return std::sqrt((fit - pos).squaredNorm() / static_cast<double>(pos.size())) / amplitude;
        };

        Demonstration demo{grid, pos, vel, std::nullopt};
        clean = std::max(clean, rmse(evaluate_position(fit_weights(demo, bank, 1e-10), bc, grid, bank)));

        std::normal_distribution<double> noise(0.0, 1.0);
        for (Eigen::Index i = 0; i < pos.size(); ++i) {
            demo.positions.data()[i] += 1e-3 * amplitude * noise(rng);
            demo.velocities->data()[i] += 1e-3 * vel_amplitude * noise(rng);
        }
        const auto fitted = fit_weights(demo, bank, 1e-10);
        noisy = std::max(noisy, rmse(evaluate_position(fitted, demo.boundary_condition(), grid, bank)));
    }
    return {clean <= 1e-6 && noisy <= 1e-2,
            fmt("RMSE / amplitude: noiseless %.3g (limit 1e-6), with 0.1%% noise %.3g (limit 1e-2)", clean, noisy)};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 = none
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "oracle equivalence", 30.0, oracle_equivalence},
        {2, "boundary exactness", 10.0, boundary_exactness},
        {3, "speed-up", 60.0, speedup},
        {4, "distribution correctness", 60.0, distribution_correctness},
        {5, "pair-NLL coherence", 0.0, pair_nll_coherence},
        {6, "Bayesian aggregation", 0.0, bayesian_aggregation},
        {7, "replanning continuity", 0.0, replanning_continuity},
        {8, "combination/blending identities", 0.0, combination_identities},
        {9, "fit round trip", 0.0, fit_round_trip},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.2f s", seconds);
        if (c.time_limit > 0.0) {
            timing += fmt(" (limit %.0f s)", c.time_limit);
            if (seconds >= c.time_limit) {
                out.pass = false;
                timing += " TOO SLOW";
            }
        }
        if (!out.pass) ++failures;
        std::printf("%s [%d] %s: %s; %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
