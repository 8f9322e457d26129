#include "prodmp/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "prodmp/errors.hpp"

namespace prodmp {

namespace {

struct DmpDynamics {
    const DmpConfig& config;
    const ForcingBasis& forcing;
    Eigen::Map<const Eigen::MatrixXd> weights;  // (N + 1) x D
    Eigen::VectorXd row;
    Eigen::VectorXd force;

    DmpDynamics(const DmpConfig& c, const ForcingBasis& f, const WeightsVector& w_g, Eigen::Index dofs)
        : config(c),
          forcing(f),
          weights(w_g.data(), static_cast<Eigen::Index>(c.columns()), dofs),
          row(static_cast<Eigen::Index>(c.num_basis())),
          force(dofs) {}

    /// Acceleration of every DoF at time t for state (y, dy).
    void acceleration(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dy, Eigen::VectorXd& out) {
        const auto n = static_cast<Eigen::Index>(config.num_basis());
        forcing.forcing_row(std::exp(-config.alpha_x() * t / config.tau()), row);
        force.noalias() = weights.topRows(n).transpose() * row;
        const auto goal = weights.row(n).transpose();
        const double inv_tau2 = 1.0 / (config.tau() * config.tau());
        out = (config.alpha() * (config.beta() * (goal - y) - config.tau() * dy) + force) * inv_tau2;
    }
};

}  // namespace

IntegratedTrajectory integrate_dmp(const WeightsVector& w_g, const Eigen::VectorXd& y0, const Eigen::VectorXd& dy0,
                                   const DmpConfig& config, const IntegratorSpec& spec, double t_start,
                                   double t_end) {
    if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) throw ValidationError("integrator dt must be positive");
    if (y0.size() == 0 || y0.size() != dy0.size()) {
        throw DimensionError("initial position and velocity must be non-empty and of equal length");
    }
    const Eigen::Index dofs = y0.size();
    if (w_g.size() != dofs * static_cast<Eigen::Index>(config.columns())) {
        std::ostringstream os;
        os << "weights vector has length " << w_g.size() << ", expected " << dofs * config.columns();
        throw DimensionError(os.str());
    }
    if (t_end < 0.0) t_end = config.duration();
    if (!(t_start >= 0.0) || !(t_end >= t_start)) throw ValidationError("integration needs 0 <= t_start <= t_end");

    const double ratio = (t_end - t_start) / spec.dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6) {
        throw ValidationError("integration horizon must be an integer multiple of dt");
    }
    const auto steps = static_cast<std::size_t>(rounded);

    const auto forcing = make_forcing_basis(config);
    DmpDynamics dyn(config, forcing, w_g, dofs);

    IntegratedTrajectory out;
    out.times.resize(steps + 1);
    out.pos.resize(dofs, static_cast<Eigen::Index>(steps + 1));
    out.vel.resize(dofs, static_cast<Eigen::Index>(steps + 1));

    Eigen::VectorXd y = y0, dy = dy0;
    Eigen::VectorXd k1v(dofs), k2v(dofs), k3v(dofs), k4v(dofs);
    Eigen::VectorXd y_mid(dofs), dy_mid(dofs);
    const double h = spec.dt;

    out.times[0] = t_start;
    out.pos.col(0) = y;
    out.vel.col(0) = dy;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = t_start + static_cast<double>(i) * h;
        if (spec.method == IntegratorMethod::ExplicitEuler) {
            dyn.acceleration(t, y, dy, k1v);
            y += h * dy;
            dy += h * k1v;
        } else {
            // State derivative is (dy, ddy); k*v are the velocity-slope stages.
            const Eigen::VectorXd k1y = dy;
            dyn.acceleration(t, y, dy, k1v);
            y_mid = y + 0.5 * h * k1y;
            dy_mid = dy + 0.5 * h * k1v;
            const Eigen::VectorXd k2y = dy_mid;
            dyn.acceleration(t + 0.5 * h, y_mid, dy_mid, k2v);
            y_mid = y + 0.5 * h * k2y;
            dy_mid = dy + 0.5 * h * k2v;
            const Eigen::VectorXd k3y = dy_mid;
            dyn.acceleration(t + 0.5 * h, y_mid, dy_mid, k3v);
            y_mid = y + h * k3y;
            dy_mid = dy + h * k3v;
            const Eigen::VectorXd k4y = dy_mid;
            dyn.acceleration(t + h, y_mid, dy_mid, k4v);
            y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            dy += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        if (!y.allFinite() || !dy.allFinite()) {
            std::ostringstream os;
            os << "integration diverged at step " << i + 1;
            throw NumericalError(os.str());
        }
        const auto c = static_cast<Eigen::Index>(i + 1);
        out.times[i + 1] = t_start + static_cast<double>(i + 1) * h;
        out.pos.col(c) = y;
        out.vel.col(c) = dy;
    }
    return out;
}

DmpConfig BenchScenario::bank_config() const {
    DmpConfig::Params p;
    p.alpha = alpha;
    p.tau = tau;
    p.alpha_x = alpha_x;
    p.num_basis = num_basis;
    p.duration = duration;
    p.grid_dt = 1.0 / rate;
    return DmpConfig::make(p);
}

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class F>
double time_median(std::size_t warmup, std::size_t reps, F&& body) {
    for (std::size_t i = 0; i < warmup; ++i) body(i);
    std::vector<double> samples;
    samples.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const auto start = Clock::now();
        body(warmup + i);
        samples.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    }
    return median(std::move(samples));
}

}  // namespace

BenchReport run_benchmark(const BenchScenario& scenario, const BasisBank& bank, bool with_bc_recompute) {
    if (scenario.repetitions == 0) throw ValidationError("benchmark needs at least one repetition");
    const DmpConfig expected = scenario.bank_config();
    if (!(bank.config() == expected)) {
        throw ValidationError("benchmark scenario is inconsistent with the supplied bank (" + expected.describe() +
                              " vs " + bank.config().describe() + ")");
    }

    const auto dofs = static_cast<Eigen::Index>(scenario.dofs);
    const auto dim = dofs * static_cast<Eigen::Index>(bank.columns());
    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    WeightsVector w(dim);
    for (Eigen::Index i = 0; i < dim; ++i) w[i] = 50.0 * normal(rng);

    // Boundary states cycled through when the boundary is renewed per call.
    constexpr std::size_t kStates = 8;
    std::vector<BoundaryCondition> states;
    for (std::size_t s = 0; s < kStates; ++s) {
        BoundaryCondition bc;
        bc.t_b = 0.0;
        bc.y_b = Eigen::VectorXd(dofs);
        bc.dy_b = Eigen::VectorXd(dofs);
        for (Eigen::Index d = 0; d < dofs; ++d) {
            bc.y_b[d] = normal(rng);
            bc.dy_b[d] = normal(rng);
        }
        states.push_back(std::move(bc));
    }

    const auto times = bank.times();
    const IntegratorSpec euler{IntegratorMethod::ExplicitEuler, 1.0 / scenario.rate};
    volatile double sink = 0.0;

    BenchReport report;
    report.scenario = scenario;
    report.with_bc_recompute = with_bc_recompute;
    report.points = times.size();
    report.note = "forward pass only; gradient (backward pass) timings are not measured";

    report.oracle_seconds = time_median(scenario.warmup, scenario.repetitions, [&](std::size_t i) {
        const auto& bc = with_bc_recompute ? states[i % kStates] : states[0];
        const auto traj = integrate_dmp(w, bc.y_b, bc.dy_b, bank.config(), euler);
        sink = sink + traj.pos(0, traj.pos.cols() - 1);
    });

    if (with_bc_recompute) {
        report.basis_seconds = time_median(scenario.warmup, scenario.repetitions, [&](std::size_t i) {
            const auto pos = evaluate_position(w, states[i % kStates], times, bank);
            sink = sink + pos(0, pos.cols() - 1);
        });
    } else {
        const Coefficients cached = solve_coefficients(states[0], w, bank);
        Eigen::MatrixXd pos(static_cast<Eigen::Index>(times.size()), dofs);
        report.basis_seconds = time_median(scenario.warmup, scenario.repetitions, [&](std::size_t) {
            evaluate_grid_cached(cached, w, bank, pos);
            sink = sink + pos(pos.rows() - 1, 0);
        });
    }
    report.speedup = report.oracle_seconds / report.basis_seconds;
    return report;
}

}  // namespace prodmp
