#include "prodmp/replan.hpp"

#include <cmath>
#include <sstream>

#include "prodmp/errors.hpp"

namespace prodmp {

namespace {

constexpr double kTimeSlack = 1e-9;

void check_rate(double rate) {
    if (!std::isfinite(rate) || rate <= 0.0) throw ValidationError("sampling rate must be positive");
}

void check_state(const RobotState& s) {
    if (s.y.size() == 0 || s.y.size() != s.dy.size()) {
        throw DimensionError("robot state needs matching non-empty position and velocity vectors");
    }
}

/// Bank-time view of a segment that starts at absolute time `start`.
struct SegmentFrame {
    TimeMode mode;
    double start;

    double bank_time(double t) const { return mode == TimeMode::Local ? t - start : t; }
    double boundary_time() const { return mode == TimeMode::Local ? 0.0 : start; }

    void check_coverage(double end, const BasisBank& bank) const {
        if (bank_time(end) > bank.duration() + kTimeSlack) {
            std::ostringstream os;
            os.precision(17);
            os << "segment starting at " << start << " needs bank time " << bank_time(end)
               << " but the bank only covers " << bank.duration() << " s";
            throw ValidationError(os.str());
        }
    }

    BoundaryCondition boundary(const RobotState& s) const { return {boundary_time(), s.y, s.dy}; }
};

std::vector<double> uniform_times(double start, double end, double rate) {
    const auto count = static_cast<std::size_t>(std::floor((end - start) * rate + kTimeSlack));
    std::vector<double> times(count + 1);
    for (std::size_t k = 0; k <= count; ++k) times[k] = start + static_cast<double>(k) / rate;
    return times;
}

}  // namespace

SegmentResult replan_segment(const RobotState& current, const WeightsDistribution& wdist, double horizon,
                             const BasisBank& bank, double rate, TimeMode mode, bool with_distribution,
                             double noise_var) {
    check_rate(rate);
    check_state(current);
    if (!std::isfinite(horizon) || horizon < 0.0) throw ValidationError("horizon must be non-negative");

    const SegmentFrame frame{mode, current.t};
    frame.check_coverage(current.t + horizon, bank);

    SegmentResult out;
    out.times = uniform_times(current.t, current.t + horizon, rate);
    std::vector<double> bank_times(out.times.size());
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        bank_times[k] = std::min(frame.bank_time(out.times[k]), bank.duration());
    }
    const auto bc = frame.boundary(current);
    out.pos = evaluate_position(wdist.mean(), bc, bank_times, bank);
    out.vel = evaluate_velocity(wdist.mean(), bc, bank_times, bank);
    if (with_distribution) {
        auto dist = trajectory_distribution(wdist, bc, bank_times, bank, noise_var);
        const std::size_t n_t = out.times.size();
        for (std::size_t i = 0; i < dist.index.size(); ++i) dist.index[i].time = out.times[i % n_t];
        out.distribution = std::move(dist);
    }
    return out;
}

ChainTrace run_chain(const RobotState& initial, const std::vector<ScheduledSegment>& segments,
                     const BasisBank& bank, const ChainOptions& options) {
    check_rate(options.rate);
    check_state(initial);
    if (segments.empty()) throw ValidationError("replanning chain needs at least one segment");
    if (std::abs(segments.front().switch_time - initial.t) > kTimeSlack) {
        throw ValidationError("first segment must start at the initial state's time");
    }
    for (std::size_t k = 1; k < segments.size(); ++k) {
        if (!(segments[k].switch_time > segments[k - 1].switch_time)) {
            throw ValidationError("switch times must increase strictly");
        }
    }
    if (!(options.end_time > segments.back().switch_time)) {
        throw ValidationError("end time must lie after the last switch time");
    }
    const std::size_t dofs = static_cast<std::size_t>(initial.y.size());

    ChainTrace trace;
    trace.times = uniform_times(initial.t, options.end_time, options.rate);
    const auto n = static_cast<Eigen::Index>(trace.times.size());
    trace.pos.resize(static_cast<Eigen::Index>(dofs), n);
    trace.vel.resize(static_cast<Eigen::Index>(dofs), n);
    trace.segment_id.assign(trace.times.size(), 0);

    RobotState state = initial;
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const double start = segments[k].switch_time;
        const bool last = k + 1 == segments.size();
        const double stop = last ? options.end_time : segments[k + 1].switch_time;
        const SegmentFrame frame{options.mode, start};
        frame.check_coverage(stop, bank);

        const auto& wdist = segments[k].wdist;
        validate_weights(wdist.mean(), dofs, bank);
        WeightsVector w = wdist.mean();
        if (options.sample) w = sample_weights(wdist, 1, options.seed + k).col(0);

        RobotState start_state = options.stale_boundary ? initial : state;
        start_state.t = start;
        const auto bc = frame.boundary(start_state);

        if (k > 0) {
            // state holds the previous segment's end state at this switch.
            SwitchJump jump{start, (start_state.y - state.y).cwiseAbs().maxCoeff(),
                            (start_state.dy - state.dy).cwiseAbs().maxCoeff()};
            trace.jumps.push_back(jump);
        }

        std::vector<double> bank_times;
        std::vector<std::size_t> columns;
        while (cursor < trace.times.size() && (last || trace.times[cursor] < stop - kTimeSlack)) {
            bank_times.push_back(std::min(frame.bank_time(trace.times[cursor]), bank.duration()));
            columns.push_back(cursor);
            ++cursor;
        }
        // The executed state at the next switch seeds the following segment.
        bank_times.push_back(std::min(frame.bank_time(stop), bank.duration()));

        const auto pos = evaluate_position(w, bc, bank_times, bank);
        const auto vel = evaluate_velocity(w, bc, bank_times, bank);
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto c = static_cast<Eigen::Index>(columns[j]);
            trace.pos.col(c) = pos.col(static_cast<Eigen::Index>(j));
            trace.vel.col(c) = vel.col(static_cast<Eigen::Index>(j));
            trace.segment_id[columns[j]] = k;
        }
        state.t = stop;
        state.y = pos.col(pos.cols() - 1);
        state.dy = vel.col(vel.cols() - 1);
    }
    return trace;
}

double smoothness_metric(const Eigen::MatrixXd& positions, double dt) {
    if (positions.cols() < 3) throw ValidationError("smoothness metric needs at least 3 samples");
    if (!std::isfinite(dt) || dt <= 0.0) throw ValidationError("sample spacing must be positive");
    const Eigen::Index n = positions.cols();
    const Eigen::MatrixXd second =
        positions.middleCols(2, n - 2) - 2.0 * positions.middleCols(1, n - 2) + positions.leftCols(n - 2);
    const double dt2 = dt * dt;
    return (second / dt2).array().square().mean();
}

}  // namespace prodmp
