#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/distribution.hpp"

namespace prodmp {

/// How absolute execution time maps onto bank time for a segment.
enum class TimeMode {
    /// Each segment restarts at bank time 0 with its boundary at t_b = 0, so
    /// one bank serves replanning chains of any length.
    Local,
    /// Bank time equals absolute time and the boundary sits at the switch
    /// time. Chains must end within the bank duration.
    Global,
};

struct RobotState {
    double t = 0.0;
    Eigen::VectorXd y;
    Eigen::VectorXd dy;
};

struct SegmentResult {
    std::vector<double> times;  // absolute
    Eigen::MatrixXd pos;        // D x |times|
    Eigen::MatrixXd vel;
    std::optional<TrajectoryDistribution> distribution;  // index times absolute
};

/// New segment starting exactly at current.(y, dy), sampled at `rate` over
/// [current.t, current.t + horizon]. The mean path uses the distribution's
/// mean weights.
SegmentResult replan_segment(const RobotState& current, const WeightsDistribution& wdist, double horizon,
                             const BasisBank& bank, double rate, TimeMode mode = TimeMode::Local,
                             bool with_distribution = true, double noise_var = kDefaultNoiseVar);

struct ScheduledSegment {
    double switch_time;
    WeightsDistribution wdist;
};

struct ChainOptions {
    TimeMode mode = TimeMode::Local;
    double rate = 1000.0;
    double end_time = 0.0;
    /// Execute sampled weights (one draw per segment) instead of the mean.
    bool sample = false;
    std::uint64_t seed = 0;
    /// Negative control: start every segment from the initial state instead
    /// of the executed one.
    bool stale_boundary = false;
};

struct SwitchJump {
    double time;
    double position;  // max |jump| over DoFs
    double velocity;
};

struct ChainTrace {
    std::vector<double> times;
    Eigen::MatrixXd pos;
    Eigen::MatrixXd vel;
    std::vector<std::size_t> segment_id;
    std::vector<SwitchJump> jumps;
};

/// Executes a scripted sequence of parameter switches. The first switch time
/// must equal initial.t, switch times must increase strictly and stay below
/// options.end_time.
ChainTrace run_chain(const RobotState& initial, const std::vector<ScheduledSegment>& segments,
                     const BasisBank& bank, const ChainOptions& options);

/// Average squared acceleration of a uniformly sampled D x n trace:
/// mean over interior samples of ((y[i+1] - 2 y[i] + y[i-1]) / dt^2)^2,
/// averaged over DoFs.
double smoothness_metric(const Eigen::MatrixXd& positions, double dt);

}  // namespace prodmp
