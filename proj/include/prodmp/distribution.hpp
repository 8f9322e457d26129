#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/boundary.hpp"

namespace prodmp {

/// Observation noise variance used when callers do not pick one.
inline constexpr double kDefaultNoiseVar = 1e-6;

/// Gaussian over the stacked weights-and-goals vector, carried as a Cholesky
/// factor so the covariance is positive definite by construction.
class WeightsDistribution {
public:
    /// Validates that chol is square, lower triangular and has a strictly
    /// positive diagonal.
    WeightsDistribution(Eigen::VectorXd mean, Eigen::MatrixXd chol);

    static WeightsDistribution from_covariance(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);

    /// Zero-covariance distribution. Only meant for deterministic-limit checks.
    static WeightsDistribution point_mass(Eigen::VectorXd mean);

    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& chol() const noexcept { return chol_; }
    Eigen::MatrixXd covariance() const { return chol_ * chol_.transpose(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
    bool degenerate() const noexcept { return degenerate_; }

private:
    WeightsDistribution() = default;

    Eigen::VectorXd mean_;
    Eigen::MatrixXd chol_;
    bool degenerate_ = false;
};

/// One coordinate of a trajectory distribution.
struct TrajectoryIndex {
    double time;
    std::size_t dof;

    bool operator==(const TrajectoryIndex&) const = default;
};

/// Gaussian over an ordered set of (time, dof) coordinates. Layout is
/// DoF-major: all times of DoF 0, then all times of DoF 1, and so on.
struct TrajectoryDistribution {
    std::vector<TrajectoryIndex> index;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double noise_var = 0.0;

    std::size_t size() const noexcept { return index.size(); }
};

/// mu = xi1 y_b + xi2 dy_b + H^T mu_w,  Sigma = H^T Sigma_w H + noise_var I.
TrajectoryDistribution trajectory_distribution(const WeightsDistribution& wdist,
                                               const BoundaryCondition& bc,
                                               std::span<const double> times, const BasisBank& bank,
                                               double noise_var = kDefaultNoiseVar);

/// Sub-vector and sub-matrix at the given positions of dist.index.
TrajectoryDistribution marginal(const TrajectoryDistribution& dist,
                                std::span<const std::size_t> subset);

/// -log N(value | mean, cov). Throws NumericalError if cov is not PD.
double gaussian_nll(const Eigen::VectorXd& value, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov);

/// count draws of mu + L z, z ~ N(0, I), as columns. Draw k uses its own
/// generator seeded from (seed, k).
Eigen::MatrixXd sample_weights(const WeightsDistribution& wdist, std::size_t count,
                               std::uint64_t seed);

/// count trajectories (each D x |times|), every one pinned to bc.
std::vector<Eigen::MatrixXd> sample_trajectories(const WeightsDistribution& wdist,
                                                 const BoundaryCondition& bc,
                                                 std::span<const double> times,
                                                 const BasisBank& bank, std::size_t count,
                                                 std::uint64_t seed);

struct TimePair {
    std::size_t first;   // indices into the horizon
    std::size_t second;
    double t0;
    double t1;
};

/// J unordered pairs of distinct horizon entries, uniform over all pairs.
/// Pairs may repeat across the batch.
std::vector<TimePair> sample_time_pairs(std::span<const double> horizon, std::size_t count,
                                        std::uint64_t seed);

/// Pairs plus their 2D-dimensional ground truth, laid out like the
/// trajectory distribution over {t0, t1}: [dof0(t0), dof0(t1), dof1(t0), ...].
struct TimePairBatch {
    std::vector<TimePair> pairs;
    std::vector<Eigen::VectorXd> truths;
};

/// Takes the truth values from a D x |horizon| position matrix.
TimePairBatch make_pair_batch(std::vector<TimePair> pairs, const Eigen::MatrixXd& positions);

/// Mean negative log-likelihood over the pairs of the batch.
double pair_nll(const TimePairBatch& batch, const WeightsDistribution& wdist,
                const BoundaryCondition& bc, const BasisBank& bank,
                double noise_var = kDefaultNoiseVar);

}  // namespace prodmp
