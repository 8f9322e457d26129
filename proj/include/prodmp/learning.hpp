#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/distribution.hpp"

namespace prodmp {

/// A recorded trajectory. Velocities are optional; the boundary condition is
/// the first sample unless boundary is set.
struct Demonstration {
    std::vector<double> times;
    Eigen::MatrixXd positions;                    // D x |times|
    std::optional<Eigen::MatrixXd> velocities;    // D x |times|
    std::optional<BoundaryCondition> boundary;

    std::size_t dofs() const noexcept { return static_cast<std::size_t>(positions.rows()); }

    /// The explicit boundary, or (t0, y(t0), dy(t0)) with dy(t0) taken from
    /// the velocities or, failing that, the first forward difference.
    BoundaryCondition boundary_condition() const;
};

inline constexpr double kDefaultCovFloor = 1e-8;

/// Ridge least squares per DoF:
///   min_w || y - xi1 y_b - xi2 dy_b - H^T w ||^2 + ridge ||w||^2.
/// Without an explicit ridge, 1e-9 * trace(H H^T) / (N + 1) is used.
/// A singular normal matrix with ridge == 0 raises NumericalError.
WeightsVector fit_weights(const Demonstration& demo, const BasisBank& bank,
                          std::optional<double> ridge = std::nullopt);

/// Empirical Gaussian over per-demonstration fits: unbiased covariance plus
/// cov_floor * I, returned as a Cholesky factor.
WeightsDistribution fit_distribution(const std::vector<Demonstration>& demos, const BasisBank& bank,
                                     std::optional<double> ridge = std::nullopt,
                                     double cov_floor = kDefaultCovFloor);

/// Factorized Gaussian in a latent space.
struct LatentGaussian {
    Eigen::VectorXd mean;
    Eigen::VectorXd var;
};

/// Element-wise Bayesian aggregation of latent observations into a prior:
///   var  = 1 / (1 / var0 + sum_m 1 / var_m)
///   mean = mean0 + var * sum_m (r_m - mean0) / var_m
/// Observations are summed in a canonical order (lexicographic on the bytes
/// of their mean, then variance), so any permutation gives a bit-identical
/// posterior.
LatentGaussian bayesian_aggregate(const LatentGaussian& prior, const std::vector<LatentGaussian>& observations);

}  // namespace prodmp
