#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/distribution.hpp"

namespace prodmp {

struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Per-time D x D marginals of a trajectory distribution that covers every
/// DoF at each of its times (the layout trajectory_distribution produces).
std::vector<Gaussian> per_time_marginals(const TrajectoryDistribution& dist);

struct CombineResult {
    std::vector<Gaussian> steps;
    /// True at the time steps where the precision sum needed the 1e-12
    /// diagonal jitter to factorize.
    std::vector<bool> jittered;
};

/// Activated product of Gaussians, independently at every time step:
///   Sigma* = (sum_k a_k Sigma_k^-1)^-1,  mu* = Sigma* sum_k a_k Sigma_k^-1 mu_k.
///
/// primitives[k][t] is primitive k at time step t; activations(k, t) in [0, 1]
/// with at least one positive entry per column.
CombineResult combine(const std::vector<std::vector<Gaussian>>& primitives,
                      const Eigen::MatrixXd& activations);

/// combine() of two primitives with activations a(t) and 1 - a(t).
CombineResult blend(const std::vector<Gaussian>& first, const std::vector<Gaussian>& second,
                    const Eigen::VectorXd& activation);

}  // namespace prodmp
