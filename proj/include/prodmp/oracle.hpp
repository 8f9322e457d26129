#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/boundary.hpp"

namespace prodmp {

enum class IntegratorMethod { ExplicitEuler, Rk4 };

struct IntegratorSpec {
    IntegratorMethod method = IntegratorMethod::Rk4;
    double dt = 1e-4;
};

struct IntegratedTrajectory {
    std::vector<double> times;
    Eigen::MatrixXd pos;  // D x |times|
    Eigen::MatrixXd vel;
};

/// Numerically integrates tau^2 y'' = alpha (beta (g - y) - tau y') + x phi^T w
/// per DoF from (y0, dy0) at t_start up to t_end (defaults to the config
/// duration), using the same forcing basis as the basis bank. The horizon
/// must be an integer multiple of spec.dt. Throws NumericalError with the
/// step index if the state stops being finite.
IntegratedTrajectory integrate_dmp(const WeightsVector& w_g, const Eigen::VectorXd& y0,
                                   const Eigen::VectorXd& dy0, const DmpConfig& config,
                                   const IntegratorSpec& spec, double t_start = 0.0,
                                   double t_end = -1.0);

struct BenchScenario {
    std::size_t dofs = 2;
    double duration = 6.0;
    double rate = 1000.0;
    std::size_t num_basis = 10;  // 2 x (10 + 1) = 22 parameters
    double alpha = 25.0;
    double tau = 6.0;
    double alpha_x = 3.0;
    std::size_t repetitions = 51;
    std::size_t warmup = 5;
    std::uint64_t seed = 1;

    /// Config of the bank the scenario expects (grid step 1 / rate).
    DmpConfig bank_config() const;
};

struct BenchReport {
    BenchScenario scenario;
    bool with_bc_recompute = false;
    std::size_t points = 0;
    double oracle_seconds = 0.0;  // median, explicit Euler at the trajectory rate
    double basis_seconds = 0.0;   // median, basis-bank path
    double speedup = 0.0;         // oracle_seconds / basis_seconds
    std::string note;
};

/// Times trajectory generation for the scenario. Bank precomputation is not
/// timed. Without BC recompute the coefficients c1, c2 are cached and the
/// trajectory is a table lookup plus a small matrix product; with it every
/// call takes a fresh boundary state and recomputes all boundary-dependent
/// terms for every query time. Throws ValidationError if bank does not
/// match the scenario.
BenchReport run_benchmark(const BenchScenario& scenario, const BasisBank& bank, bool with_bc_recompute);

}  // namespace prodmp
