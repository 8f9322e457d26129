#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "prodmp/core_math.hpp"

namespace prodmp {

/// Robot state (position and velocity per DoF) at the boundary time t_b.
struct BoundaryCondition {
    double t_b = 0.0;
    Eigen::VectorXd y_b;
    Eigen::VectorXd dy_b;

    std::size_t dofs() const noexcept { return static_cast<std::size_t>(y_b.size()); }
};

/// Stacked [w_1..w_N, g] blocks, one contiguous block of num_basis + 1 per DoF.
using WeightsVector = Eigen::VectorXd;

/// Throws DimensionError / ValidationError unless bc is usable with bank.
void validate_boundary(const BoundaryCondition& bc, const BasisBank& bank);
void validate_weights(const WeightsVector& w_g, std::size_t dofs, const BasisBank& bank);

/// Boundary-folding coefficients. For s = t - t_b:
///   xi1 = (1 + a s) e^{-a s},  xi2 = s e^{-a s},  xi3 = -xi1,  xi4 = -xi2,
/// which is the ratio form over the Wronskian at t_b reduced algebraically,
/// so no exp(+a t_b) factor is ever formed.
struct XiTerms {
    double t;
    double xi1;
    double xi2;
    double xi3;
    double xi4;
};

XiTerms xi_terms(double t, double t_b, const DmpConfig& config);

/// Time derivatives of the xi terms (used for velocities).
XiTerms xi_rates(double t, double t_b, const DmpConfig& config);

struct Coefficients {
    Eigen::VectorXd c1;
    Eigen::VectorXd c2;
};

/// c1, c2 per DoF from the boundary state, straight from the linear system
/// y(t_b) = y_b, dy(t_b) = dy_b of the complementary-function form.
Coefficients solve_coefficients(const BoundaryCondition& bc, const WeightsVector& w_g,
                                const BasisBank& bank);

/// Column of the boundary-aware linear model for one DoF:
///   h(t) = Phi(t) - xi1(t) Phi(t_b) - xi2(t) dPhi(t_b)
/// so that y(t) = xi1 y_b + xi2 dy_b + h(t)^T w_g.
Eigen::VectorXd boundary_basis_row(double t, double t_b, const BasisBank& bank);
Eigen::VectorXd boundary_velocity_row(double t, double t_b, const BasisBank& bank);

/// D x |times| positions. Query times must lie within [0, duration]; times
/// before t_b are permitted and follow the same closed form.
Eigen::MatrixXd evaluate_position(const WeightsVector& w_g, const BoundaryCondition& bc,
                                  std::span<const double> times, const BasisBank& bank);

Eigen::MatrixXd evaluate_velocity(const WeightsVector& w_g, const BoundaryCondition& bc,
                                  std::span<const double> times, const BasisBank& bank);

/// Positions from cached coefficients: y = c1 y1 + c2 y2 + Phi^T w_g.
/// Grid-aligned queries read y1, y2 from the bank instead of calling exp.
Eigen::MatrixXd evaluate_position_cached(const Coefficients& coefficients, const WeightsVector& w_g,
                                         std::span<const double> times, const BasisBank& bank);

/// Positions at every grid point of the bank (|grid| x D, column per DoF),
/// from cached coefficients. This is the pure table-lookup path.
Eigen::MatrixXd evaluate_grid_cached(const Coefficients& coefficients, const WeightsVector& w_g,
                                     const BasisBank& bank);

/// Same as above, writing into a preallocated |grid| x D matrix.
void evaluate_grid_cached(const Coefficients& coefficients, const WeightsVector& w_g, const BasisBank& bank,
                          Eigen::Ref<Eigen::MatrixXd> out);

}  // namespace prodmp
