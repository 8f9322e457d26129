#include "prodmp/boundary.hpp"

#include <cmath>
#include <sstream>

#include "prodmp/errors.hpp"

namespace prodmp {

void validate_boundary(const BoundaryCondition& bc, const BasisBank& bank) {
    if (bc.y_b.size() == 0 || bc.y_b.size() != bc.dy_b.size()) {
        std::ostringstream os;
        os << "boundary condition needs matching non-empty position/velocity vectors, got "
           << bc.y_b.size() << " and " << bc.dy_b.size();
        throw DimensionError(os.str());
    }
    if (!bc.y_b.allFinite() || !bc.dy_b.allFinite()) {
        throw ValidationError("boundary condition contains non-finite values");
    }
    bank.locate(bc.t_b);  // range check
}

void validate_weights(const WeightsVector& w_g, std::size_t dofs, const BasisBank& bank) {
    const auto expected = static_cast<Eigen::Index>(dofs * bank.columns());
    if (w_g.size() != expected) {
        std::ostringstream os;
        os << "weights vector has length " << w_g.size() << ", expected " << expected << " ("
           << dofs << " DoF x " << bank.columns() << ")";
        throw DimensionError(os.str());
    }
}

XiTerms xi_terms(double t, double t_b, const DmpConfig& config) {
    const double a = config.decay_rate();
    const double s = t - t_b;
    const double e = std::exp(-a * s);
    const double xi1 = (1.0 + a * s) * e;
    const double xi2 = s * e;
    return {t, xi1, xi2, -xi1, -xi2};
}

XiTerms xi_rates(double t, double t_b, const DmpConfig& config) {
    const double a = config.decay_rate();
    const double s = t - t_b;
    const double e = std::exp(-a * s);
    const double d1 = -a * a * s * e;
    const double d2 = (1.0 - a * s) * e;
    return {t, d1, d2, -d1, -d2};
}

Coefficients solve_coefficients(const BoundaryCondition& bc, const WeightsVector& w_g,
                                const BasisBank& bank) {
    validate_boundary(bc, bank);
    const std::size_t dofs = bc.dofs();
    validate_weights(w_g, dofs, bank);

    const auto cb = complementary(bc.t_b, bank.config());
    const Eigen::VectorXd phi_b = bank.position_row(bc.t_b);
    const Eigen::VectorXd dphi_b = bank.velocity_row(bc.t_b);
    const double wronskian = cb.y1 * cb.dy2 - cb.y2 * cb.dy1;

    const auto cols = static_cast<Eigen::Index>(bank.columns());
    Coefficients out{Eigen::VectorXd(dofs), Eigen::VectorXd(dofs)};
    for (std::size_t d = 0; d < dofs; ++d) {
        const auto w = w_g.segment(static_cast<Eigen::Index>(d) * cols, cols);
        const double pos_b = phi_b.dot(w);
        const double vel_b = dphi_b.dot(w);
        const auto i = static_cast<Eigen::Index>(d);
        out.c1[i] = (cb.dy2 * bc.y_b[i] - cb.y2 * bc.dy_b[i]) / wronskian +
                    (cb.y2 * vel_b - cb.dy2 * pos_b) / wronskian;
        out.c2[i] = (cb.y1 * bc.dy_b[i] - cb.dy1 * bc.y_b[i]) / wronskian +
                    (cb.dy1 * pos_b - cb.y1 * vel_b) / wronskian;
    }
    return out;
}

Eigen::VectorXd boundary_basis_row(double t, double t_b, const BasisBank& bank) {
    const auto xi = xi_terms(t, t_b, bank.config());
    return bank.position_row(t) + xi.xi3 * bank.position_row(t_b) + xi.xi4 * bank.velocity_row(t_b);
}

Eigen::VectorXd boundary_velocity_row(double t, double t_b, const BasisBank& bank) {
    const auto dxi = xi_rates(t, t_b, bank.config());
    return bank.velocity_row(t) + dxi.xi3 * bank.position_row(t_b) + dxi.xi4 * bank.velocity_row(t_b);
}

namespace {

enum class Order { Position, Velocity };

Eigen::MatrixXd evaluate(Order order, const WeightsVector& w_g, const BoundaryCondition& bc,
                         std::span<const double> times, const BasisBank& bank) {
    validate_boundary(bc, bank);
    const std::size_t dofs = bc.dofs();
    validate_weights(w_g, dofs, bank);

    const auto cols = static_cast<Eigen::Index>(bank.columns());
    const auto d_count = static_cast<Eigen::Index>(dofs);
    // Boundary projections of the weights: Phi_b^T w, dPhi_b^T w per DoF.
    const Eigen::Map<const Eigen::MatrixXd> w(w_g.data(), cols, d_count);
    const Eigen::VectorXd pos_b = w.transpose() * bank.position_row(bc.t_b);
    const Eigen::VectorXd vel_b = w.transpose() * bank.velocity_row(bc.t_b);
    const Eigen::VectorXd free_pos = bc.y_b - pos_b;
    const Eigen::VectorXd free_vel = bc.dy_b - vel_b;

    Eigen::MatrixXd out(d_count, static_cast<Eigen::Index>(times.size()));
    Eigen::VectorXd row(cols);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        XiTerms xi{};
        if (order == Order::Position) {
            xi = xi_terms(t, bc.t_b, bank.config());
            bank.position_row(t, row);
        } else {
            xi = xi_rates(t, bc.t_b, bank.config());
            bank.velocity_row(t, row);
        }
        out.col(static_cast<Eigen::Index>(k)) =
            xi.xi1 * free_pos + xi.xi2 * free_vel + w.transpose() * row;
    }
    return out;
}

}  // namespace

Eigen::MatrixXd evaluate_position(const WeightsVector& w_g, const BoundaryCondition& bc,
                                  std::span<const double> times, const BasisBank& bank) {
    return evaluate(Order::Position, w_g, bc, times, bank);
}

Eigen::MatrixXd evaluate_velocity(const WeightsVector& w_g, const BoundaryCondition& bc,
                                  std::span<const double> times, const BasisBank& bank) {
    return evaluate(Order::Velocity, w_g, bc, times, bank);
}

Eigen::MatrixXd evaluate_position_cached(const Coefficients& coefficients, const WeightsVector& w_g,
                                         std::span<const double> times, const BasisBank& bank) {
    const auto d_count = coefficients.c1.size();
    if (d_count == 0 || coefficients.c2.size() != d_count) {
        throw DimensionError("coefficient vectors must be non-empty and of equal length");
    }
    validate_weights(w_g, static_cast<std::size_t>(d_count), bank);
    const auto cols = static_cast<Eigen::Index>(bank.columns());
    const Eigen::Map<const Eigen::MatrixXd> w(w_g.data(), cols, d_count);
    const auto comp = bank.complementary_samples();

    Eigen::MatrixXd out(d_count, static_cast<Eigen::Index>(times.size()));
    Eigen::VectorXd row(cols);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto at = bank.locate(times[k]);
        double y1, y2;
        if (at.frac == 0.0) {
            y1 = comp[at.index].y1;
            y2 = comp[at.index].y2;
            row = bank.pos_basis().row(static_cast<Eigen::Index>(at.index)).transpose();
        } else {
            const auto c = complementary(times[k], bank.config());
            y1 = c.y1;
            y2 = c.y2;
            bank.position_row(times[k], row);
        }
        out.col(static_cast<Eigen::Index>(k)) =
            y1 * coefficients.c1 + y2 * coefficients.c2 + w.transpose() * row;
    }
    return out;
}

void evaluate_grid_cached(const Coefficients& coefficients, const WeightsVector& w_g, const BasisBank& bank,
                          Eigen::Ref<Eigen::MatrixXd> out) {
    const auto d_count = coefficients.c1.size();
    if (d_count == 0 || coefficients.c2.size() != d_count) {
        throw DimensionError("coefficient vectors must be non-empty and of equal length");
    }
    validate_weights(w_g, static_cast<std::size_t>(d_count), bank);
    const auto& table = bank.grid_table();
    if (out.rows() != table.rows() || out.cols() != d_count) {
        throw DimensionError("output matrix must be |grid| x D");
    }
    const auto cols = static_cast<Eigen::Index>(bank.columns());
    Eigen::VectorXd coef(cols + 2);
    for (Eigen::Index d = 0; d < d_count; ++d) {
        coef.head(cols) = w_g.segment(d * cols, cols);
        coef[cols] = coefficients.c1[d];
        coef[cols + 1] = coefficients.c2[d];
        out.col(d).noalias() = table * coef;
    }
}

Eigen::MatrixXd evaluate_grid_cached(const Coefficients& coefficients, const WeightsVector& w_g,
                                     const BasisBank& bank) {
    Eigen::MatrixXd out(bank.grid_table().rows(), coefficients.c1.size());
    evaluate_grid_cached(coefficients, w_g, bank, out);
    return out;
}

}  // namespace prodmp
