#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/config.hpp"

namespace prodmp {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PhaseValue {
    double t;
    double x;
};

/// x(t) = exp(-alpha_x t / tau). Throws ValidationError for t < 0.
PhaseValue phase(double t, const DmpConfig& config);

/// Gaussian RBFs over the phase domain, exp(-h_i (x - c_i)^2).
class ForcingBasis {
public:
    ForcingBasis(Eigen::VectorXd centers, Eigen::VectorXd widths);

    const Eigen::VectorXd& centers() const noexcept { return centers_; }
    const Eigen::VectorXd& widths() const noexcept { return widths_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(centers_.size()); }

    /// Unnormalized activations phi_i(x).
    Eigen::VectorXd activations(double x) const;

    /// Forcing row x * phi(x) / sum(phi(x)); f(x) = row . w.
    /// Evaluated with a shifted exponent so distant phases do not underflow.
    Eigen::VectorXd forcing_row(double x) const;
    void forcing_row(double x, Eigen::Ref<Eigen::VectorXd> out) const;

private:
    Eigen::VectorXd centers_;
    Eigen::VectorXd widths_;
};

/// Centers at the phase images of num_basis time points spread evenly over
/// [0, duration]; each width puts basis_overlap at the neighbouring center.
ForcingBasis make_forcing_basis(const DmpConfig& config);

/// Homogeneous solutions y1 = exp(-a t), y2 = t exp(-a t), a = alpha / (2 tau),
/// and their time derivatives.
struct ComplementarySample {
    double t;
    double y1;
    double y2;
    double dy1;
    double dy2;

    double wronskian() const noexcept { return y1 * dy2 - dy1 * y2; }
};

ComplementarySample complementary(double t, const DmpConfig& config);

struct QTerms {
    double q1;
    double q2;
};

/// Largest exponent a*t accepted by q_terms before reporting overflow.
inline constexpr double kMaxExponent = 700.0;

/// Closed-form goal integrals:
///   q1 = (a t - 1) exp(a t) + 1,  q2 = a (exp(a t) - 1).
/// Throws NumericalError when a t exceeds kMaxExponent.
QTerms q_terms(double t, const DmpConfig& config);

/// Offline position/velocity basis on a uniform time grid.
///
/// Row i of pos_basis holds [y2 p2 - y1 p1, y2 q2 - y1 q1] at times()[i]; the
/// first num_basis entries multiply the weights, the last the goal. The
/// exponentially growing integrals p1, p2, q1, q2 are never formed: the outer
/// decay is folded into the integrand and advanced with the exact recurrence
/// S(t + dt) = exp(-a dt) S(t) + trapezoid increment, so every exponent that
/// gets evaluated is non-positive.
class BasisBank {
public:
    BasisBank(DmpConfig config, std::vector<double> times, RowMatrix pos_basis, RowMatrix vel_basis,
              std::vector<ComplementarySample> complementary);

    const DmpConfig& config() const noexcept { return config_; }
    std::span<const double> times() const noexcept { return times_; }
    const RowMatrix& pos_basis() const noexcept { return pos_; }
    const RowMatrix& vel_basis() const noexcept { return vel_; }
    std::span<const ComplementarySample> complementary_samples() const noexcept { return comp_; }
    /// Column-major [pos_basis | y1 | y2] over the grid, so a full position
    /// column of one DoF is a single matrix-vector product.
    const Eigen::MatrixXd& grid_table() const noexcept { return table_; }

    std::size_t size() const noexcept { return times_.size(); }
    std::size_t columns() const noexcept { return static_cast<std::size_t>(pos_.cols()); }
    double duration() const noexcept { return config_.duration(); }

    /// Linear interpolation weights for an arbitrary time in [0, duration].
    struct Lookup {
        std::size_t index;
        double frac;  // in [0, 1); exact grid hits have frac == 0
    };
    Lookup locate(double t) const;

    /// Interpolated basis rows at t (length num_basis + 1).
    Eigen::VectorXd position_row(double t) const;
    Eigen::VectorXd velocity_row(double t) const;
    void position_row(double t, Eigen::Ref<Eigen::VectorXd> out) const;
    void velocity_row(double t, Eigen::Ref<Eigen::VectorXd> out) const;

    bool operator==(const BasisBank& other) const;

private:
    DmpConfig config_;
    std::vector<double> times_;
    RowMatrix pos_;
    RowMatrix vel_;
    std::vector<ComplementarySample> comp_;
    Eigen::MatrixXd table_;
};

BasisBank precompute_basis(const DmpConfig& config);

/// Largest |central difference of pos_basis - vel_basis| over interior grid
/// points. Used by precompute_basis as a self-check.
double basis_consistency_error(const BasisBank& bank);

}  // namespace prodmp
