#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace prodmp {

/// Hyperparameters of the critically damped DMP and of its basis bank.
///
/// The damper constant is not a free parameter: it is always alpha / 4, which
/// makes the homogeneous system critically damped. Construct through make()
/// so the invariants are checked once; every downstream operation assumes a
/// validated config.
class DmpConfig {
public:
    struct Params {
        double alpha = 25.0;
        double tau = 3.0;
        double alpha_x = 2.0;
        std::size_t num_basis = 25;
        double duration = 3.0;
        double grid_dt = 0.0;  // 0 selects duration / 3000
        double basis_overlap = 0.3;
    };

    static DmpConfig make(const Params& params);

    /// The parameter set used throughout the digit-writing experiments
    /// (alpha_x = 2, alpha = 25, tau = 3, 25 basis functions, 3 s).
    static DmpConfig standard();

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double tau() const noexcept { return tau_; }
    double alpha_x() const noexcept { return alpha_x_; }
    std::size_t num_basis() const noexcept { return num_basis_; }
    double duration() const noexcept { return duration_; }
    double grid_dt() const noexcept { return grid_dt_; }
    double basis_overlap() const noexcept { return basis_overlap_; }

    /// Number of grid intervals; grid points are i * grid_dt for i in [0, steps].
    std::size_t grid_steps() const noexcept { return grid_steps_; }

    /// alpha / (2 tau): decay rate of both complementary functions.
    double decay_rate() const noexcept { return alpha_ / (2.0 * tau_); }

    /// Columns per DoF in the basis bank (weights plus goal).
    std::size_t columns() const noexcept { return num_basis_ + 1; }

    Params params() const;

    /// Stable 64-bit FNV-1a digest over the bit patterns of all fields.
    std::uint64_t hash() const noexcept;

    std::string describe() const;

    bool operator==(const DmpConfig&) const = default;

private:
    DmpConfig() = default;

    double alpha_ = 0.0;
    double beta_ = 0.0;
    double tau_ = 0.0;
    double alpha_x_ = 0.0;
    std::size_t num_basis_ = 0;
    double duration_ = 0.0;
    double grid_dt_ = 0.0;
    double basis_overlap_ = 0.0;
    std::size_t grid_steps_ = 0;
};

}  // namespace prodmp
