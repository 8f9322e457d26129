#include "prodmp/config.hpp"

#include <cmath>
#include <sstream>

#include "prodmp/errors.hpp"
#include "fnv1a.hpp"

namespace prodmp {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Io: return "io";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Dimension: return "dimension";
    }
    return "unknown";
}

namespace {

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0) {
        std::ostringstream os;
        os << name << " must be a finite positive number, got " << value;
        throw ValidationError(os.str());
    }
}

}  // namespace

DmpConfig DmpConfig::make(const Params& p) {
    require_positive(p.alpha, "alpha");
    require_positive(p.tau, "tau");
    require_positive(p.alpha_x, "alpha_x");
    require_positive(p.duration, "duration");
    if (p.num_basis < 2) {
        throw ValidationError("num_basis must be at least 2 (the width rule needs a neighbouring center)");
    }
    if (!(p.basis_overlap > 0.0 && p.basis_overlap < 1.0)) {
        throw ValidationError("basis_overlap must lie in (0, 1)");
    }
    const double dt = p.grid_dt == 0.0 ? p.duration / 3000.0 : p.grid_dt;
    require_positive(dt, "grid_dt");

    const double ratio = p.duration / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
        throw ValidationError("duration must be an integer multiple of grid_dt");
    }
    if (steps + 1.0 < 4.0 * static_cast<double>(p.num_basis)) {
        std::ostringstream os;
        os << "grid too coarse: " << steps + 1.0 << " grid points for " << p.num_basis
           << " basis functions (need at least " << 4 * p.num_basis << ")";
        throw ValidationError(os.str());
    }

    DmpConfig c;
    c.alpha_ = p.alpha;
    c.beta_ = p.alpha / 4.0;
    c.tau_ = p.tau;
    c.alpha_x_ = p.alpha_x;
    c.num_basis_ = p.num_basis;
    c.duration_ = p.duration;
    c.grid_steps_ = static_cast<std::size_t>(steps);
    // Snap so that grid_steps * grid_dt reproduces the duration as closely as possible.
    c.grid_dt_ = p.duration / steps;
    c.basis_overlap_ = p.basis_overlap;
    return c;
}

DmpConfig DmpConfig::standard() { return make(Params{}); }

DmpConfig::Params DmpConfig::params() const {
    Params p;
    p.alpha = alpha_;
    p.tau = tau_;
    p.alpha_x = alpha_x_;
    p.num_basis = num_basis_;
    p.duration = duration_;
    p.grid_dt = grid_dt_;
    p.basis_overlap = basis_overlap_;
    return p;
}

std::uint64_t DmpConfig::hash() const noexcept {
    detail::Fnv1a h;
    h.add(alpha_);
    h.add(beta_);
    h.add(tau_);
    h.add(alpha_x_);
    h.add(static_cast<std::uint64_t>(num_basis_));
    h.add(duration_);
    h.add(grid_dt_);
    h.add(basis_overlap_);
    h.add(static_cast<std::uint64_t>(grid_steps_));
    return h.value();
}

std::string DmpConfig::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "alpha=" << alpha_ << " beta=" << beta_ << " tau=" << tau_ << " alpha_x=" << alpha_x_
       << " num_basis=" << num_basis_ << " duration=" << duration_ << " grid_dt=" << grid_dt_
       << " basis_overlap=" << basis_overlap_;
    return os.str();
}

}  // namespace prodmp
