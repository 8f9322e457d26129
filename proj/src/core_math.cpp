#include "prodmp/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "prodmp/errors.hpp"

namespace prodmp {

namespace {

void require_non_negative_time(double t, const char* what) {
    if (!std::isfinite(t) || t < 0.0) {
        std::ostringstream os;
        os << what << ": time must be finite and non-negative, got " << t;
        throw ValidationError(os.str());
    }
}

}  // namespace

PhaseValue phase(double t, const DmpConfig& config) {
    require_non_negative_time(t, "phase");
    return {t, std::exp(-config.alpha_x() * t / config.tau())};
}

ForcingBasis::ForcingBasis(Eigen::VectorXd centers, Eigen::VectorXd widths)
    : centers_(std::move(centers)), widths_(std::move(widths)) {
    if (centers_.size() != widths_.size() || centers_.size() == 0) {
        throw DimensionError("forcing basis needs matching, non-empty center and width vectors");
    }
}

namespace {

/// Far-away basis functions underflow into subnormals, which carry no
/// information at double precision but slow every later multiply.
void flush_subnormals(Eigen::Ref<Eigen::VectorXd> v) {
    constexpr double tiny = std::numeric_limits<double>::min();
    v = (v.array().abs() < tiny).select(0.0, v.array()).matrix();
}

}  // namespace

Eigen::VectorXd ForcingBasis::activations(double x) const {
    return (-(widths_.array() * (x - centers_.array()).square())).exp().matrix();
}

void ForcingBasis::forcing_row(double x, Eigen::Ref<Eigen::VectorXd> out) const {
    // Shifting all exponents by their maximum leaves the ratio unchanged.
    out = -(widths_.array() * (x - centers_.array()).square()).matrix();
    const double shift = out.maxCoeff();
    out = (out.array() - shift).exp().matrix();
    out *= x / out.sum();
    flush_subnormals(out);
}

Eigen::VectorXd ForcingBasis::forcing_row(double x) const {
    Eigen::VectorXd row(centers_.size());
    forcing_row(x, row);
    return row;
}

ForcingBasis make_forcing_basis(const DmpConfig& config) {
    const auto n = static_cast<Eigen::Index>(config.num_basis());
    if (n < 2) throw ValidationError("forcing basis needs at least 2 functions");

    Eigen::VectorXd centers(n);
    const double spacing = config.duration() / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        centers[i] = std::exp(-config.alpha_x() * spacing * static_cast<double>(i) / config.tau());
    }

    const double log_overlap = std::log(config.basis_overlap());
    Eigen::VectorXd widths(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double gap = i + 1 < n ? centers[i] - centers[i + 1] : centers[i - 1] - centers[i];
        widths[i] = -log_overlap / (gap * gap);
    }
    return ForcingBasis(std::move(centers), std::move(widths));
}

ComplementarySample complementary(double t, const DmpConfig& config) {
    require_non_negative_time(t, "complementary");
    const double a = config.decay_rate();
    const double y1 = std::exp(-a * t);
    return {t, y1, t * y1, -a * y1, (1.0 - a * t) * y1};
}

QTerms q_terms(double t, const DmpConfig& config) {
    require_non_negative_time(t, "q_terms");
    const double a = config.decay_rate();
    const double arg = a * t;
    if (arg > kMaxExponent) {
        std::ostringstream os;
        os << "q_terms: exponent " << arg << " exceeds overflow guard " << kMaxExponent;
        throw NumericalError(os.str());
    }
    const double growth = std::expm1(arg);  // exp(a t) - 1
    return {(arg - 1.0) * growth + arg, a * growth};
}

BasisBank::BasisBank(DmpConfig config, std::vector<double> times, RowMatrix pos_basis,
                     RowMatrix vel_basis, std::vector<ComplementarySample> complementary)
    : config_(std::move(config)),
      times_(std::move(times)),
      pos_(std::move(pos_basis)),
      vel_(std::move(vel_basis)),
      comp_(std::move(complementary)) {
    const auto rows = static_cast<Eigen::Index>(times_.size());
    const auto cols = static_cast<Eigen::Index>(config_.columns());
    if (times_.size() != config_.grid_steps() + 1 || pos_.rows() != rows || vel_.rows() != rows ||
        pos_.cols() != cols || vel_.cols() != cols || comp_.size() != times_.size()) {
        throw DimensionError("basis bank arrays do not match the grid of its config");
    }
    table_.resize(rows, cols + 2);
    table_.leftCols(cols) = pos_;
    for (Eigen::Index i = 0; i < rows; ++i) {
        table_(i, cols) = comp_[static_cast<std::size_t>(i)].y1;
        table_(i, cols + 1) = comp_[static_cast<std::size_t>(i)].y2;
    }
}

BasisBank::Lookup BasisBank::locate(double t) const {
    const double duration = config_.duration();
    const double slack = 1e-12 * duration;
    if (!std::isfinite(t) || t < -slack || t > duration + slack) {
        std::ostringstream os;
        os.precision(17);
        os << "time " << t << " outside basis bank range [0, " << duration << "]";
        throw ValidationError(os.str());
    }
    const double pos = std::clamp(t, 0.0, duration) / config_.grid_dt();
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-9) {
        return {static_cast<std::size_t>(nearest), 0.0};
    }
    const auto index = std::min(static_cast<std::size_t>(std::floor(pos)), config_.grid_steps() - 1);
    return {index, pos - static_cast<double>(index)};
}

namespace {

void interpolate_row(const RowMatrix& m, BasisBank::Lookup at, Eigen::Ref<Eigen::VectorXd> out) {
    const auto i = static_cast<Eigen::Index>(at.index);
    if (at.frac == 0.0) {
        out = m.row(i).transpose();
    } else {
        out = ((1.0 - at.frac) * m.row(i) + at.frac * m.row(i + 1)).transpose();
    }
}

}  // namespace

void BasisBank::position_row(double t, Eigen::Ref<Eigen::VectorXd> out) const {
    interpolate_row(pos_, locate(t), out);
}

void BasisBank::velocity_row(double t, Eigen::Ref<Eigen::VectorXd> out) const {
    interpolate_row(vel_, locate(t), out);
}

Eigen::VectorXd BasisBank::position_row(double t) const {
    Eigen::VectorXd row(pos_.cols());
    position_row(t, row);
    return row;
}

Eigen::VectorXd BasisBank::velocity_row(double t) const {
    Eigen::VectorXd row(vel_.cols());
    velocity_row(t, row);
    return row;
}

bool BasisBank::operator==(const BasisBank& other) const {
    if (!(config_ == other.config_) || times_ != other.times_ || pos_ != other.pos_ || vel_ != other.vel_) {
        return false;
    }
    for (std::size_t i = 0; i < comp_.size(); ++i) {
        const auto& a = comp_[i];
        const auto& b = other.comp_[i];
        if (a.t != b.t || a.y1 != b.y1 || a.y2 != b.y2 || a.dy1 != b.dy1 || a.dy2 != b.dy2) return false;
    }
    return true;
}

double basis_consistency_error(const BasisBank& bank) {
    const auto& pos = bank.pos_basis();
    const auto& vel = bank.vel_basis();
    const double dt = bank.config().grid_dt();
    double worst = 0.0;
    for (Eigen::Index i = 1; i + 1 < pos.rows(); ++i) {
        const double dev =
            ((pos.row(i + 1) - pos.row(i - 1)) / (2.0 * dt) - vel.row(i)).cwiseAbs().maxCoeff();
        worst = std::max(worst, dev);
    }
    return worst;
}

BasisBank precompute_basis(const DmpConfig& config) {
    const auto forcing = make_forcing_basis(config);
    const auto n_basis = static_cast<Eigen::Index>(config.num_basis());
    const std::size_t steps = config.grid_steps();
    const auto rows = static_cast<Eigen::Index>(steps + 1);
    const double dt = config.grid_dt();
    const double a = config.decay_rate();
    const double inv_tau2 = 1.0 / (config.tau() * config.tau());
    const double decay = std::exp(-a * dt);

    std::vector<double> times(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) times[i] = static_cast<double>(i) * dt;
    times.back() = config.duration();

    RowMatrix pos(rows, n_basis + 1);
    RowMatrix vel(rows, n_basis + 1);
    std::vector<ComplementarySample> comp;
    comp.reserve(steps + 1);

    // With g(t') = x(t') phi(x(t')) / tau^2 and kernel k(s) = exp(-a s):
    //   first(t)  = int_0^t k(t - t') g(t') dt'
    //   second(t) = int_0^t (t - t') k(t - t') g(t') dt'  = y2 p2 - y1 p1
    // and the velocity weights are first - a * second = dy2 p2 - dy1 p1.
    Eigen::VectorXd first = Eigen::VectorXd::Zero(n_basis);
    Eigen::VectorXd second = Eigen::VectorXd::Zero(n_basis);
    Eigen::VectorXd g_prev(n_basis);
    Eigen::VectorXd g_next(n_basis);
    forcing.forcing_row(phase(0.0, config).x, g_prev);
    g_prev *= inv_tau2;

    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = times[i];
        if (i > 0) {
            forcing.forcing_row(phase(t, config).x, g_next);
            g_next *= inv_tau2;
            second = decay * (second + dt * first) + (0.5 * dt * dt * decay) * g_prev;
            first = decay * first + (0.5 * dt) * (decay * g_prev + g_next);
            flush_subnormals(second);
            flush_subnormals(first);
            g_prev.swap(g_next);
        }
        const auto r = static_cast<Eigen::Index>(i);
        const double at = a * t;
        const double e = std::exp(-at);
        pos.row(r).head(n_basis) = second.transpose();
        Eigen::VectorXd vel_row = first - a * second;
        flush_subnormals(vel_row);
        vel.row(r).head(n_basis) = vel_row.transpose();
        // y2 q2 - y1 q1 = 1 - (1 + a t) exp(-a t); its derivative a^2 t exp(-a t).
        pos(r, n_basis) = -std::expm1(-at) - at * e;
        vel(r, n_basis) = a * at * e;
        comp.push_back(complementary(t, config));
    }

    BasisBank bank(config, std::move(times), std::move(pos), std::move(vel), std::move(comp));

    const double deviation = basis_consistency_error(bank);
    if (!std::isfinite(deviation) || deviation > 10.0 * dt) {
        std::ostringstream os;
        os << "basis precomputation failed its self-check: finite-difference velocity deviates by "
           << deviation << " (limit " << 10.0 * dt << "); refine grid_dt";
        throw NumericalError(os.str());
    }
    return bank;
}

}  // namespace prodmp
