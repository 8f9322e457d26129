#include "prodmp/distribution.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "prodmp/errors.hpp"

namespace prodmp {

WeightsDistribution::WeightsDistribution(Eigen::VectorXd mean, Eigen::MatrixXd chol)
    : mean_(std::move(mean)), chol_(std::move(chol)) {
    if (chol_.rows() != chol_.cols() || chol_.rows() != mean_.size() || mean_.size() == 0) {
        std::ostringstream os;
        os << "weights distribution: mean of length " << mean_.size() << " needs a square factor of the same size, got "
           << chol_.rows() << "x" << chol_.cols();
        throw DimensionError(os.str());
    }
    if (!mean_.allFinite() || !chol_.allFinite()) {
        throw ValidationError("weights distribution contains non-finite values");
    }
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) {
        if (!(chol_(i, i) > 0.0)) {
            std::ostringstream os;
            os << "weights covariance factor is not positive definite: diagonal entry " << i << " = " << chol_(i, i);
            throw NumericalError(os.str());
        }
        for (Eigen::Index j = i + 1; j < chol_.cols(); ++j) {
            if (chol_(i, j) != 0.0) throw ValidationError("weights covariance factor must be lower triangular");
        }
    }
}

WeightsDistribution WeightsDistribution::from_covariance(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
        throw DimensionError("covariance shape does not match mean length");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("weights covariance is not positive definite");
    }
    return WeightsDistribution(std::move(mean), llt.matrixL());
}

WeightsDistribution WeightsDistribution::point_mass(Eigen::VectorXd mean) {
    WeightsDistribution d;
    d.chol_ = Eigen::MatrixXd::Zero(mean.size(), mean.size());
    d.mean_ = std::move(mean);
    d.degenerate_ = true;
    return d;
}

namespace {

void check_noise(double noise_var) {
    if (!std::isfinite(noise_var) || noise_var < 0.0) {
        throw ValidationError("noise variance must be finite and non-negative");
    }
}

}  // namespace

TrajectoryDistribution trajectory_distribution(const WeightsDistribution& wdist,
                                               const BoundaryCondition& bc,
                                               std::span<const double> times, const BasisBank& bank,
                                               double noise_var) {
    validate_boundary(bc, bank);
    check_noise(noise_var);
    const std::size_t dofs = bc.dofs();
    validate_weights(wdist.mean(), dofs, bank);

    const auto cols = static_cast<Eigen::Index>(bank.columns());
    const auto n_t = static_cast<Eigen::Index>(times.size());
    const auto d_count = static_cast<Eigen::Index>(dofs);
    const Eigen::Index n = n_t * d_count;

    // H^T is block diagonal: the rows of DoF d only touch weight block d.
    Eigen::MatrixXd ht = Eigen::MatrixXd::Zero(n, d_count * cols);
    Eigen::VectorXd xi1(n_t), xi2(n_t);
    const Eigen::VectorXd phi_b = bank.position_row(bc.t_b);
    const Eigen::VectorXd dphi_b = bank.velocity_row(bc.t_b);
    Eigen::VectorXd row(cols);
    for (Eigen::Index k = 0; k < n_t; ++k) {
        const double t = times[static_cast<std::size_t>(k)];
        const auto xi = xi_terms(t, bc.t_b, bank.config());
        xi1[k] = xi.xi1;
        xi2[k] = xi.xi2;
        bank.position_row(t, row);
        row += xi.xi3 * phi_b + xi.xi4 * dphi_b;
        for (Eigen::Index d = 0; d < d_count; ++d) {
            ht.block(d * n_t + k, d * cols, 1, cols) = row.transpose();
        }
    }

    TrajectoryDistribution out;
    out.noise_var = noise_var;
    out.index.reserve(static_cast<std::size_t>(n));
    out.mean.resize(n);
    for (Eigen::Index d = 0; d < d_count; ++d) {
        for (Eigen::Index k = 0; k < n_t; ++k) {
            out.index.push_back({times[static_cast<std::size_t>(k)], static_cast<std::size_t>(d)});
            out.mean[d * n_t + k] = xi1[k] * bc.y_b[d] + xi2[k] * bc.dy_b[d];
        }
    }
    out.mean.noalias() += ht * wdist.mean();

    const Eigen::MatrixXd hl = ht * wdist.chol().triangularView<Eigen::Lower>();
    out.cov = Eigen::MatrixXd::Zero(n, n);
    out.cov.selfadjointView<Eigen::Lower>().rankUpdate(hl);
    out.cov.triangularView<Eigen::StrictlyUpper>() = out.cov.transpose();
    out.cov.diagonal().array() += noise_var;
    return out;
}

TrajectoryDistribution marginal(const TrajectoryDistribution& dist, std::span<const std::size_t> subset) {
    const auto m = static_cast<Eigen::Index>(subset.size());
    TrajectoryDistribution out;
    out.noise_var = dist.noise_var;
    out.mean.resize(m);
    out.cov.resize(m, m);
    out.index.reserve(subset.size());
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t si = subset[static_cast<std::size_t>(i)];
        if (si >= dist.size()) {
            std::ostringstream os;
            os << "marginal: index " << si << " out of range for a distribution of size " << dist.size();
            throw DimensionError(os.str());
        }
        out.index.push_back(dist.index[si]);
        out.mean[i] = dist.mean[static_cast<Eigen::Index>(si)];
        for (Eigen::Index j = 0; j < m; ++j) {
            out.cov(i, j) = dist.cov(static_cast<Eigen::Index>(si),
                                     static_cast<Eigen::Index>(subset[static_cast<std::size_t>(j)]));
        }
    }
    return out;
}

double gaussian_nll(const Eigen::VectorXd& value, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    if (value.size() != mean.size() || cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw DimensionError("gaussian_nll: value, mean and covariance sizes disagree");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("gaussian_nll: covariance is singular or not positive definite (add noise variance)");
    }
    const Eigen::VectorXd z = llt.matrixL().solve(value - mean);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const auto k = static_cast<double>(mean.size());
    return 0.5 * (k * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

namespace {

std::mt19937_64 generator_for(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

Eigen::MatrixXd sample_weights(const WeightsDistribution& wdist, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw ValidationError("sample count must be at least 1");
    const auto dim = static_cast<Eigen::Index>(wdist.dim());
    Eigen::MatrixXd z(dim, static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
        auto rng = generator_for(seed, k);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < dim; ++i) z(i, static_cast<Eigen::Index>(k)) = normal(rng);
    }
    Eigen::MatrixXd w = wdist.chol().triangularView<Eigen::Lower>() * z;
    w.colwise() += wdist.mean();
    return w;
}

std::vector<Eigen::MatrixXd> sample_trajectories(const WeightsDistribution& wdist,
                                                 const BoundaryCondition& bc,
                                                 std::span<const double> times,
                                                 const BasisBank& bank, std::size_t count,
                                                 std::uint64_t seed) {
    validate_boundary(bc, bank);
    validate_weights(wdist.mean(), bc.dofs(), bank);
    const Eigen::MatrixXd w = sample_weights(wdist, count, seed);
    std::vector<Eigen::MatrixXd> out;
    out.reserve(count);
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
        out.push_back(evaluate_position(w.col(k), bc, times, bank));
    }
    return out;
}

std::vector<TimePair> sample_time_pairs(std::span<const double> horizon, std::size_t count, std::uint64_t seed) {
    if (horizon.size() < 2) throw ValidationError("time pair sampling needs at least 2 horizon times");
    if (count == 0) throw ValidationError("time pair count must be at least 1");
    auto rng = generator_for(seed, 0);
    const std::size_t n = horizon.size();
    std::uniform_int_distribution<std::size_t> pick_first(0, n - 1);
    std::uniform_int_distribution<std::size_t> pick_second(0, n - 2);
    std::vector<TimePair> pairs;
    pairs.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t a = pick_first(rng);
        std::size_t b = pick_second(rng);
        if (b >= a) ++b;
        const std::size_t lo = std::min(a, b);
        const std::size_t hi = std::max(a, b);
        pairs.push_back({lo, hi, horizon[lo], horizon[hi]});
    }
    return pairs;
}

TimePairBatch make_pair_batch(std::vector<TimePair> pairs, const Eigen::MatrixXd& positions) {
    TimePairBatch batch;
    batch.truths.reserve(pairs.size());
    const Eigen::Index dofs = positions.rows();
    for (const auto& p : pairs) {
        if (p.first >= static_cast<std::size_t>(positions.cols()) ||
            p.second >= static_cast<std::size_t>(positions.cols())) {
            throw DimensionError("time pair index beyond the demonstration length");
        }
        Eigen::VectorXd truth(2 * dofs);
        for (Eigen::Index d = 0; d < dofs; ++d) {
            truth[2 * d] = positions(d, static_cast<Eigen::Index>(p.first));
            truth[2 * d + 1] = positions(d, static_cast<Eigen::Index>(p.second));
        }
        batch.truths.push_back(std::move(truth));
    }
    batch.pairs = std::move(pairs);
    return batch;
}

double pair_nll(const TimePairBatch& batch, const WeightsDistribution& wdist, const BoundaryCondition& bc,
                const BasisBank& bank, double noise_var) {
    if (batch.pairs.empty()) throw ValidationError("pair_nll needs at least one time pair");
    if (batch.truths.size() != batch.pairs.size()) {
        throw DimensionError("pair_nll: one truth vector per pair is required");
    }
    const auto expected = static_cast<Eigen::Index>(2 * bc.dofs());
    double total = 0.0;
    for (std::size_t j = 0; j < batch.pairs.size(); ++j) {
        const auto& p = batch.pairs[j];
        if (batch.truths[j].size() != expected) {
            throw DimensionError("pair_nll: truth vector must have 2 * DoF entries");
        }
        const double times[2] = {p.t0, p.t1};
        const auto dist = trajectory_distribution(wdist, bc, times, bank, noise_var);
        total += gaussian_nll(batch.truths[j], dist.mean, dist.cov);
    }
    return total / static_cast<double>(batch.pairs.size());
}

}  // namespace prodmp
