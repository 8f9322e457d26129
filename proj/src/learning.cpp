#include "prodmp/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "prodmp/errors.hpp"

namespace prodmp {

BoundaryCondition Demonstration::boundary_condition() const {
    if (boundary) return *boundary;
    if (times.empty() || positions.cols() == 0) throw ValidationError("demonstration is empty");
    BoundaryCondition bc;
    bc.t_b = times.front();
    bc.y_b = positions.col(0);
    if (velocities) {
        bc.dy_b = velocities->col(0);
    } else {
        if (times.size() < 2) throw ValidationError("velocity estimate needs at least two samples");
        bc.dy_b = (positions.col(1) - positions.col(0)) / (times[1] - times[0]);
    }
    return bc;
}

namespace {

void validate_demo(const Demonstration& demo, const BasisBank& bank) {
    if (demo.positions.rows() == 0) throw DimensionError("demonstration has no DoFs");
    if (static_cast<std::size_t>(demo.positions.cols()) != demo.times.size()) {
        throw DimensionError("demonstration positions need one column per time stamp");
    }
    if (demo.velocities && (demo.velocities->rows() != demo.positions.rows() ||
                            demo.velocities->cols() != demo.positions.cols())) {
        throw DimensionError("demonstration velocities must match the positions' shape");
    }
    if (demo.times.size() < bank.columns()) {
        std::ostringstream os;
        os << "demonstration has " << demo.times.size() << " samples; at least " << bank.columns()
           << " are needed to identify " << bank.columns() << " parameters per DoF";
        throw ValidationError(os.str());
    }
    for (std::size_t i = 1; i < demo.times.size(); ++i) {
        if (!(demo.times[i] > demo.times[i - 1])) throw ValidationError("demonstration times must increase strictly");
    }
    for (double t : demo.times) bank.locate(t);
}

}  // namespace

WeightsVector fit_weights(const Demonstration& demo, const BasisBank& bank, std::optional<double> ridge) {
    validate_demo(demo, bank);
    const BoundaryCondition bc = demo.boundary_condition();
    validate_boundary(bc, bank);
    if (bc.dofs() != demo.dofs()) throw DimensionError("boundary condition and demonstration disagree in DoF count");

    const auto cols = static_cast<Eigen::Index>(bank.columns());
    const auto n_t = static_cast<Eigen::Index>(demo.times.size());
    const auto dofs = static_cast<Eigen::Index>(demo.dofs());

    Eigen::MatrixXd design(n_t, cols);
    Eigen::VectorXd xi1(n_t), xi2(n_t);
    for (Eigen::Index k = 0; k < n_t; ++k) {
        const double t = demo.times[static_cast<std::size_t>(k)];
        design.row(k) = boundary_basis_row(t, bc.t_b, bank).transpose();
        const auto xi = xi_terms(t, bc.t_b, bank.config());
        xi1[k] = xi.xi1;
        xi2[k] = xi.xi2;
    }

    double lambda = 0.0;
    if (ridge) {
        if (!std::isfinite(*ridge) || *ridge < 0.0) throw ValidationError("ridge must be finite and non-negative");
        lambda = *ridge;
    } else {
        lambda = 1e-9 * design.squaredNorm() / static_cast<double>(cols);
    }

    // Ridge solve as least squares on [A; sqrt(lambda) I].
    Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(n_t + cols, cols);
    augmented.topRows(n_t) = design;
    augmented.bottomRows(cols).diagonal().setConstant(std::sqrt(lambda));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(augmented);
    if (qr.rank() < cols) {
        std::ostringstream os;
        os << "fit_weights: design matrix is rank deficient (rank " << qr.rank() << " of " << cols
           << "); use a ridge > 0";
        throw NumericalError(os.str());
    }

    WeightsVector w(dofs * cols);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_t + cols);
    for (Eigen::Index d = 0; d < dofs; ++d) {
        rhs.head(n_t) = demo.positions.row(d).transpose() - xi1 * bc.y_b[d] - xi2 * bc.dy_b[d];
        w.segment(d * cols, cols) = qr.solve(rhs);
    }
    if (!w.allFinite()) throw NumericalError("fit_weights produced non-finite weights");
    return w;
}

WeightsDistribution fit_distribution(const std::vector<Demonstration>& demos, const BasisBank& bank,
                                     std::optional<double> ridge, double cov_floor) {
    if (demos.size() < 2) throw ValidationError("fit_distribution needs at least 2 demonstrations");
    if (!std::isfinite(cov_floor) || cov_floor < 0.0) throw ValidationError("cov_floor must be finite and >= 0");

    const auto first = fit_weights(demos.front(), bank, ridge);
    Eigen::MatrixXd fits(first.size(), static_cast<Eigen::Index>(demos.size()));
    fits.col(0) = first;
    for (std::size_t m = 1; m < demos.size(); ++m) {
        const auto w = fit_weights(demos[m], bank, ridge);
        if (w.size() != first.size()) throw DimensionError("demonstrations disagree in DoF count");
        fits.col(static_cast<Eigen::Index>(m)) = w;
    }

    const Eigen::VectorXd mean = fits.rowwise().mean();
    const Eigen::MatrixXd centered = fits.colwise() - mean;
    Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(demos.size() - 1);
    cov.diagonal().array() += cov_floor;

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
        const auto diag = llt.matrixLLT().diagonal();
        ok = (diag.array() > 0.0).all() && diag.allFinite();
    }
    if (!ok) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
        std::ostringstream os;
        os << "fitted weights covariance is not positive definite (minimum eigenvalue "
           << eig.eigenvalues().minCoeff() << "); increase cov_floor";
        throw NumericalError(os.str());
    }
    return WeightsDistribution(mean, llt.matrixL());
}

LatentGaussian bayesian_aggregate(const LatentGaussian& prior, const std::vector<LatentGaussian>& observations) {
    const Eigen::Index dim = prior.mean.size();
    auto check = [dim](const LatentGaussian& g, const char* what) {
        if (g.mean.size() != dim || g.var.size() != dim) {
            throw DimensionError(std::string(what) + " dimension differs from the prior");
        }
        if (!(g.var.array() > 0.0).all() || !g.var.allFinite()) {
            throw ValidationError(std::string(what) + " has a non-positive variance");
        }
    };
    check(prior, "prior");
    for (const auto& o : observations) check(o, "observation");

    std::vector<const LatentGaussian*> order;
    order.reserve(observations.size());
    for (const auto& o : observations) order.push_back(&o);
    const auto bytes = static_cast<std::size_t>(dim) * sizeof(double);
    std::stable_sort(order.begin(), order.end(), [bytes](const LatentGaussian* a, const LatentGaussian* b) {
        const int c = std::memcmp(a->mean.data(), b->mean.data(), bytes);
        if (c != 0) return c < 0;
        return std::memcmp(a->var.data(), b->var.data(), bytes) < 0;
    });

    Eigen::ArrayXd precision = prior.var.array().inverse();
    Eigen::ArrayXd pull = Eigen::ArrayXd::Zero(dim);
    for (const auto* o : order) {
        precision += o->var.array().inverse();
        pull += (o->mean.array() - prior.mean.array()) / o->var.array();
    }
    LatentGaussian post;
    post.var = precision.inverse().matrix();
    post.mean = (prior.mean.array() + post.var.array() * pull).matrix();
    return post;
}

}  // namespace prodmp
