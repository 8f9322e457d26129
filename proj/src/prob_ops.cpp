#include "prodmp/prob_ops.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "prodmp/errors.hpp"

namespace prodmp {

std::vector<Gaussian> per_time_marginals(const TrajectoryDistribution& dist) {
    // Group coordinates by time, keeping the DoF order.
    std::map<double, std::vector<std::size_t>> by_time;
    std::size_t max_dof = 0;
    for (std::size_t i = 0; i < dist.index.size(); ++i) {
        by_time[dist.index[i].time].push_back(i);
        max_dof = std::max(max_dof, dist.index[i].dof);
    }
    std::vector<Gaussian> out;
    out.reserve(by_time.size());
    for (const auto& [t, members] : by_time) {
        if (members.size() != max_dof + 1) {
            std::ostringstream os;
            os << "distribution does not cover every DoF at time " << t;
            throw DimensionError(os.str());
        }
        auto sorted = members;
        std::sort(sorted.begin(), sorted.end(),
                  [&](std::size_t a, std::size_t b) { return dist.index[a].dof < dist.index[b].dof; });
        const auto sub = marginal(dist, sorted);
        out.push_back({sub.mean, sub.cov});
    }
    return out;
}

namespace {

constexpr double kJitter = 1e-12;

void check_activation(double a) {
    if (!(a >= 0.0 && a <= 1.0)) {
        std::ostringstream os;
        os << "activation " << a << " outside [0, 1]";
        throw ValidationError(os.str());
    }
}

}  // namespace

CombineResult combine(const std::vector<std::vector<Gaussian>>& primitives, const Eigen::MatrixXd& activations) {
    if (primitives.empty()) throw ValidationError("combine needs at least one primitive");
    const std::size_t steps = primitives.front().size();
    for (const auto& p : primitives) {
        if (p.size() != steps) throw DimensionError("all primitives must have the same number of time steps");
    }
    if (activations.rows() != static_cast<Eigen::Index>(primitives.size()) ||
        activations.cols() != static_cast<Eigen::Index>(steps)) {
        throw DimensionError("activation matrix must be (#primitives x #time steps)");
    }

    CombineResult result;
    result.steps.reserve(steps);
    result.jittered.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const auto col = static_cast<Eigen::Index>(t);
        const Eigen::Index dim = primitives.front()[t].mean.size();
        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < primitives.size(); ++k) {
            const auto& g = primitives[k][t];
            if (g.mean.size() != dim || g.cov.rows() != dim || g.cov.cols() != dim) {
                throw DimensionError("primitive Gaussians disagree in dimension");
            }
            const double a = activations(static_cast<Eigen::Index>(k), col);
            check_activation(a);
            if (a > 0.0) active.push_back(k);
        }
        if (active.empty()) {
            std::ostringstream os;
            os << "all activations are zero at time step " << t;
            throw ValidationError(os.str());
        }

        if (active.size() == 1) {
            // A single active factor a N(mu, Sigma) needs no inversion.
            const auto& g = primitives[active.front()][t];
            const double a = activations(static_cast<Eigen::Index>(active.front()), col);
            result.steps.push_back({g.mean, a == 1.0 ? g.cov : Eigen::MatrixXd(g.cov / a)});
            result.jittered.push_back(false);
            continue;
        }

        Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd info = Eigen::VectorXd::Zero(dim);
        const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
        for (std::size_t k : active) {
            const auto& g = primitives[k][t];
            const double a = activations(static_cast<Eigen::Index>(k), col);
            Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
            if (llt.info() != Eigen::Success) {
                std::ostringstream os;
                os << "covariance of primitive " << k << " at time step " << t << " is singular";
                throw NumericalError(os.str());
            }
            precision += a * llt.solve(identity);
            info += a * llt.solve(g.mean);
        }
        precision = (0.5 * (precision + precision.transpose())).eval();

        bool jittered = false;
        Eigen::LLT<Eigen::MatrixXd> llt(precision);
        if (llt.info() != Eigen::Success) {
            precision.diagonal().array() += kJitter;
            llt.compute(precision);
            jittered = true;
            if (llt.info() != Eigen::Success) {
                std::ostringstream os;
                os << "combined precision is singular at time step " << t << " even after jitter";
                throw NumericalError(os.str());
            }
        }
        Eigen::MatrixXd cov = llt.solve(identity);
        cov = (0.5 * (cov + cov.transpose())).eval();
        Eigen::VectorXd mean = cov * info;
        result.steps.push_back({std::move(mean), std::move(cov)});
        result.jittered.push_back(jittered);
    }
    return result;
}

CombineResult blend(const std::vector<Gaussian>& first, const std::vector<Gaussian>& second,
                    const Eigen::VectorXd& activation) {
    if (first.size() != second.size() || activation.size() != static_cast<Eigen::Index>(first.size())) {
        throw DimensionError("blend: both inputs and the activation need one entry per time step");
    }
    Eigen::MatrixXd acts(2, activation.size());
    for (Eigen::Index t = 0; t < activation.size(); ++t) {
        check_activation(activation[t]);
        acts(0, t) = activation[t];
        acts(1, t) = 1.0 - activation[t];
    }
    return combine({first, second}, acts);
}

}  // namespace prodmp
