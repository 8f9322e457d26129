#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "prodmp/errors.hpp"
#include "prodmp/prob_ops.hpp"
#include "test_support.hpp"

using namespace prodmp;
using prodmp::testing::linspace;
using prodmp::testing::random_boundary;
using prodmp::testing::random_vector;
using prodmp::testing::random_wdist;
using prodmp::testing::standard_bank;

namespace {

std::vector<Gaussian> random_steps(std::mt19937_64& rng, std::size_t steps, Eigen::Index dim) {
    std::vector<Gaussian> out;
    for (std::size_t t = 0; t < steps; ++t) {
        Eigen::MatrixXd a(dim, dim);
        for (Eigen::Index j = 0; j < dim; ++j) a.col(j) = random_vector(rng, dim, 1.0);
        out.push_back({random_vector(rng, dim, 2.0), a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim)});
    }
    return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(PerTimeMarginals, ExtractsDofBlocks) {
    const auto& bank = standard_bank();
    std::mt19937_64 rng(1);
    const auto times = linspace(0.3, 2.7, 5);
    const auto dist = trajectory_distribution(random_wdist(rng, 52, 1.0, 1.0), random_boundary(rng, 2, 0.3), times,
                                              bank);
    const auto steps = per_time_marginals(dist);
    ASSERT_EQ(steps.size(), 5u);
    for (Eigen::Index t = 0; t < 5; ++t) {
        const auto& g = steps[static_cast<std::size_t>(t)];
        EXPECT_EQ(g.mean[0], dist.mean[t]);
        EXPECT_EQ(g.mean[1], dist.mean[5 + t]);
        EXPECT_EQ(g.cov(0, 1), dist.cov(t, 5 + t));
        EXPECT_EQ(g.cov(1, 1), dist.cov(5 + t, 5 + t));
    }
}

TEST(Combine, SinglePrimitiveIsIdentity) {
    std::mt19937_64 rng(2);
    const auto steps = random_steps(rng, 6, 3);
    const auto out = combine({steps}, Eigen::MatrixXd::Ones(1, 6));
    for (std::size_t t = 0; t < 6; ++t) {
        EXPECT_TRUE(out.steps[t].mean == steps[t].mean);
        EXPECT_TRUE(out.steps[t].cov == steps[t].cov);
        EXPECT_FALSE(out.jittered[t]);
    }
}

TEST(Combine, SelfCombinationHalvesCovariance) {
    std::mt19937_64 rng(3);
    const auto steps = random_steps(rng, 8, 2);
    const auto out = combine({steps, steps}, Eigen::MatrixXd::Ones(2, 8));
    for (std::size_t t = 0; t < 8; ++t) {
        EXPECT_LT(max_abs(out.steps[t].cov - 0.5 * steps[t].cov), 1e-12 * max_abs(steps[t].cov));
        EXPECT_LT(max_abs(out.steps[t].mean - steps[t].mean), 1e-12 * std::max(1.0, max_abs(steps[t].mean)));
    }
}

TEST(Combine, ZeroActivationDropsOut) {
    std::mt19937_64 rng(4);
    const auto first = random_steps(rng, 4, 2);
    const auto second = random_steps(rng, 4, 2);
    Eigen::MatrixXd act(2, 4);
    act.row(0).setOnes();
    act.row(1).setZero();
    const auto out = combine({first, second}, act);
    for (std::size_t t = 0; t < 4; ++t) {
        EXPECT_LT(max_abs(out.steps[t].cov - first[t].cov), 1e-12 * max_abs(first[t].cov));
        EXPECT_LT(max_abs(out.steps[t].mean - first[t].mean), 1e-12 * std::max(1.0, max_abs(first[t].mean)));
    }
}

TEST(Combine, PrecisionIsActivationWeightedSum) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const std::vector<std::vector<Gaussian>> prims{random_steps(rng, 10, 3), random_steps(rng, 10, 3),
                                                   random_steps(rng, 10, 3)};
    Eigen::MatrixXd act(3, 10);
    for (Eigen::Index i = 0; i < act.size(); ++i) act.data()[i] = u(rng);
    const auto out = combine(prims, act);
    for (std::size_t t = 0; t < 10; ++t) {
        Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(3, 3);
        Eigen::VectorXd info = Eigen::VectorXd::Zero(3);
        for (std::size_t k = 0; k < 3; ++k) {
            const Eigen::MatrixXd p = prims[k][t].cov.inverse();
            prec += act(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) * p;
            info += act(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) * p * prims[k][t].mean;
        }
        const Eigen::MatrixXd got_prec = out.steps[t].cov.inverse();
        EXPECT_LT(max_abs(got_prec - prec), 1e-10 * std::max(1.0, max_abs(prec)));
        EXPECT_LT(max_abs(out.steps[t].mean - prec.ldlt().solve(info)), 1e-10 * std::max(1.0, max_abs(info)));
        EXPECT_TRUE(out.steps[t].cov == out.steps[t].cov.transpose());
        EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(out.steps[t].cov).info(), Eigen::Success);
    }
}

TEST(Combine, RejectsInvalidInput) {
    std::mt19937_64 rng(6);
    const auto a = random_steps(rng, 3, 2);
    const auto b = random_steps(rng, 3, 2);
    Eigen::MatrixXd act = Eigen::MatrixXd::Ones(2, 3);
    act(0, 1) = 0.0;
    act(1, 1) = 0.0;
    EXPECT_THROW(combine({a, b}, act), ValidationError);
    act.setConstant(1.5);
    EXPECT_THROW(combine({a, b}, act), ValidationError);
    EXPECT_THROW(combine({a, b}, Eigen::MatrixXd::Ones(2, 4)), DimensionError);
    auto singular = a;
    singular[0].cov.setZero();
    EXPECT_THROW(combine({singular, b}, Eigen::MatrixXd::Ones(2, 3)), NumericalError);
    EXPECT_THROW(combine({}, Eigen::MatrixXd::Ones(0, 3)), ValidationError);
}

TEST(Blend, EndpointsReproduceInputs) {
    std::mt19937_64 rng(7);
    const auto a = random_steps(rng, 5, 2);
    const auto b = random_steps(rng, 5, 2);
    const auto only_a = blend(a, b, Eigen::VectorXd::Ones(5));
    const auto only_b = blend(a, b, Eigen::VectorXd::Zero(5));
    for (std::size_t t = 0; t < 5; ++t) {
        EXPECT_LE(max_abs(only_a.steps[t].mean - a[t].mean), 1e-12);
        EXPECT_LE(max_abs(only_a.steps[t].cov - a[t].cov), 1e-12);
        EXPECT_LE(max_abs(only_b.steps[t].mean - b[t].mean), 1e-12);
        EXPECT_LE(max_abs(only_b.steps[t].cov - b[t].cov), 1e-12);
    }
}

TEST(Blend, EqualCovariancesAverageMeans) {
    std::mt19937_64 rng(8);
    auto a = random_steps(rng, 4, 2);
    auto b = random_steps(rng, 4, 2);
    for (std::size_t t = 0; t < 4; ++t) b[t].cov = a[t].cov;
    const auto out = blend(a, b, Eigen::VectorXd::Constant(4, 0.5));
    for (std::size_t t = 0; t < 4; ++t) {
        EXPECT_LT(max_abs(out.steps[t].mean - 0.5 * (a[t].mean + b[t].mean)), 1e-12);
        EXPECT_LT(max_abs(out.steps[t].cov - a[t].cov), 1e-12 * max_abs(a[t].cov));
    }
}

TEST(Blend, TransitionsBetweenInputs) {
    std::mt19937_64 rng(9);
    auto a = random_steps(rng, 11, 1);
    auto b = a;
    for (std::size_t t = 0; t < 11; ++t) {
        a[t].mean[0] = 0.0;
        b[t].mean[0] = 1.0;
    }
    Eigen::VectorXd act(11);
    for (Eigen::Index t = 0; t < 11; ++t) act[t] = 1.0 - static_cast<double>(t) / 10.0;
    const auto out = blend(a, b, act);
    for (std::size_t t = 1; t < 11; ++t) EXPECT_GT(out.steps[t].mean[0], out.steps[t - 1].mean[0]);
}
