#include <optional>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "prodmp/boundary.hpp"
#include "prodmp/config.hpp"
#include "prodmp/core_math.hpp"
#include "prodmp/distribution.hpp"
#include "prodmp/errors.hpp"
#include "prodmp/io.hpp"
#include "prodmp/learning.hpp"
#include "prodmp/oracle.hpp"
#include "prodmp/prob_ops.hpp"
#include "prodmp/replan.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace prodmp;

namespace {

BoundaryCondition make_bc(double t_b, const Eigen::VectorXd& y_b, const Eigen::VectorXd& dy_b) {
    return BoundaryCondition{t_b, y_b, dy_b};
}

std::vector<Gaussian> to_gaussians(const std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>& steps) {
    std::vector<Gaussian> out;
    out.reserve(steps.size());
    for (const auto& [m, c] : steps) out.push_back({m, c});
    return out;
}

py::list from_result(const CombineResult& r) {
    py::list out;
    for (const auto& g : r.steps) out.append(py::make_tuple(g.mean, g.cov));
    return out;
}

}  // namespace

PYBIND11_MODULE(_prodmp, m) {
    m.doc() = "Boundary-aware probabilistic movement primitives";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

    py::class_<DmpConfig>(m, "DmpConfig")
        .def(py::init([](double alpha, double tau, double alpha_x, std::size_t num_basis, double duration,
                         double grid_dt, double basis_overlap) {
                 return DmpConfig::make({alpha, tau, alpha_x, num_basis, duration, grid_dt, basis_overlap});
             }),
             "alpha"_a = 25.0, "tau"_a = 3.0, "alpha_x"_a = 2.0, "num_basis"_a = 25, "duration"_a = 3.0,
             "grid_dt"_a = 0.0, "basis_overlap"_a = 0.3)
        .def_static("standard", &DmpConfig::standard)
        .def_property_readonly("alpha", &DmpConfig::alpha)
        .def_property_readonly("beta", &DmpConfig::beta)
        .def_property_readonly("tau", &DmpConfig::tau)
        .def_property_readonly("alpha_x", &DmpConfig::alpha_x)
        .def_property_readonly("num_basis", &DmpConfig::num_basis)
        .def_property_readonly("duration", &DmpConfig::duration)
        .def_property_readonly("grid_dt", &DmpConfig::grid_dt)
        .def_property_readonly("columns", &DmpConfig::columns)
        .def("hash", &DmpConfig::hash)
        .def("__eq__", [](const DmpConfig& a, const DmpConfig& b) { return a == b; })
        .def("__repr__", &DmpConfig::describe);

    py::class_<BasisBank>(m, "BasisBank")
        .def_property_readonly("config", &BasisBank::config)
        .def_property_readonly("times",
                               [](const BasisBank& b) { return std::vector<double>(b.times().begin(), b.times().end()); })
        .def_property_readonly("pos_basis", &BasisBank::pos_basis)
        .def_property_readonly("vel_basis", &BasisBank::vel_basis)
        .def_property_readonly("columns", &BasisBank::columns)
        .def("__len__", &BasisBank::size)
        .def("save", [](const BasisBank& b, const std::filesystem::path& p, bool json) {
                 io::save_bank(b, p, json ? io::BankFormat::Json : io::BankFormat::Binary);
             }, "path"_a, "json"_a = false)
        .def_static("load", &io::load_bank, "path"_a)
        .def("checksum", &io::bank_checksum);

    m.def("precompute_basis", &precompute_basis, "config"_a);

    m.def("evaluate_position",
          [](const Eigen::VectorXd& w, double t_b, const Eigen::VectorXd& y_b, const Eigen::VectorXd& dy_b,
             const std::vector<double>& times, const BasisBank& bank) {
              return evaluate_position(w, make_bc(t_b, y_b, dy_b), times, bank);
          },
          "w"_a, "t_b"_a, "y_b"_a, "dy_b"_a, "times"_a, "bank"_a, "D x len(times) positions");
    m.def("evaluate_velocity",
          [](const Eigen::VectorXd& w, double t_b, const Eigen::VectorXd& y_b, const Eigen::VectorXd& dy_b,
             const std::vector<double>& times, const BasisBank& bank) {
              return evaluate_velocity(w, make_bc(t_b, y_b, dy_b), times, bank);
          },
          "w"_a, "t_b"_a, "y_b"_a, "dy_b"_a, "times"_a, "bank"_a);

    py::class_<WeightsDistribution>(m, "WeightsDistribution")
        .def(py::init<Eigen::VectorXd, Eigen::MatrixXd>(), "mean"_a, "chol"_a)
        .def_static("from_covariance", &WeightsDistribution::from_covariance, "mean"_a, "cov"_a)
        .def_property_readonly("mean", &WeightsDistribution::mean)
        .def_property_readonly("chol", &WeightsDistribution::chol)
        .def_property_readonly("cov", &WeightsDistribution::covariance)
        .def_property_readonly("dim", &WeightsDistribution::dim)
        .def("to_json", &io::weights_json, "dofs"_a, "columns"_a)
        .def_static("from_json", [](const std::string& s) { return io::parse_weights_json(s); }, "text"_a);

    py::class_<TrajectoryDistribution>(m, "TrajectoryDistribution")
        .def_readonly("mean", &TrajectoryDistribution::mean)
        .def_readonly("cov", &TrajectoryDistribution::cov)
        .def_readonly("noise_var", &TrajectoryDistribution::noise_var)
        .def_property_readonly("index",
                               [](const TrajectoryDistribution& d) {
                                   py::list out;
                                   for (const auto& ix : d.index) out.append(py::make_tuple(ix.time, ix.dof));
                                   return out;
                               })
        .def("marginals", [](const TrajectoryDistribution& d) {
            py::list out;
            for (const auto& g : per_time_marginals(d)) out.append(py::make_tuple(g.mean, g.cov));
            return out;
        });

    m.def("trajectory_distribution",
          [](const WeightsDistribution& wdist, double t_b, const Eigen::VectorXd& y_b, const Eigen::VectorXd& dy_b,
             const std::vector<double>& times, const BasisBank& bank, double noise_var) {
              return trajectory_distribution(wdist, make_bc(t_b, y_b, dy_b), times, bank, noise_var);
          },
          "wdist"_a, "t_b"_a, "y_b"_a, "dy_b"_a, "times"_a, "bank"_a, "noise_var"_a = kDefaultNoiseVar);

    m.def("sample_trajectories",
          [](const WeightsDistribution& wdist, double t_b, const Eigen::VectorXd& y_b, const Eigen::VectorXd& dy_b,
             const std::vector<double>& times, const BasisBank& bank, std::size_t count, std::uint64_t seed) {
              return sample_trajectories(wdist, make_bc(t_b, y_b, dy_b), times, bank, count, seed);
          },
          "wdist"_a, "t_b"_a, "y_b"_a, "dy_b"_a, "times"_a, "bank"_a, "count"_a, "seed"_a);

    m.def("gaussian_nll", &gaussian_nll, "value"_a, "mean"_a, "cov"_a);

    m.def("pair_nll",
          [](const std::vector<double>& horizon, const Eigen::MatrixXd& positions, std::size_t count,
             std::uint64_t seed, const WeightsDistribution& wdist, double t_b, const Eigen::VectorXd& y_b,
             const Eigen::VectorXd& dy_b, const BasisBank& bank, double noise_var) {
              const auto batch = make_pair_batch(sample_time_pairs(horizon, count, seed), positions);
              return pair_nll(batch, wdist, make_bc(t_b, y_b, dy_b), bank, noise_var);
          },
          "horizon"_a, "positions"_a, "count"_a, "seed"_a, "wdist"_a, "t_b"_a, "y_b"_a, "dy_b"_a, "bank"_a,
          "noise_var"_a = kDefaultNoiseVar,
          "Mean pair NLL of `count` random time pairs drawn from the horizon (positions: D x len(horizon))");

    m.def("fit_weights",
          [](const std::vector<double>& times, const Eigen::MatrixXd& positions,
             std::optional<Eigen::MatrixXd> velocities, const BasisBank& bank, std::optional<double> ridge) {
              Demonstration demo{times, positions, std::move(velocities), std::nullopt};
              return fit_weights(demo, bank, ridge);
          },
          "times"_a, "positions"_a, "velocities"_a = py::none(), "bank"_a, "ridge"_a = py::none());

    m.def("fit_distribution",
          [](const std::vector<double>& times, const std::vector<Eigen::MatrixXd>& demos, const BasisBank& bank,
             std::optional<double> ridge, double cov_floor) {
              std::vector<Demonstration> list;
              for (const auto& p : demos) list.push_back({times, p, std::nullopt, std::nullopt});
              return fit_distribution(list, bank, ridge, cov_floor);
          },
          "times"_a, "demos"_a, "bank"_a, "ridge"_a = py::none(), "cov_floor"_a = kDefaultCovFloor);

    m.def("bayesian_aggregate",
          [](const Eigen::VectorXd& mean0, const Eigen::VectorXd& var0,
             const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& observations) {
              std::vector<LatentGaussian> obs;
              for (const auto& [r, v] : observations) obs.push_back({r, v});
              const auto post = bayesian_aggregate({mean0, var0}, obs);
              return py::make_tuple(post.mean, post.var);
          },
          "mean0"_a, "var0"_a, "observations"_a);

    m.def("combine",
          [](const std::vector<std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>>& primitives,
             const Eigen::MatrixXd& activations) {
              std::vector<std::vector<Gaussian>> prims;
              for (const auto& p : primitives) prims.push_back(to_gaussians(p));
              return from_result(combine(prims, activations));
          },
          "primitives"_a, "activations"_a);
    m.def("blend",
          [](const std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>& first,
             const std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>& second,
             const Eigen::VectorXd& activation) {
              return from_result(blend(to_gaussians(first), to_gaussians(second), activation));
          },
          "first"_a, "second"_a, "activation"_a);

    m.def("run_chain",
          [](double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& dy0,
             const std::vector<std::pair<double, WeightsDistribution>>& segments, const BasisBank& bank,
             double end_time, double rate, bool global_time, bool sample, std::uint64_t seed, bool stale_boundary) {
              std::vector<ScheduledSegment> sched;
              for (const auto& [t, w] : segments) sched.push_back({t, w});
              ChainOptions opt;
              opt.mode = global_time ? TimeMode::Global : TimeMode::Local;
              opt.rate = rate;
              opt.end_time = end_time;
              opt.sample = sample;
              opt.seed = seed;
              opt.stale_boundary = stale_boundary;
              const auto trace = run_chain({t0, y0, dy0}, sched, bank, opt);
              py::dict out;
              out["times"] = trace.times;
              out["pos"] = trace.pos;
              out["vel"] = trace.vel;
              out["segment_id"] = trace.segment_id;
              py::list jumps;
              for (const auto& j : trace.jumps) jumps.append(py::make_tuple(j.time, j.position, j.velocity));
              out["jumps"] = jumps;
              return out;
          },
          "t0"_a, "y0"_a, "dy0"_a, "segments"_a, "bank"_a, "end_time"_a, "rate"_a = 1000.0,
          "global_time"_a = false, "sample"_a = false, "seed"_a = 0, "stale_boundary"_a = false);

    m.def("smoothness_metric", &smoothness_metric, "positions"_a, "dt"_a);

    m.def("integrate_dmp",
          [](const Eigen::VectorXd& w, const Eigen::VectorXd& y0, const Eigen::VectorXd& dy0, const DmpConfig& config,
             const std::string& method, double dt) {
              IntegratorSpec spec;
              if (method == "rk4") spec.method = IntegratorMethod::Rk4;
              else if (method == "euler") spec.method = IntegratorMethod::ExplicitEuler;
              else throw ValidationError("integrator method must be 'rk4' or 'euler'");
              spec.dt = dt;
              const auto traj = integrate_dmp(w, y0, dy0, config, spec);
              return py::make_tuple(traj.times, traj.pos, traj.vel);
          },
          "w"_a, "y0"_a, "dy0"_a, "config"_a, "method"_a = "rk4", "dt"_a = 1e-4);

    m.def("run_benchmark",
          [](bool with_bc_recompute, std::size_t repetitions, std::size_t warmup, std::uint64_t seed) {
              BenchScenario s;
              s.repetitions = repetitions;
              s.warmup = warmup;
              s.seed = seed;
              const auto r = run_benchmark(s, precompute_basis(s.bank_config()), with_bc_recompute);
              py::dict out;
              out["oracle_seconds"] = r.oracle_seconds;
              out["basis_seconds"] = r.basis_seconds;
              out["speedup"] = r.speedup;
              out["points"] = r.points;
              out["bc_recompute"] = r.with_bc_recompute;
              return out;
          },
          "with_bc_recompute"_a = false, "repetitions"_a = 51, "warmup"_a = 5, "seed"_a = 1);
}
