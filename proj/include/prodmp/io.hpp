#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "prodmp/core_math.hpp"
#include "prodmp/distribution.hpp"
#include "prodmp/learning.hpp"
#include "prodmp/oracle.hpp"
#include "prodmp/prob_ops.hpp"

namespace prodmp::io {

/// Writes to `path.tmp` and renames over `path`; on failure nothing is left
/// behind. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Round-trippable decimal with 17 significant digits.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Basis bank containers

enum class BankFormat { Binary, Json };

/// Binary layout (little endian):
///   "PDMPBNK1", u32 version, u32 0,
///   f64 alpha, tau, alpha_x, u64 num_basis, f64 duration, grid_dt, basis_overlap,
///   u64 config hash, u64 rows, u64 cols,
///   f64 times[rows], pos[rows * cols], vel[rows * cols], comp[rows * 5],
///   u64 FNV-1a checksum of everything before it.
std::string serialize_bank(const BasisBank& bank, BankFormat format);
BasisBank deserialize_bank(std::string_view data);

void save_bank(const BasisBank& bank, const std::filesystem::path& path, BankFormat format = BankFormat::Binary);
BasisBank load_bank(const std::filesystem::path& path);

/// FNV-1a over the binary serialization.
std::uint64_t bank_checksum(const BasisBank& bank);
std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// Trajectory CSV: t,dof0_pos,dof0_vel,...; optional leading id column.

struct TrajectoryTable {
    std::vector<double> times;
    Eigen::MatrixXd pos;  // D x n
    std::optional<Eigen::MatrixXd> vel;
    std::optional<std::string> id_name;
    std::vector<std::size_t> ids;
};

std::string trajectory_csv(const TrajectoryTable& table);
TrajectoryTable parse_trajectory_csv(std::string_view text);

/// Demonstration from a trajectory CSV (velocities used when present).
Demonstration read_demonstration(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON dumps

std::string distribution_json(const TrajectoryDistribution& dist);
TrajectoryDistribution parse_distribution_json(std::string_view text);

std::string weights_json(const WeightsDistribution& wdist, std::size_t dofs, std::size_t columns);
WeightsDistribution parse_weights_json(std::string_view text);
WeightsDistribution load_weights(const std::filesystem::path& path);

std::string gaussians_json(std::span<const double> times, const CombineResult& result);

std::string bench_json(const std::vector<BenchReport>& reports);
std::string bench_table(const std::vector<BenchReport>& reports);

// ---------------------------------------------------------------------------
// key = value run configuration

struct RunConfig {
    DmpConfig::Params dmp;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_var;
    std::optional<double> ridge;
    std::optional<double> cov_floor;
    std::optional<double> rate;

    DmpConfig dmp_config() const { return DmpConfig::make(dmp); }
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys,
/// duplicate keys and malformed numbers are ValidationErrors; the DMP part
/// is validated through DmpConfig::make.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Minimal SVG line plots

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band_low;   // optional, same length as y
    std::vector<double> band_high;
};

std::string svg_plot(const std::string& title, const std::vector<PlotSeries>& series);

}  // namespace prodmp::io
