#include "prodmp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "fnv1a.hpp"
#include "json.hpp"
#include "prodmp/errors.hpp"

namespace prodmp::io {

using nlohmann::json;

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return ss.str();
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Bank

namespace {

constexpr char kMagic[8] = {'P', 'D', 'M', 'P', 'B', 'N', 'K', '1'};
constexpr std::uint32_t kBankVersion = 1;

class Writer {
public:
    template <class T>
    void put(const T& v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        buf_.append(p, sizeof(T));
    }
    void put_doubles(const double* data, std::size_t n) {
        buf_.append(reinterpret_cast<const char*>(data), n * sizeof(double));
    }
    void raw(const char* data, std::size_t n) { buf_.append(data, n); }
    std::string& str() { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    template <class T>
    T get() {
        T v;
        need(sizeof(T));
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void get_doubles(double* out, std::size_t n) {
        need(n * sizeof(double));
        std::memcpy(out, data_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
    }
    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw IoError("basis bank file is truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

std::string binary_bank(const BasisBank& bank) {
    const auto& c = bank.config();
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.put(kBankVersion);
    w.put(std::uint32_t{0});
    w.put(c.alpha());
    w.put(c.tau());
    w.put(c.alpha_x());
    w.put(static_cast<std::uint64_t>(c.num_basis()));
    w.put(c.duration());
    w.put(c.grid_dt());
    w.put(c.basis_overlap());
    w.put(c.hash());
    const auto rows = static_cast<std::uint64_t>(bank.size());
    const auto cols = static_cast<std::uint64_t>(bank.columns());
    w.put(rows);
    w.put(cols);
    w.put_doubles(bank.times().data(), bank.size());
    w.put_doubles(bank.pos_basis().data(), rows * cols);
    w.put_doubles(bank.vel_basis().data(), rows * cols);
    for (const auto& s : bank.complementary_samples()) {
        const double row[5] = {s.t, s.y1, s.y2, s.dy1, s.dy2};
        w.put_doubles(row, 5);
    }
    detail::Fnv1a h;
    h.add(w.str());
    w.put(h.value());
    return std::move(w.str());
}

DmpConfig config_from(double alpha, double tau, double alpha_x, std::uint64_t num_basis, double duration,
                      double grid_dt, double overlap) {
    DmpConfig::Params p;
    p.alpha = alpha;
    p.tau = tau;
    p.alpha_x = alpha_x;
    p.num_basis = static_cast<std::size_t>(num_basis);
    p.duration = duration;
    p.grid_dt = grid_dt;
    p.basis_overlap = overlap;
    return DmpConfig::make(p);
}

BasisBank parse_binary_bank(std::string_view data) {
    Reader r(data);
    char magic[8];
    for (char& ch : magic) ch = r.get<char>();
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw IoError("not a basis bank file (bad magic)");
    if (r.get<std::uint32_t>() != kBankVersion) throw IoError("unsupported basis bank version");
    r.get<std::uint32_t>();
    const double alpha = r.get<double>();
    const double tau = r.get<double>();
    const double alpha_x = r.get<double>();
    const auto num_basis = r.get<std::uint64_t>();
    const double duration = r.get<double>();
    const double grid_dt = r.get<double>();
    const double overlap = r.get<double>();
    const auto stored_hash = r.get<std::uint64_t>();
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();

    const DmpConfig config = config_from(alpha, tau, alpha_x, num_basis, duration, grid_dt, overlap);
    if (config.hash() != stored_hash) throw IoError("basis bank config hash does not match its parameters");
    if (rows != config.grid_steps() + 1 || cols != config.columns()) {
        throw IoError("basis bank dimensions do not match its config");
    }
    // Guard the allocation below against corrupt headers.
    const std::uint64_t payload = (rows + 2 * rows * cols + 5 * rows) * sizeof(double) + sizeof(std::uint64_t);
    if (payload > data.size()) throw IoError("basis bank file is truncated");

    std::vector<double> times(rows);
    r.get_doubles(times.data(), rows);
    RowMatrix pos(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    RowMatrix vel(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    r.get_doubles(pos.data(), rows * cols);
    r.get_doubles(vel.data(), rows * cols);
    std::vector<ComplementarySample> comp(rows);
    for (auto& s : comp) {
        double row[5];
        r.get_doubles(row, 5);
        s = {row[0], row[1], row[2], row[3], row[4]};
    }
    const std::size_t body = r.position();
    const auto checksum = r.get<std::uint64_t>();
    detail::Fnv1a h;
    h.add(data.substr(0, body));
    if (h.value() != checksum) throw IoError("basis bank checksum mismatch (file corrupted)");
    if (r.position() != data.size()) throw IoError("trailing bytes after basis bank");
    return BasisBank(config, std::move(times), std::move(pos), std::move(vel), std::move(comp));
}

json matrix_rows(const RowMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

RowMatrix rows_matrix(const json& rows, std::size_t n_rows, std::size_t n_cols) {
    if (!rows.is_array() || rows.size() != n_rows) throw IoError("basis matrix has the wrong number of rows");
    RowMatrix m(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != n_cols) throw IoError("basis matrix row has the wrong length");
        for (std::size_t j = 0; j < n_cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
    }
    return m;
}

std::string json_bank(const BasisBank& bank) {
    const auto& c = bank.config();
    json j;
    j["format"] = "prodmp-basis-bank";
    j["version"] = kBankVersion;
    j["config"] = {{"alpha", c.alpha()},
                   {"beta", c.beta()},
                   {"tau", c.tau()},
                   {"alpha_x", c.alpha_x()},
                   {"num_basis", c.num_basis()},
                   {"duration", c.duration()},
                   {"grid_dt", c.grid_dt()},
                   {"basis_overlap", c.basis_overlap()}};
    j["config_hash"] = hex64(c.hash());
    j["times"] = std::vector<double>(bank.times().begin(), bank.times().end());
    j["pos_basis"] = matrix_rows(bank.pos_basis());
    j["vel_basis"] = matrix_rows(bank.vel_basis());
    json comp = json::array();
    for (const auto& s : bank.complementary_samples()) comp.push_back({s.t, s.y1, s.y2, s.dy1, s.dy2});
    j["complementary"] = std::move(comp);
    return j.dump() + "\n";
}

BasisBank parse_json_bank(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "prodmp-basis-bank") throw IoError("not a basis bank JSON document");
        const auto& c = j.at("config");
        const DmpConfig config =
            config_from(c.at("alpha").get<double>(), c.at("tau").get<double>(), c.at("alpha_x").get<double>(),
                        c.at("num_basis").get<std::uint64_t>(), c.at("duration").get<double>(),
                        c.at("grid_dt").get<double>(), c.at("basis_overlap").get<double>());
        if (j.at("config_hash").get<std::string>() != hex64(config.hash())) {
            throw IoError("basis bank config hash does not match its parameters");
        }
        const std::size_t rows = config.grid_steps() + 1;
        auto times = j.at("times").get<std::vector<double>>();
        if (times.size() != rows) throw IoError("basis bank time grid has the wrong length");
        auto pos = rows_matrix(j.at("pos_basis"), rows, config.columns());
        auto vel = rows_matrix(j.at("vel_basis"), rows, config.columns());
        std::vector<ComplementarySample> comp;
        for (const auto& row : j.at("complementary")) {
            if (row.size() != 5) throw IoError("complementary sample must have 5 entries");
            comp.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(), row[3].get<double>(),
                            row[4].get<double>()});
        }
        return BasisBank(config, std::move(times), std::move(pos), std::move(vel), std::move(comp));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed basis bank JSON: ") + e.what());
    }
}

}  // namespace

std::string serialize_bank(const BasisBank& bank, BankFormat format) {
    return format == BankFormat::Binary ? binary_bank(bank) : json_bank(bank);
}

BasisBank deserialize_bank(std::string_view data) {
    if (data.size() >= sizeof kMagic && std::memcmp(data.data(), kMagic, sizeof kMagic) == 0) {
        return parse_binary_bank(data);
    }
    return parse_json_bank(data);
}

void save_bank(const BasisBank& bank, const std::filesystem::path& path, BankFormat format) {
    write_file_atomic(path, serialize_bank(bank, format));
}

BasisBank load_bank(const std::filesystem::path& path) { return deserialize_bank(read_file(path)); }

std::uint64_t bank_checksum(const BasisBank& bank) {
    detail::Fnv1a h;
    h.add(binary_bank(bank));
    return h.value();
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view s, const char* context) {
    s = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ValidationError(std::string(context) + ": cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::string trajectory_csv(const TrajectoryTable& table) {
    const Eigen::Index dofs = table.pos.rows();
    const auto n = table.times.size();
    if (static_cast<std::size_t>(table.pos.cols()) != n ||
        (table.vel && (table.vel->rows() != dofs || static_cast<std::size_t>(table.vel->cols()) != n)) ||
        (table.id_name && table.ids.size() != n)) {
        throw DimensionError("trajectory table columns disagree in length");
    }
    std::string out;
    if (table.id_name) out += *table.id_name + ",";
    out += "t";
    for (Eigen::Index d = 0; d < dofs; ++d) {
        out += ",dof" + std::to_string(d) + "_pos";
        if (table.vel) out += ",dof" + std::to_string(d) + "_vel";
    }
    out += "\n";
    for (std::size_t k = 0; k < n; ++k) {
        if (table.id_name) out += std::to_string(table.ids[k]) + ",";
        out += format_double(table.times[k]);
        const auto c = static_cast<Eigen::Index>(k);
        for (Eigen::Index d = 0; d < dofs; ++d) {
            out += "," + format_double(table.pos(d, c));
            if (table.vel) out += "," + format_double((*table.vel)(d, c));
        }
        out += "\n";
    }
    return out;
}

TrajectoryTable parse_trajectory_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw ValidationError("trajectory CSV is empty");

    const auto header = split(lines.front(), ',');
    int t_col = -1, id_col = -1;
    std::map<std::size_t, int> pos_cols, vel_cols;
    TrajectoryTable table;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto name = trim(header[i]);
        if (name == "t") {
            t_col = static_cast<int>(i);
        } else if (name == "sample_id" || name == "segment_id") {
            id_col = static_cast<int>(i);
            table.id_name = std::string(name);
        } else if (name.starts_with("dof") && (name.ends_with("_pos") || name.ends_with("_vel"))) {
            const auto digits = name.substr(3, name.size() - 7);
            std::size_t dof = 0;
            const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), dof);
            if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
                throw ValidationError("trajectory CSV: bad column name '" + std::string(name) + "'");
            }
            (name.ends_with("_pos") ? pos_cols : vel_cols)[dof] = static_cast<int>(i);
        } else {
            throw ValidationError("trajectory CSV: unknown column '" + std::string(name) + "'");
        }
    }
    if (t_col < 0 || pos_cols.empty()) throw ValidationError("trajectory CSV needs a 't' column and dof*_pos columns");
    const std::size_t dofs = pos_cols.size();
    if (pos_cols.rbegin()->first + 1 != dofs) throw ValidationError("trajectory CSV: DoF columns are not contiguous");
    const bool has_vel = !vel_cols.empty();
    if (has_vel && vel_cols.size() != dofs) throw ValidationError("trajectory CSV: velocity columns incomplete");

    const std::size_t n = lines.size() - 1;
    table.times.resize(n);
    table.pos.resize(static_cast<Eigen::Index>(dofs), static_cast<Eigen::Index>(n));
    if (has_vel) table.vel = Eigen::MatrixXd(static_cast<Eigen::Index>(dofs), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto cells = split(lines[k + 1], ',');
        if (cells.size() != header.size()) {
            throw ValidationError("trajectory CSV: row " + std::to_string(k + 1) + " has the wrong number of cells");
        }
        table.times[k] = parse_number(cells[static_cast<std::size_t>(t_col)], "trajectory CSV");
        if (id_col >= 0) {
            table.ids.push_back(static_cast<std::size_t>(parse_number(cells[static_cast<std::size_t>(id_col)], "id")));
        }
        const auto c = static_cast<Eigen::Index>(k);
        for (const auto& [dof, col] : pos_cols) {
            table.pos(static_cast<Eigen::Index>(dof), c) =
                parse_number(cells[static_cast<std::size_t>(col)], "trajectory CSV");
        }
        for (const auto& [dof, col] : vel_cols) {
            (*table.vel)(static_cast<Eigen::Index>(dof), c) =
                parse_number(cells[static_cast<std::size_t>(col)], "trajectory CSV");
        }
    }
    return table;
}

Demonstration read_demonstration(const std::filesystem::path& path) {
    auto table = parse_trajectory_csv(read_file(path));
    if (table.id_name) throw ValidationError("demonstration CSV must hold a single trajectory (no id column)");
    Demonstration demo;
    demo.times = std::move(table.times);
    demo.positions = std::move(table.pos);
    demo.velocities = std::move(table.vel);
    return demo;
}

// ---------------------------------------------------------------------------
// JSON dumps

namespace {

json lower_rows(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j <= i; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd read_lower(const json& rows, Eigen::Index n, bool symmetric) {
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
        throw ValidationError("lower-triangular matrix has the wrong number of rows");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != i + 1) {
            throw ValidationError("lower-triangular row " + std::to_string(i) + " has the wrong length");
        }
        for (Eigen::Index j = 0; j <= i; ++j) {
            m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
            if (symmetric) m(j, i) = m(i, j);
        }
    }
    return m;
}

template <class F>
auto with_json_errors(const char* what, F&& body) {
    try {
        return body();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

std::string distribution_json(const TrajectoryDistribution& dist) {
    json j;
    j["format"] = "prodmp-trajectory-distribution";
    json index = json::array();
    for (const auto& ix : dist.index) index.push_back({{"t", ix.time}, {"dof", ix.dof}});
    j["index"] = std::move(index);
    j["mean"] = std::vector<double>(dist.mean.data(), dist.mean.data() + dist.mean.size());
    j["cov_lower"] = lower_rows(dist.cov);
    j["noise_var"] = dist.noise_var;
    return j.dump() + "\n";
}

TrajectoryDistribution parse_distribution_json(std::string_view text) {
    return with_json_errors("distribution JSON", [&] {
        const json j = json::parse(text);
        TrajectoryDistribution dist;
        for (const auto& ix : j.at("index")) {
            dist.index.push_back({ix.at("t").get<double>(), ix.at("dof").get<std::size_t>()});
        }
        const auto mean = j.at("mean").get<std::vector<double>>();
        if (mean.size() != dist.index.size()) throw DimensionError("distribution mean length differs from its index");
        dist.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        dist.cov = read_lower(j.at("cov_lower"), dist.mean.size(), true);
        dist.noise_var = j.value("noise_var", 0.0);
        return dist;
    });
}

std::string weights_json(const WeightsDistribution& wdist, std::size_t dofs, std::size_t columns) {
    json j;
    j["format"] = "prodmp-weights-distribution";
    j["dofs"] = dofs;
    j["columns_per_dof"] = columns;
    j["mean"] = std::vector<double>(wdist.mean().data(), wdist.mean().data() + wdist.mean().size());
    j["chol_lower"] = lower_rows(wdist.chol());
    return j.dump() + "\n";
}

WeightsDistribution parse_weights_json(std::string_view text) {
    return with_json_errors("weights JSON", [&] {
        const json j = json::parse(text);
        const auto mean = j.at("mean").get<std::vector<double>>();
        Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        if (j.contains("dofs") && j.contains("columns_per_dof") &&
            j["dofs"].get<std::size_t>() * j["columns_per_dof"].get<std::size_t>() != mean.size()) {
            throw DimensionError("weights JSON: mean length differs from dofs x columns_per_dof");
        }
        Eigen::MatrixXd chol = read_lower(j.at("chol_lower"), m.size(), false);
        return WeightsDistribution(std::move(m), std::move(chol));
    });
}

WeightsDistribution load_weights(const std::filesystem::path& path) { return parse_weights_json(read_file(path)); }

std::string gaussians_json(std::span<const double> times, const CombineResult& result) {
    if (times.size() != result.steps.size()) throw DimensionError("one time stamp per Gaussian is required");
    json steps = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto& g = result.steps[k];
        steps.push_back({{"t", times[k]},
                         {"mean", std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size())},
                         {"cov_lower", lower_rows(g.cov)},
                         {"jittered", static_cast<bool>(result.jittered[k])}});
    }
    json j;
    j["format"] = "prodmp-gaussian-steps";
    j["steps"] = std::move(steps);
    return j.dump() + "\n";
}

std::string bench_json(const std::vector<BenchReport>& reports) {
    json rows = json::array();
    for (const auto& r : reports) {
        rows.push_back({{"dofs", r.scenario.dofs},
                        {"duration_s", r.scenario.duration},
                        {"rate_hz", r.scenario.rate},
                        {"parameters", r.scenario.dofs * (r.scenario.num_basis + 1)},
                        {"points", r.points},
                        {"repetitions", r.scenario.repetitions},
                        {"bc_recompute", r.with_bc_recompute},
                        {"oracle_seconds", r.oracle_seconds},
                        {"basis_seconds", r.basis_seconds},
                        {"speedup", r.speedup},
                        {"note", r.note}});
    }
    json j;
    j["format"] = "prodmp-bench-report";
    j["reports"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string bench_table(const std::vector<BenchReport>& reports) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %6s %8s %8s %7s %16s %16s %10s\n", "setting", "dofs", "dur[s]", "rate",
                  "params", "euler[s]", "basis[s]", "speed-up");
    os << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-10s %6zu %8.3g %8.4g %7zu %16.6e %16.6e %10.1f\n",
                      r.with_bc_recompute ? "FP + BC" : "FP", r.scenario.dofs, r.scenario.duration, r.scenario.rate,
                      r.scenario.dofs * (r.scenario.num_basis + 1), r.oracle_seconds, r.basis_seconds, r.speedup);
        os << line;
    }
    if (!reports.empty()) os << "(" << reports.front().note << ")\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Run config

RunConfig parse_run_config(std::string_view text) {
    RunConfig rc;
    std::map<std::string, std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::optional<double> beta;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (seen.contains(key)) throw ValidationError("config key '" + key + "' given twice");
        seen.emplace(key, std::string(value));
        const std::string ctx = "config key '" + key + "'";
        auto number = [&] { return parse_number(value, ctx.c_str()); };
        auto count = [&]() -> std::uint64_t {
            const double v = number();
            if (v < 0 || v != std::floor(v) || v > 9.0e15) throw ValidationError(ctx + " must be a non-negative integer");
            return static_cast<std::uint64_t>(v);
        };
        if (key == "alpha") rc.dmp.alpha = number();
        else if (key == "beta") beta = number();
        else if (key == "tau") rc.dmp.tau = number();
        else if (key == "alpha_x") rc.dmp.alpha_x = number();
        else if (key == "num_basis") rc.dmp.num_basis = static_cast<std::size_t>(count());
        else if (key == "duration") rc.dmp.duration = number();
        else if (key == "grid_dt") rc.dmp.grid_dt = number();
        else if (key == "basis_overlap") rc.dmp.basis_overlap = number();
        else if (key == "seed") rc.seed = count();
        else if (key == "noise_var") rc.noise_var = number();
        else if (key == "ridge") rc.ridge = number();
        else if (key == "cov_floor") rc.cov_floor = number();
        else if (key == "rate") rc.rate = number();
        else throw ValidationError("unknown config key '" + key + "'");
    }
    if (beta && *beta != rc.dmp.alpha / 4.0) {
        throw ValidationError("beta is fixed to alpha / 4 (critical damping); remove it or set it to " +
                              format_double(rc.dmp.alpha / 4.0));
    }
    if (rc.noise_var && (!(*rc.noise_var >= 0.0) || !std::isfinite(*rc.noise_var))) {
        throw ValidationError("noise_var must be finite and >= 0");
    }
    if (rc.ridge && (!(*rc.ridge >= 0.0) || !std::isfinite(*rc.ridge))) throw ValidationError("ridge must be >= 0");
    if (rc.cov_floor && (!(*rc.cov_floor >= 0.0) || !std::isfinite(*rc.cov_floor))) {
        throw ValidationError("cov_floor must be >= 0");
    }
    if (rc.rate && (!(*rc.rate > 0.0) || !std::isfinite(*rc.rate))) throw ValidationError("rate must be > 0");
    DmpConfig::make(rc.dmp);
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

// ---------------------------------------------------------------------------
// SVG

std::string svg_plot(const std::string& title, const std::vector<PlotSeries>& series) {
    constexpr double kWidth = 800, kHeight = 480, kMargin = 50;
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& s : series) {
        for (double x : s.x) x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x);
        for (double y : s.y) y_lo = std::min(y_lo, y), y_hi = std::max(y_hi, y);
        for (double y : s.band_low) y_lo = std::min(y_lo, y);
        for (double y : s.band_high) y_hi = std::max(y_hi, y);
    }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
    auto px = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
    auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kMargin << "\" y=\"25\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
    os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
       << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << kMargin << "\" y=\"" << kHeight - 15 << "\" font-size=\"11\">" << fmt(x_lo) << "</text>\n";
    os << "<text x=\"" << kWidth - kMargin - 30 << "\" y=\"" << kHeight - 15 << "\" font-size=\"11\">" << fmt(x_hi)
       << "</text>\n";
    os << "<text x=\"5\" y=\"" << kHeight - kMargin << "\" font-size=\"11\">" << fmt(y_lo) << "</text>\n";
    os << "<text x=\"5\" y=\"" << kMargin + 10 << "\" font-size=\"11\">" << fmt(y_hi) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        if (!s.band_low.empty() && s.band_low.size() == s.x.size() && s.band_high.size() == s.x.size()) {
            os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) os << fmt(px(s.x[i])) << "," << fmt(py(s.band_high[i])) << " ";
            for (std::size_t i = s.x.size(); i-- > 0;) os << fmt(px(s.x[i])) << "," << fmt(py(s.band_low[i])) << " ";
            os << "\"/>\n";
        }
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) os << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << kWidth - kMargin - 150 << "\" y=\"" << kMargin + 15 + 15 * static_cast<double>(k)
           << "\" font-size=\"12\" fill=\"" << color << "\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace prodmp::io
