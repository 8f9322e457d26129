#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <random>

#include "prodmp/errors.hpp"
#include "prodmp/io.hpp"
#include "test_support.hpp"

using namespace prodmp;
using namespace prodmp::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "prodmp_test_io";
    fs::create_directories(dir);
    return dir / name;
}

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(BankIo, BinaryRoundTripIsBitExact) {
    const auto bank = precompute_basis(small_config(4, 1.0, 0.01));
    const auto copy = io::deserialize_bank(io::serialize_bank(bank, io::BankFormat::Binary));
    EXPECT_TRUE(copy == bank);
    EXPECT_EQ(io::bank_checksum(copy), io::bank_checksum(bank));
    EXPECT_EQ(copy.config().hash(), bank.config().hash());
}

TEST(BankIo, JsonRoundTripIsExact) {
    const auto bank = precompute_basis(small_config(3, 0.5, 0.01));
    const auto copy = io::deserialize_bank(io::serialize_bank(bank, io::BankFormat::Json));
    EXPECT_TRUE(copy == bank);
}

TEST(BankIo, CorruptedBinaryIsRejected) {
    const auto bank = precompute_basis(small_config(3, 0.5, 0.01));
    auto data = io::serialize_bank(bank, io::BankFormat::Binary);
    data[data.size() / 2] ^= 0x01;
    EXPECT_THROW(io::deserialize_bank(data), IoError);
    EXPECT_THROW(io::deserialize_bank(data.substr(0, data.size() - 3)), IoError);
}

TEST(BankIo, TamperedJsonHashIsRejected) {
    const auto bank = precompute_basis(small_config(3, 0.5, 0.01));
    auto text = io::serialize_bank(bank, io::BankFormat::Json);
    const auto hash = io::hex64(bank.config().hash());
    text.replace(text.find(hash), hash.size(), std::string(hash.size(), '0'));
    EXPECT_THROW(io::deserialize_bank(text), Error);
}

TEST(BankIo, SaveAndLoad) {
    const auto bank = precompute_basis(small_config(3, 0.5, 0.01));
    const auto path = scratch("bank.bin");
    io::save_bank(bank, path);
    EXPECT_TRUE(io::load_bank(path) == bank);
    EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
    EXPECT_THROW(io::load_bank(scratch("does_not_exist.bin")), IoError);
}

TEST(AtomicWrite, FailureLeavesNothingBehind) {
    const auto path = scratch("no_such_dir") / "out.txt";
    EXPECT_THROW(io::write_file_atomic(path, "x"), IoError);
    EXPECT_FALSE(fs::exists(path));
}

TEST(FormatDouble, RoundTrips) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(std::stod(io::format_double(v)), v);
    }
}

TEST(TrajectoryCsv, RoundTripWithVelocitiesAndIds) {
    std::mt19937_64 rng(4);
    io::TrajectoryTable t;
    t.times = {0.0, 0.1, 0.2};
    t.pos = Eigen::MatrixXd::Random(2, 3) * 1e3;
    t.vel = Eigen::MatrixXd::Random(2, 3);
    t.id_name = "sample_id";
    t.ids = {0, 0, 1};
    const auto text = io::trajectory_csv(t);
    EXPECT_EQ(text.substr(0, text.find('\n')), "sample_id,t,dof0_pos,dof0_vel,dof1_pos,dof1_vel");
    const auto back = io::parse_trajectory_csv(text);
    EXPECT_EQ(back.times, t.times);
    EXPECT_TRUE(bit_equal(back.pos, t.pos));
    ASSERT_TRUE(back.vel.has_value());
    EXPECT_TRUE(bit_equal(*back.vel, *t.vel));
    EXPECT_EQ(back.ids, t.ids);
}

TEST(TrajectoryCsv, MalformedInputIsRejected) {
    EXPECT_THROW(io::parse_trajectory_csv("t,dof0_pos\n0,abc\n"), ValidationError);
    EXPECT_THROW(io::parse_trajectory_csv("t,dof0_pos\n0,1,2\n"), Error);
    EXPECT_THROW(io::parse_trajectory_csv("time,dof0_pos\n0,1\n"), Error);
}

TEST(DistributionJson, RoundTripIsExact) {
    std::mt19937_64 rng(5);
    const auto& bank = standard_bank();
    const auto wdist = random_wdist(rng, 52, 10.0, 1.0);
    const BoundaryCondition bc{0.0, Eigen::Vector2d(0.3, -0.2), Eigen::Vector2d(1.0, 0.0)};
    const std::vector<double> times{0.5, 1.0, 2.5};
    const auto dist = trajectory_distribution(wdist, bc, times, bank);
    const auto back = io::parse_distribution_json(io::distribution_json(dist));
    EXPECT_EQ(back.index, dist.index);
    EXPECT_TRUE(bit_equal(back.mean, dist.mean));
    EXPECT_TRUE(bit_equal(back.cov, dist.cov));
    EXPECT_EQ(back.noise_var, dist.noise_var);
}

TEST(WeightsJson, RoundTripIsExactAndChecksShape) {
    std::mt19937_64 rng(6);
    const auto wdist = random_wdist(rng, 52, 10.0, 1.0);
    const auto text = io::weights_json(wdist, 2, 26);
    const auto back = io::parse_weights_json(text);
    EXPECT_TRUE(bit_equal(back.mean(), wdist.mean()));
    EXPECT_TRUE(bit_equal(back.chol(), wdist.chol()));

    auto wrong = text;
    wrong.replace(wrong.find("\"dofs\":2"), 8, "\"dofs\":3");
    EXPECT_THROW(io::parse_weights_json(wrong), Error);
}

TEST(RunConfig, ParsesAndValidates) {
    const auto rc = io::parse_run_config("alpha = 25\n# comment\ntau = 3 # trailing\nnum_basis = 25\nseed = 7\n");
    EXPECT_EQ(rc.dmp.alpha, 25.0);
    EXPECT_EQ(rc.dmp.tau, 3.0);
    EXPECT_EQ(rc.seed, 7u);
    EXPECT_NO_THROW(io::parse_run_config("alpha = 20\nbeta = 5\n"));
    EXPECT_THROW(io::parse_run_config("alpha = 20\nbeta = 4\n"), ValidationError);
    EXPECT_THROW(io::parse_run_config("gamma = 1\n"), ValidationError);
    EXPECT_THROW(io::parse_run_config("alpha = 1\nalpha = 2\n"), ValidationError);
    EXPECT_THROW(io::parse_run_config("alpha = x\n"), ValidationError);
    EXPECT_THROW(io::parse_run_config("alpha\n"), ValidationError);
    EXPECT_THROW(io::parse_run_config("tau = -1\n"), ValidationError);
    EXPECT_THROW(io::parse_run_config("num_basis = 2.5\n"), ValidationError);
    EXPECT_THROW(io::parse_run_config("ridge = -1\n"), ValidationError);
}

TEST(Svg, ContainsBandAndLine) {
    io::PlotSeries s{"dof0", {0, 1, 2}, {0, 1, 0}, {-1, 0, -1}, {1, 2, 1}};
    const auto svg = io::svg_plot("t", {s});
    EXPECT_NE(svg.find("<polygon"), std::string::npos);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
    EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}
