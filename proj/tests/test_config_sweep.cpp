#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace adiabatic;
using namespace adiabatic::testing;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("adiabat_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST(Config, MinimalConfigFillsDefaults)
{
    const auto cfg = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": 10})");
    EXPECT_EQ(cfg.K, 2);
    EXPECT_EQ(cfg.oracle.rtol, 1e-10);
    EXPECT_EQ(cfg.oracle.slices, 100000u);
    EXPECT_EQ(cfg.grid.policy, GridPolicy::oscillation_resolving);
    EXPECT_EQ(cfg.durations, std::vector<double>{1.0});
    EXPECT_EQ(cfg.model.dim, 2);
    EXPECT_EQ(cfg.axis(), SweepAxis::none);
    EXPECT_EQ(cfg.canonical["K"], 2);
    EXPECT_EQ(cfg.canonical["grid"]["points_per_period"], 128.0);
}

TEST(Config, ValidationErrorsNameTheField)
{
    auto field_of = [](const std::string& text) { return error_of([&] { parse_config(text); }).field(); };
    EXPECT_EQ(field_of(R"({"model": {"family": "rotated_frame"}, "lambda": 10, "K": 9})"), "K");
    EXPECT_EQ(field_of(R"({"model": {"family": "rotated_frame"}, "lambda": [10, 20], "duration": [1, 2]})"),
              "duration");
    EXPECT_EQ(field_of(R"({"model": {"family": "rotated_frame"}, "lambda": []})"), "lambda");
    EXPECT_EQ(field_of(R"({"model": {"family": "rotated_frame"}, "lambda": 10, "extra": 1})"), "extra");
    EXPECT_EQ(field_of(R"({"model": {"family": "rotated_frame", "params": {"gap": 1}}, "lambda": 10})"),
              "model.params.gap");
    EXPECT_EQ(field_of(R"({"model": {"family": "landau_zener_window"}, "lambda": 10,
                           "reports": {"berry_check": true}})"),
              "reports.berry_check");
    EXPECT_EQ(field_of(R"({"model": {"family": "rotated_frame"}, "lambda": 10, "K": 1,
                           "reports": {"secular_probe": true}})"),
              "reports.secular_probe");
    EXPECT_EQ(field_of(R"({"model": {"family": "rotated_frame"}, "lambda": -1})"), "lambda");
}

TEST(Config, UnknownFamily)
{
    EXPECT_EQ(error_kind_of([] { parse_config(R"({"model": {"family": "ising"}, "lambda": 10})"); }),
              ErrorKind::UnknownFamily);
}

TEST(Config, ParseErrorCarriesLineAndColumn)
{
    const auto e = error_of([] { parse_config("{\n  \"lambda\": 10,\n  oops\n}"); });
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
}

TEST(Config, MissingFileIsIoError)
{
    EXPECT_EQ(error_kind_of([] { load_config("/nonexistent/adiabat.json"); }), ErrorKind::IoError);
}

TEST(Config, HashIsStableAndSensitive)
{
    const auto a = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": 10})");
    const auto b = parse_config(R"({"lambda": 10, "model": {"family": "rotated_frame"}, "K": 2})");
    const auto c = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": 11})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(c));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, MatrixParamsAcceptComplexEntries)
{
    const auto cfg = parse_config(R"({
        "model": {"family": "user_matrix_polynomial", "dim": 2,
                  "params": {"coefficients": [[[0, 0], [0, 1]], [[0, [0, -0.5]], [[0, 0.5], 0]]]}},
        "lambda": 10})");
    ASSERT_EQ(cfg.model.params.coefficients.size(), 2u);
    EXPECT_EQ(cfg.model.params.coefficients[1](0, 1), cx_double(0, -0.5));
}

TEST(Run, RotatedFramePoint)
{
    const auto cfg = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": 10, "K": 1})");
    const auto r = run_single(cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_NEAR(std::abs(r.eigenbasis_terms[1][1]), 0.191785, 1e-6);
    EXPECT_GT(r.bound_margin, 0.0);
    EXPECT_LE(r.oracle.state_residual, 1e-6);
}

TEST(Run, ConstantPointIsExact)
{
    const auto cfg = parse_config(R"({"model": {"family": "constant"}, "lambda": 10, "K": 3})");
    const auto r = run_single(cfg);
    ASSERT_TRUE(r.ok());
    for(double res : r.truncation_residuals)
        EXPECT_LE(res, 1e-10);
    for(int k = 1; k <= 3; ++k)
        for(auto z : r.eigenbasis_terms[static_cast<std::size_t>(k)])
            EXPECT_EQ(std::abs(z), 0.0);
}

TEST(Run, SubGapLandauZenerFailsInFrameStage)
{
    const auto cfg = parse_config(R"({"model": {"family": "landau_zener_window", "params": {"gap": 1e-5}},
                                      "lambda": 10})");
    const auto e = error_of([&] { run_single(cfg); });
    EXPECT_EQ(e.kind(), ErrorKind::GapCollapse);
    EXPECT_EQ(e.stage(), "frame");
}

TEST(Run, BerryPhaseReported)
{
    const auto cfg = parse_config(R"({"model": {"family": "rotating_spin"}, "lambda": 500,
                                      "duration": 6.283185307179586, "K": 1,
                                      "reports": {"berry_check": true}})");
    const auto r = run_single(cfg);
    ASSERT_TRUE(r.geometric_phase.has_value());
    EXPECT_NEAR(*r.geometric_phase, -pi / 2.0, 0.02);
}

TEST(Run, SweepConfigRejected)
{
    const auto cfg = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": [10, 20]})");
    EXPECT_EQ(error_kind_of([&] { run_single(cfg); }), ErrorKind::ValidationError);
}

TEST(Sweep, FailingPointIsIsolated)
{
    auto cfg = parse_config(R"({"model": {"family": "landau_zener_window"}, "lambda": [20, 40, 2000],
                                "grid": {"max_nodes": 60000}, "oracle": {"slices": 20000}})");
    const auto s = run_sweep(cfg, 2);
    ASSERT_EQ(s.points.size(), 3u);
    EXPECT_EQ(s.failures, 1u);
    EXPECT_TRUE(s.points[0].ok());
    EXPECT_TRUE(s.points[1].ok());
    ASSERT_FALSE(s.points[2].ok());
    EXPECT_EQ(s.points[2].error->kind, ErrorKind::GridTooCoarse);
    EXPECT_EQ(s.points[2].error->stage, "grid");

    const auto lone = run_single(parse_config(R"({"model": {"family": "landau_zener_window"}, "lambda": 20,
                                                 "oracle": {"slices": 20000}})"));
    EXPECT_EQ(s.points[0].eigenbasis_terms, lone.eigenbasis_terms);
}

TEST(Sweep, PointsSortedAndFitAttached)
{
    const auto cfg = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": [400, 50, 100, 200],
                                      "oracle": {"slices": 20000}})");
    const auto s = run_sweep(cfg, 3);
    for(std::size_t i = 1; i < s.points.size(); ++i)
        EXPECT_LT(s.points[i - 1].lambda, s.points[i].lambda);
    ASSERT_TRUE(s.first_order.has_value());
    ASSERT_TRUE(s.first_order->fit.has_value());
    EXPECT_NEAR(s.first_order->fit->exponent, -1.0, 0.3);
}

TEST(Emit, FilesRowsAndDeterminism)
{
    const auto cfg = parse_config(R"({"model": {"family": "landau_zener_window"},
                                      "lambda": [50, 75, 100, 150, 200, 300], "K": 2,
                                      "oracle": {"slices": 20000}})");
    const auto dir = scratch_dir("emit");
    const auto files = emit(run_sweep(cfg, 2), cfg, dir / "a");
    ASSERT_EQ(files.size(), 3u);
    for(const auto& f : files)
        EXPECT_TRUE(std::filesystem::exists(f));
    const std::string csv = slurp(dir / "a" / "amplitudes.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6 * 2 * 3);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,duration,level,order,re,im,modulus,phase");

    emit(run_sweep(cfg, 1), cfg, dir / "b");
    EXPECT_EQ(csv, slurp(dir / "b" / "amplitudes.csv"));
    EXPECT_EQ(slurp(dir / "a" / "summary.json"), slurp(dir / "b" / "summary.json"));

    const auto manifest = json::parse(slurp(dir / "a" / "manifest.json"));
    EXPECT_EQ(manifest["config_hash"], config_hash(cfg));
    EXPECT_EQ(manifest["grid_sizes"].size(), 6u);
    // the stored config alone reproduces the run
    EXPECT_EQ(config_hash(config_from_json(manifest["config"])), config_hash(cfg));
    std::filesystem::remove_all(dir);
}

TEST(Emit, FormatSelection)
{
    const auto cfg = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": 10, "K": 1})");
    SweepResult s;
    s.points.push_back(run_single(cfg));
    const auto dir = scratch_dir("formats");
    const auto files = emit(s, cfg, dir, {true, false});
    EXPECT_EQ(files.size(), 2u);
    EXPECT_FALSE(std::filesystem::exists(dir / "summary.json"));
    std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritableDirectoryIsIoError)
{
    const auto cfg = parse_config(R"({"model": {"family": "rotated_frame"}, "lambda": 10, "K": 1})");
    SweepResult s;
    s.points.push_back(run_single(cfg));
    EXPECT_EQ(error_kind_of([&] { emit(s, cfg, "/proc/adiabat_cannot_write"); }), ErrorKind::IoError);
}
