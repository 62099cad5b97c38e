#include <gtest/gtest.h>

#include <filesystem>
#include <charconv>
#include <fstream>

#include "fim/config.hpp"
#include "fim/io.hpp"

namespace {

namespace fs = std::filesystem;

fs::path test_dir(const std::string& name) {
    const fs::path dir = fs::path(::testing::TempDir()) / name;
    fs::create_directories(dir);
    return dir;
}

nlohmann::json minimal_config() {
    return nlohmann::json{
        {"schema_version", 1},
        {"seed", 42},
        {"model", {{"type", "gbm"}, {"s0", 100.0}, {"drift", 0.0}, {"vol", 0.2}}},
        {"grid", {{"horizon", 1.0}, {"step", 0.25}, {"mpor", 10.0 / 365.0}}},
        {"portfolio",
         nlohmann::json::array(
             {{{"type", "forward"}, {"strike", 100.0}, {"maturity", 2.0}, {"notional", 1.0}}})}};
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
    EXPECT_EQ(fim::format_double(0.25), "0.25");
    EXPECT_EQ(fim::format_double(0.0), "0");
    for (double v : {10.0 / 365.0, 2.3263478740408408, 1e-17, -3.75, 1234567.891}) {
        const std::string s = fim::format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        EXPECT_EQ(back, v) << s;
    }
}

TEST(ProfileCsvTest, WriteReadRoundTripIsExact) {
    const fs::path path = test_dir("profile_csv") / "profile.csv";
    fim::ProfileResult profile;
    profile.times = {0.0, 0.25, 0.5};
    profile.im_mean = {1.1, 2.3263478740408408, 0.0};
    profile.im_stderr = {0.01, 0.002, 0.0};
    fim::write_profile_csv(path, profile);

    const fim::ProfileResult back = fim::read_profile_csv(path);
    EXPECT_EQ(back.times, profile.times);
    EXPECT_EQ(back.im_mean, profile.im_mean);
    EXPECT_EQ(back.im_stderr, profile.im_stderr);
}

TEST(ProfileCsvTest, RejectsWrongSchemaLine) {
    const fs::path path = test_dir("profile_bad") / "bad.csv";
    std::ofstream(path) << "# something.else.v1\ntime,im_mean,im_stderr\n0,1,0\n";
    EXPECT_THROW(fim::read_profile_csv(path), fim::io_error);
    EXPECT_THROW(fim::read_profile_csv(test_dir("profile_bad") / "missing.csv"), fim::io_error);
}

TEST(SurfaceCsvTest, EmitsSchemaHeaderAndAllNodes) {
    const fs::path path = test_dir("surface_csv") / "surface.csv";
    fim::ImSurface surface;
    surface.n_outer = 2;
    surface.n_inner = 100;
    surface.quantile_p = 0.99;
    surface.obs_times = {0.0, 0.5};
    surface.im = {1.0, 2.0, 3.0, 4.0};
    surface.profile = {2.0, 3.0};
    fim::write_surface_csv(path, surface);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# fim.surface.v1");
    std::getline(in, line);
    EXPECT_EQ(line, "path,time,im");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 4u);
}

TEST(ConfigTest, MinimalConfigParses) {
    const fim::RunConfig cfg = fim::parse_config(minimal_config());
    EXPECT_EQ(cfg.seed, 42u);
    EXPECT_EQ(cfg.grid.obs_times.size(), 4u);
    EXPECT_TRUE(fim::is_gbm(cfg.model));
    EXPECT_EQ(cfg.netting_set.instruments.size(), 1u);
    EXPECT_DOUBLE_EQ(cfg.quantile_p, 0.99);
    // scaler defaults to Normal at the configured quantile
    EXPECT_NEAR(fim::quantile_multiplier(cfg.scaler), 2.3263478740408408, 1e-12);
}

TEST(ConfigTest, MporNotBelowStepNamesTheField) {
    auto doc = minimal_config();
    doc["grid"]["mpor"] = 0.25;
    try {
        fim::parse_config(doc);
        FAIL() << "expected config_error";
    } catch (const fim::config_error& e) {
        EXPECT_NE(std::string(e.what()).find("grid.mpor"), std::string::npos);
    }
}

TEST(ConfigTest, MissingAndIllTypedFieldsAreNamed) {
    auto doc = minimal_config();
    doc.erase("model");
    try {
        fim::parse_config(doc);
        FAIL() << "expected config_error";
    } catch (const fim::config_error& e) {
        EXPECT_NE(std::string(e.what()).find("model"), std::string::npos);
    }

    doc = minimal_config();
    doc["model"]["vol"] = "high";
    EXPECT_THROW(fim::parse_config(doc), fim::config_error);

    doc = minimal_config();
    doc["schema_version"] = 99;
    EXPECT_THROW(fim::parse_config(doc), fim::config_error);
}

TEST(ConfigTest, InstrumentModelCompatibilityIsChecked) {
    auto doc = minimal_config();
    doc["portfolio"].push_back({{"type", "zcb_ou"}, {"maturity", 5.0}});
    try {
        fim::parse_config(doc);
        FAIL() << "expected config_error";
    } catch (const fim::config_error& e) {
        EXPECT_NE(std::string(e.what()).find("portfolio[1]"), std::string::npos);
    }
}

TEST(ConfigTest, MaturityMustCoverGridHorizon) {
    auto doc = minimal_config();
    doc["portfolio"][0]["maturity"] = 0.5;
    EXPECT_THROW(fim::parse_config(doc), fim::config_error);
}

TEST(ConfigTest, ScalerValidationIsSurfacedAtLoad) {
    auto doc = minimal_config();
    doc["scaler"] = {{"type", "student_t"}, {"dof", 2.0}};
    EXPECT_THROW(fim::parse_config(doc), fim::config_error);
    doc["scaler"] = {{"type", "student_t"}, {"dof", 5.0}};
    const fim::RunConfig cfg = fim::parse_config(doc);
    EXPECT_NEAR(fim::quantile_multiplier(cfg.scaler), 2.6064635693843234, 1e-12);
}

TEST(ConfigTest, ApproxAndOracleBlocksParse) {
    auto doc = minimal_config();
    doc["oracle"] = {{"n_outer", 100}, {"n_inner", 5000}};
    doc["approx"] = {{"method", "kernel"},
                     {"n_paths", 4000},
                     {"kernel", {{"order", 1}, {"bandwidth", 2.5}}}};
    const fim::RunConfig cfg = fim::parse_config(doc);
    EXPECT_EQ(cfg.oracle.n_outer, 100u);
    EXPECT_EQ(cfg.approx.method, fim::ApproxMethod::kernel);
    EXPECT_EQ(cfg.approx.kernel.order, 1);
    ASSERT_TRUE(cfg.approx.kernel.spec.bandwidth.has_value());
    EXPECT_DOUBLE_EQ(*cfg.approx.kernel.spec.bandwidth, 2.5);

    doc["oracle"]["n_inner"] = 50;
    EXPECT_THROW(fim::parse_config(doc), fim::config_error);
}

TEST(ConfigTest, LoadConfigReportsParseErrors) {
    const fs::path dir = test_dir("config_files");
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << "{ not json";
    EXPECT_THROW(fim::load_config(bad), fim::config_error);
    EXPECT_THROW(fim::load_config(dir / "nope.json"), fim::config_error);

    const fs::path good = dir / "good.json";
    std::ofstream(good) << minimal_config().dump();
    EXPECT_EQ(fim::load_config(good).seed, 42u);
}

TEST(MomentReportJsonTest, SerializesVerdictAndMoments) {
    fim::MomentReport report;
    report.moments = {fim::MomentEstimate{1, 0.5, 0.01}, fim::MomentEstimate{2, 1.2, 0.02},
                      fim::MomentEstimate{4, 3.1, 0.03}};
    report.flagged = false;
    const nlohmann::json doc = fim::to_json(report);
    EXPECT_EQ(doc["verdict"], "pass");
    EXPECT_EQ(doc["moments"].size(), 3u);
    EXPECT_EQ(doc["moments"][2]["order"], 4);
}

} // namespace
