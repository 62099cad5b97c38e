#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fim/approximator.hpp"
#include "fim/common.hpp"
#include "fim/mva.hpp"
#include "fim/oracle.hpp"
#include "fim/pipeline.hpp"
#include "fim/regression.hpp"

namespace fim {

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Shortest round-trip decimal representation; keeps every emitted file
// byte-stable across runs and thread counts.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline constexpr const char* kSurfaceSchema = "# fim.surface.v1";
inline constexpr const char* kProfileSchema = "# fim.profile.v1";
inline constexpr const char* kComparisonSchema = "# fim.comparison.v1";

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary); // LF line endings on every platform
    if (!out) throw io_error("cannot open for writing: " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path.string());
    return in;
}

inline double parse_double(const std::string& field, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw io_error("malformed number '" + field + "' in " + where);
    return v;
}

} // namespace detail

inline void write_surface_csv(const std::filesystem::path& path, const ImSurface& surface) {
    auto out = detail::open_out(path);
    out << kSurfaceSchema << "\npath,time,im\n";
    for (std::size_t p = 0; p < surface.n_outer; ++p)
        for (std::size_t k = 0; k < surface.obs_times.size(); ++k)
            out << p << ',' << format_double(surface.obs_times[k]) << ','
                << format_double(surface(p, k)) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

inline void write_profile_csv(const std::filesystem::path& path, const ProfileResult& profile) {
    auto out = detail::open_out(path);
    out << kProfileSchema << "\ntime,im_mean,im_stderr\n";
    for (std::size_t k = 0; k < profile.times.size(); ++k)
        out << format_double(profile.times[k]) << ',' << format_double(profile.im_mean[k]) << ','
            << format_double(profile.im_stderr[k]) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

inline ProfileResult read_profile_csv(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kProfileSchema)
        throw io_error("unexpected profile schema in " + path.string());
    if (!std::getline(in, line) || line != "time,im_mean,im_stderr")
        throw io_error("unexpected profile header in " + path.string());

    ProfileResult profile;
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        std::vector<double> cells;
        while (std::getline(row, field, ','))
            cells.push_back(detail::parse_double(field, path.string() + ":" + std::to_string(line_no)));
        if (cells.size() != 3) throw io_error("expected 3 columns in " + path.string());
        profile.times.push_back(cells[0]);
        profile.im_mean.push_back(cells[1]);
        profile.im_stderr.push_back(cells[2]);
    }
    if (profile.times.empty()) throw io_error("empty profile: " + path.string());
    return profile;
}

inline void write_comparison_csv(const std::filesystem::path& path, const ComparisonReport& report) {
    auto out = detail::open_out(path);
    out << kComparisonSchema << "\ntime,im_oracle,im_approx,rel_err\n";
    for (const auto& row : report.rows)
        out << format_double(row.time) << ',' << format_double(row.im_oracle) << ','
            << format_double(row.im_approx) << ',' << format_double(row.rel_err) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

// nlohmann::json keeps keys sorted, so dumps are deterministic.
inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    auto out = detail::open_out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

inline nlohmann::json to_json(const MomentReport& report) {
    nlohmann::json moments = nlohmann::json::array();
    for (const auto& m : report.moments) {
        moments.push_back({{"order", m.order},
                           {"estimate", m.estimate},
                           {"bootstrap_cv", std::isfinite(m.bootstrap_cv)
                                                ? nlohmann::json(m.bootstrap_cv)
                                                : nlohmann::json("inf")}});
    }
    return {{"moments", moments},
            {"cv_threshold", report.cv_threshold},
            {"verdict", report.verdict()}};
}

inline nlohmann::json to_json(const MvaInputs& inp) {
    return {{"r", inp.r},
            {"lambda_b", inp.lambda_b},
            {"lambda_c", inp.lambda_c},
            {"lambda_fund", inp.lambda_fund},
            {"im_spread", inp.im_spread},
            {"recovery", inp.recovery}};
}

// Per-step fit artifacts for audit. Poly dumps coefficients, kernel its
// resolved bandwidth, the network its full parameter stack.
inline nlohmann::json fit_artifact_json(const StepFit& step) {
    nlohmann::json doc{{"t_index", step.t_index}, {"t", step.t}};
    if (step.diagnostics.constant_fallback) doc["constant_fallback"] = true;

    if (const auto* c = std::get_if<ConstantFit>(&step.approx)) {
        doc["model"] = "constant";
        doc["value"] = c->value;
    } else if (const auto* poly = std::get_if<PolyFit>(&step.approx)) {
        doc["model"] = "poly";
        doc["degree"] = poly->degree;
        doc["coeffs"] = poly->coeffs;
        doc["x_mean"] = poly->x_mean;
        doc["x_scale"] = poly->x_scale;
        doc["train_min"] = poly->train_min;
        doc["train_max"] = poly->train_max;
        doc["n_extrapolated"] = step.n_extrapolated;
    } else if (const auto* local = std::get_if<LocalFit>(&step.approx)) {
        doc["model"] = "kernel";
        doc["order"] = local->order;
        doc["bandwidth"] = step.diagnostics.bandwidth;
        doc["n_train"] = local->x.size();
        doc["n_degraded"] = step.diagnostics.degraded_queries.size();
    } else if (const auto* nn = std::get_if<MlpModel>(&step.approx)) {
        doc["model"] = "nn";
        doc["widths"] = nn->spec.widths;
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& layer : nn->params.layers)
            layers.push_back({{"n_in", layer.n_in},
                              {"n_out", layer.n_out},
                              {"w", layer.w},
                              {"b", layer.b}});
        doc["layers"] = layers;
        doc["x_std"] = {{"mean", nn->x_std.mean}, {"scale", nn->x_std.scale}};
        doc["y_std"] = {{"mean", nn->y_std.mean}, {"scale", nn->y_std.scale}};
        if (step.diagnostics.train_log) {
            doc["epochs_run"] = step.diagnostics.train_log->stopped_epoch;
            doc["final_mse"] = step.diagnostics.train_log->epoch_mse.back();
        }
    }
    return doc;
}

inline void write_train_log_csv(const std::filesystem::path& path, const TrainLog& log) {
    auto out = detail::open_out(path);
    out << "epoch,mse\n";
    for (std::size_t e = 0; e < log.epoch_mse.size(); ++e)
        out << e << ',' << format_double(log.epoch_mse[e]) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

} // namespace fim
