// fim: forward initial-margin experiments.
//
// Subcommands run the nested-MC oracle, the regression approximators, the
// oracle-vs-approximator comparison, the square-integrability diagnostics and
// the MVA integral, all driven by one JSON config. Outputs are plot-ready CSV
// and JSON with deterministic formatting: a fixed config reproduces every file
// byte for byte, for any --threads value.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fim/config.hpp"
#include "fim/io.hpp"
#include "fim/mva.hpp"
#include "fim/oracle.hpp"
#include "fim/pipeline.hpp"

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitNumericError = 2;
constexpr int kExitIoError = 3;

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "Run configuration (JSON)")->required();
    cmd->add_option("-o,--out", args.out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "Seed override");
    cmd->add_option("--threads", args.threads, "Worker pool size, 0 = hardware (overrides config)");
}

fim::RunConfig load(const CommonArgs& args) {
    fim::RunConfig cfg = fim::load_config(args.config_path);
    if (args.out_dir) cfg.output_dir = *args.out_dir;
    if (args.seed) cfg.seed = *args.seed;
    if (args.threads) cfg.threads = *args.threads;
    std::filesystem::create_directories(cfg.output_dir);
    return cfg;
}

std::string method_name(fim::ApproxMethod method) {
    switch (method) {
    case fim::ApproxMethod::poly: return "poly";
    case fim::ApproxMethod::kernel: return "kernel";
    case fim::ApproxMethod::nn: return "nn";
    }
    return "unknown";
}

fim::ApproxMethod parse_method(const std::string& name) {
    if (name == "poly") return fim::ApproxMethod::poly;
    if (name == "kernel") return fim::ApproxMethod::kernel;
    if (name == "nn") return fim::ApproxMethod::nn;
    throw fim::config_error("approx.method: must be 'poly', 'kernel' or 'nn'");
}

void run_oracle_cmd(const fim::RunConfig& cfg) {
    const fim::ImSurface surface =
        fim::brute_force_im(cfg.model, cfg.netting_set, cfg.grid, cfg.oracle.n_outer,
                            cfg.oracle.n_inner, cfg.quantile_p, cfg.seed, cfg.discount_rate,
                            cfg.threads);
    fim::write_surface_csv(cfg.output_dir / "surface.csv", surface);
    fim::write_profile_csv(cfg.output_dir / "oracle_profile.csv",
                           fim::profile_from_surface(surface));
    std::cout << "oracle: " << cfg.oracle.n_outer << " outer x " << cfg.oracle.n_inner
              << " inner paths -> " << (cfg.output_dir / "oracle_profile.csv").string() << "\n";
}

void run_approx_cmd(const fim::RunConfig& cfg) {
    const fim::ApproxRunResult run =
        fim::approx_im_profile(cfg.model, cfg.netting_set, cfg.grid, cfg.approx, cfg.scaler,
                               cfg.seed, cfg.discount_rate, cfg.threads);
    const std::string method = method_name(cfg.approx.method);
    fim::write_profile_csv(cfg.output_dir / ("approx_profile_" + method + ".csv"), run.profile);

    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : run.fits) {
        steps.push_back(fim::fit_artifact_json(step));
        if (step.diagnostics.train_log)
            fim::write_train_log_csv(cfg.output_dir /
                                         ("nn_train_t" + std::to_string(step.t_index) + ".csv"),
                                     *step.diagnostics.train_log);
    }
    fim::write_json(cfg.output_dir / (method + "_fits.json"),
                    {{"schema", "fim." + method + "_fits.v1"}, {"steps", steps}});
    std::cout << "approx[" << method << "]: " << cfg.approx.n_paths << " paths -> "
              << (cfg.output_dir / ("approx_profile_" + method + ".csv")).string() << "\n";
}

void run_compare_cmd(const fim::RunConfig& cfg) {
    run_oracle_cmd(cfg);
    run_approx_cmd(cfg);

    const std::string method = method_name(cfg.approx.method);
    // consume exactly what the oracle/approx commands emitted
    const fim::ProfileResult oracle = fim::read_profile_csv(cfg.output_dir / "oracle_profile.csv");
    const fim::ProfileResult approx =
        fim::read_profile_csv(cfg.output_dir / ("approx_profile_" + method + ".csv"));
    const fim::ComparisonReport report = fim::compare_profiles(oracle, approx);

    fim::write_comparison_csv(cfg.output_dir / "comparison.csv", report);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows)
        rows.push_back({{"time", row.time},
                        {"im_oracle", row.im_oracle},
                        {"im_approx", row.im_approx},
                        {"rel_err", row.rel_err}});
    fim::write_json(cfg.output_dir / "summary.json", {{"schema", "fim.summary.v1"},
                                                      {"method", method},
                                                      {"rmse", report.rmse},
                                                      {"max_rel_err", report.max_rel_err},
                                                      {"rows", rows}});
    std::cout << "compare[" << method << "]: rmse " << report.rmse << ", max rel err "
              << report.max_rel_err << " -> " << (cfg.output_dir / "summary.json").string() << "\n";
}

void run_diagnose_cmd(const fim::RunConfig& cfg) {
    const auto steps = fim::diagnose_moments(cfg.model, cfg.netting_set, cfg.grid,
                                             cfg.diagnose_n_paths, cfg.diagnose_n_boot, cfg.seed,
                                             cfg.discount_rate, cfg.threads);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& step : steps) {
        nlohmann::json doc = fim::to_json(step.report);
        doc["t"] = step.t;
        out.push_back(doc);
    }
    fim::write_json(cfg.output_dir / "moments.json",
                    {{"schema", "fim.moments.v1"},
                     {"n_boot", cfg.diagnose_n_boot},
                     {"n_paths", cfg.diagnose_n_paths},
                     {"steps", out}});
    std::cout << "diagnose: " << steps.size() << " time steps -> "
              << (cfg.output_dir / "moments.json").string() << "\n";
}

void run_mva_cmd(const fim::RunConfig& cfg, const std::string& profile_path) {
    const std::filesystem::path path =
        profile_path.empty() ? cfg.output_dir / "oracle_profile.csv"
                             : std::filesystem::path(profile_path);
    const fim::ProfileResult profile = fim::read_profile_csv(path);
    const double mva = fim::mva_deterministic(profile.im_mean, profile.times, cfg.mva);
    fim::write_json(cfg.output_dir / "mva.json", {{"schema", "fim.mva.v1"},
                                                  {"profile", path.string()},
                                                  {"inputs", fim::to_json(cfg.mva)},
                                                  {"carry_spread", cfg.mva.carry_spread()},
                                                  {"decay_rate", cfg.mva.decay_rate()},
                                                  {"mva", mva}});
    std::cout << "mva: " << mva << " -> " << (cfg.output_dir / "mva.json").string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"forward initial margin: nested-MC oracle vs regression approximators"};
    app.require_subcommand(1);

    CommonArgs oracle_args, approx_args, compare_args, diagnose_args, mva_args;
    std::string approx_method_override, compare_method_override, mva_profile;

    CLI::App* cmd_oracle = app.add_subcommand("oracle", "Brute-force nested-MC IM surface");
    add_common(cmd_oracle, oracle_args);

    CLI::App* cmd_approx = app.add_subcommand("approx", "Regression IM profile");
    add_common(cmd_approx, approx_args);
    cmd_approx->add_option("-m,--method", approx_method_override, "poly|kernel|nn");

    CLI::App* cmd_compare = app.add_subcommand("compare", "Oracle vs approximator report");
    add_common(cmd_compare, compare_args);
    cmd_compare->add_option("-m,--method", compare_method_override, "poly|kernel|nn");

    CLI::App* cmd_diagnose = app.add_subcommand("diagnose", "Moment diagnostics per time step");
    add_common(cmd_diagnose, diagnose_args);

    CLI::App* cmd_mva = app.add_subcommand("mva", "MVA from an IM profile CSV");
    add_common(cmd_mva, mva_args);
    cmd_mva->add_option("-p,--profile", mva_profile, "Profile CSV (default: <out>/oracle_profile.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_oracle->parsed()) {
            run_oracle_cmd(load(oracle_args));
        } else if (cmd_approx->parsed()) {
            fim::RunConfig cfg = load(approx_args);
            if (!approx_method_override.empty())
                cfg.approx.method = parse_method(approx_method_override);
            run_approx_cmd(cfg);
        } else if (cmd_compare->parsed()) {
            fim::RunConfig cfg = load(compare_args);
            if (!compare_method_override.empty())
                cfg.approx.method = parse_method(compare_method_override);
            run_compare_cmd(cfg);
        } else if (cmd_diagnose->parsed()) {
            run_diagnose_cmd(load(diagnose_args));
        } else if (cmd_mva->parsed()) {
            run_mva_cmd(load(mva_args), mva_profile);
        }
    } catch (const fim::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const fim::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumericError;
    }
    return 0;
}
