#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "fim/approximator.hpp"
#include "fim/model.hpp"
#include "fim/mva.hpp"
#include "fim/portfolio.hpp"
#include "fim/regression.hpp"
#include "fim/time_grid.hpp"

namespace fim {

// Raised on malformed or inconsistent run configuration; the message names the
// offending field.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct OracleSizes {
    std::size_t n_outer = 1000;
    std::size_t n_inner = 1000;
};

struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::filesystem::path output_dir = "out";
    ModelSpec model;
    TimeGrid grid;
    NettingSet netting_set;
    double discount_rate = 0.0;
    double quantile_p = 0.99;
    QuantileScaler scaler = NormalScaler{0.99};
    OracleSizes oracle;
    ApproxSettings approx;
    MvaInputs mva;
    std::size_t diagnose_n_boot = 200;
    std::size_t diagnose_n_paths = 10000;
};

namespace detail {

using nlohmann::json;

inline const json& field(const json& doc, const std::string& key, const std::string& where) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw config_error(where + key + ": missing required field");
    return *it;
}

template <typename T>
T get(const json& doc, const std::string& key, const std::string& where) {
    try {
        return field(doc, key, where).get<T>();
    } catch (const json::exception&) {
        throw config_error(where + key + ": wrong type");
    }
}

template <typename T>
T get_or(const json& doc, const std::string& key, const std::string& where, T fallback) {
    if (!doc.contains(key)) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(where + key + ": wrong type");
    }
}

inline ModelSpec parse_model(const json& doc) {
    const auto type = get<std::string>(doc, "type", "model.");
    if (type == "gbm") {
        GbmParams gbm;
        gbm.s0 = get<double>(doc, "s0", "model.");
        gbm.drift = get_or(doc, "drift", "model.", 0.0);
        gbm.vol = get<double>(doc, "vol", "model.");
        return gbm;
    }
    if (type == "ou") {
        OuParams ou;
        ou.x0 = get<double>(doc, "x0", "model.");
        ou.kappa = get<double>(doc, "kappa", "model.");
        ou.theta = get<double>(doc, "theta", "model.");
        ou.vol = get<double>(doc, "vol", "model.");
        return ou;
    }
    throw config_error("model.type: must be 'gbm' or 'ou'");
}

inline Instrument parse_instrument(const json& doc, const std::string& where) {
    const auto type = get<std::string>(doc, "type", where);
    if (type == "forward") {
        ForwardContract fwd;
        fwd.strike = get<double>(doc, "strike", where);
        fwd.maturity = get<double>(doc, "maturity", where);
        fwd.notional = get_or(doc, "notional", where, 1.0);
        return fwd;
    }
    if (type == "call") {
        EuropeanCall call;
        call.strike = get<double>(doc, "strike", where);
        call.maturity = get<double>(doc, "maturity", where);
        call.pricing_vol = get<double>(doc, "pricing_vol", where);
        call.notional = get_or(doc, "notional", where, 1.0);
        return call;
    }
    if (type == "zcb_ou") {
        ZeroCouponBondOu zcb;
        zcb.maturity = get<double>(doc, "maturity", where);
        zcb.notional = get_or(doc, "notional", where, 1.0);
        return zcb;
    }
    throw config_error(where + "type: must be 'forward', 'call' or 'zcb_ou'");
}

inline QuantileScaler parse_scaler(const json& doc, double default_p) {
    const auto type = get_or<std::string>(doc, "type", "scaler.", "normal");
    const double p = get_or(doc, "p", "scaler.", default_p);
    if (type == "normal") return NormalScaler{p};
    if (type == "student_t") {
        StudentTScaler st;
        st.p = p;
        st.dof = get<double>(doc, "dof", "scaler.");
        return st;
    }
    throw config_error("scaler.type: must be 'normal' or 'student_t'");
}

inline ApproxSettings parse_approx(const json& doc) {
    ApproxSettings settings;
    const auto method = get_or<std::string>(doc, "method", "approx.", "poly");
    if (method == "poly")
        settings.method = ApproxMethod::poly;
    else if (method == "kernel")
        settings.method = ApproxMethod::kernel;
    else if (method == "nn")
        settings.method = ApproxMethod::nn;
    else
        throw config_error("approx.method: must be 'poly', 'kernel' or 'nn'");
    settings.n_paths = get_or<std::size_t>(doc, "n_paths", "approx.", 10000);

    if (doc.contains("poly")) {
        const json& p = doc.at("poly");
        settings.poly.degree = get_or<std::size_t>(p, "degree", "approx.poly.", 2);
        settings.poly.ridge = get_or(p, "ridge", "approx.poly.", 0.0);
        if (settings.poly.degree > 6)
            throw config_error("approx.poly.degree: supported range is 0..6");
    }
    if (doc.contains("kernel")) {
        const json& k = doc.at("kernel");
        const auto kind = get_or<std::string>(k, "kind", "approx.kernel.", "gaussian");
        if (kind != "gaussian")
            throw config_error("approx.kernel.kind: only 'gaussian' is supported");
        if (k.contains("bandwidth") && !k.at("bandwidth").is_null()) {
            settings.kernel.spec.rule = KernelSpec::Rule::explicit_h;
            settings.kernel.spec.bandwidth = get<double>(k, "bandwidth", "approx.kernel.");
        } else {
            const auto rule = get_or<std::string>(k, "rule", "approx.kernel.", "silverman");
            if (rule != "silverman")
                throw config_error("approx.kernel.rule: must be 'silverman' (or give a bandwidth)");
            settings.kernel.spec.rule = KernelSpec::Rule::silverman;
        }
        settings.kernel.spec.squared_distance =
            get_or(k, "squared_distance", "approx.kernel.", true);
        settings.kernel.order = get_or(k, "order", "approx.kernel.", 0);
        if (settings.kernel.order != 0 && settings.kernel.order != 1)
            throw config_error("approx.kernel.order: must be 0 or 1");
    }
    if (doc.contains("nn")) {
        const json& nn = doc.at("nn");
        settings.nn.hidden = get_or(nn, "hidden", "approx.nn.", std::vector<std::size_t>{16, 16});
        if (settings.nn.hidden.empty()) throw config_error("approx.nn.hidden: must be non-empty");
        settings.nn.train.epochs = get_or<std::size_t>(nn, "epochs", "approx.nn.", 500);
        settings.nn.train.batch_size = get_or<std::size_t>(nn, "batch_size", "approx.nn.", 256);
        settings.nn.train.learning_rate = get_or(nn, "learning_rate", "approx.nn.", 1e-3);
        const auto opt = get_or<std::string>(nn, "optimizer", "approx.nn.", "adam");
        if (opt == "adam")
            settings.nn.train.adam = true;
        else if (opt == "sgd")
            settings.nn.train.adam = false;
        else
            throw config_error("approx.nn.optimizer: must be 'adam' or 'sgd'");
        settings.nn.train.standardize_inputs =
            get_or(nn, "standardize_inputs", "approx.nn.", true);
        settings.nn.train.standardize_targets =
            get_or(nn, "standardize_targets", "approx.nn.", true);
        settings.nn.train.patience = get_or<std::size_t>(nn, "patience", "approx.nn.", 50);
    }
    return settings;
}

inline MvaInputs parse_mva(const json& doc) {
    MvaInputs inp;
    inp.r = get_or(doc, "r", "mva.", 0.0);
    inp.lambda_b = get_or(doc, "lambda_b", "mva.", 0.0);
    inp.lambda_c = get_or(doc, "lambda_c", "mva.", 0.0);
    inp.lambda_fund = get_or(doc, "lambda_fund", "mva.", 0.0);
    inp.im_spread = get_or(doc, "im_spread", "mva.", 0.0);
    inp.recovery = get_or(doc, "recovery", "mva.", 0.0);
    return inp;
}

} // namespace detail

// Parses and cross-validates a run configuration. Every module precondition
// that is checkable from static inputs is checked here so the CLI fails fast
// with the field name.
inline RunConfig parse_config(const nlohmann::json& doc) {
    using detail::get;
    using detail::get_or;

    RunConfig cfg;
    cfg.schema_version = get<int>(doc, "schema_version", "");
    if (cfg.schema_version != 1) throw config_error("schema_version: expected 1");
    cfg.seed = get_or<std::uint64_t>(doc, "seed", "", 0);
    cfg.threads = get_or<unsigned>(doc, "threads", "", 1);
    cfg.output_dir = get_or<std::string>(doc, "output_dir", "", "out");

    try {
        cfg.model = detail::parse_model(detail::field(doc, "model", ""));
        validate(cfg.model);

        const nlohmann::json& grid = detail::field(doc, "grid", "");
        const double horizon = get<double>(grid, "horizon", "grid.");
        const double step = get<double>(grid, "step", "grid.");
        const double mpor = get_or(grid, "mpor", "grid.", 10.0 / 365.0);
        if (!(horizon > 0.0)) throw config_error("grid.horizon: must be positive");
        if (!(step > 0.0)) throw config_error("grid.step: must be positive");
        if (!(mpor > 0.0)) throw config_error("grid.mpor: must be positive");
        if (!(mpor < step)) throw config_error("grid.mpor: must be smaller than grid.step");
        if (!(step <= horizon)) throw config_error("grid.step: must not exceed grid.horizon");
        cfg.grid = build_time_grid(horizon, step, mpor);

        const nlohmann::json& portfolio = detail::field(doc, "portfolio", "");
        if (!portfolio.is_array() || portfolio.empty())
            throw config_error("portfolio: must be a non-empty array");
        for (std::size_t i = 0; i < portfolio.size(); ++i) {
            const std::string where = "portfolio[" + std::to_string(i) + "].";
            const Instrument instr = detail::parse_instrument(portfolio.at(i), where);
            if (instrument_maturity(instr) < cfg.grid.last_sample_time())
                throw config_error(where + "maturity: must cover the grid horizon");
            const bool needs_gbm = !std::holds_alternative<ZeroCouponBondOu>(instr);
            if (needs_gbm != is_gbm(cfg.model))
                throw config_error(where + "type: instrument incompatible with model.type");
            cfg.netting_set.instruments.push_back(instr);
        }

        cfg.discount_rate = get_or(doc, "discount_rate", "", 0.0);
        cfg.quantile_p = get_or(doc, "quantile", "", 0.99);
        if (!(cfg.quantile_p > 0.0 && cfg.quantile_p < 1.0))
            throw config_error("quantile: must lie in (0,1)");

        cfg.scaler = doc.contains("scaler") ? detail::parse_scaler(doc.at("scaler"), cfg.quantile_p)
                                            : QuantileScaler(NormalScaler{cfg.quantile_p});
        quantile_multiplier(cfg.scaler); // validates p and dof

        if (doc.contains("oracle")) {
            const nlohmann::json& oracle = doc.at("oracle");
            cfg.oracle.n_outer = get<std::size_t>(oracle, "n_outer", "oracle.");
            cfg.oracle.n_inner = get<std::size_t>(oracle, "n_inner", "oracle.");
            if (cfg.oracle.n_outer < 1) throw config_error("oracle.n_outer: must be at least 1");
            if (cfg.oracle.n_inner < 100)
                throw config_error("oracle.n_inner: must be at least 100 (tail statistic)");
        }

        if (doc.contains("approx")) cfg.approx = detail::parse_approx(doc.at("approx"));
        if (doc.contains("mva")) {
            cfg.mva = detail::parse_mva(doc.at("mva"));
            cfg.mva.validate();
        }
        if (doc.contains("diagnostics")) {
            const nlohmann::json& diag = doc.at("diagnostics");
            cfg.diagnose_n_boot = get_or<std::size_t>(diag, "n_boot", "diagnostics.", 200);
            cfg.diagnose_n_paths = get_or<std::size_t>(diag, "n_paths", "diagnostics.", 10000);
            if (cfg.diagnose_n_boot < 100)
                throw config_error("diagnostics.n_boot: must be at least 100");
            if (cfg.diagnose_n_paths < 100)
                throw config_error("diagnostics.n_paths: must be at least 100");
        }
    } catch (const validation_error& e) {
        // Module-level precondition violations surface as config errors here.
        throw config_error(e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

} // namespace fim
