#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "fim/common.hpp"
#include "fim/kernel.hpp"
#include "fim/mlp.hpp"
#include "fim/poly.hpp"
#include "fim/regression.hpp"
#include "fim/stats.hpp"

namespace fim {

enum class ApproxMethod { poly, kernel, nn };

struct PolySettings {
    std::size_t degree = 2; // the cited production choice; configurable 0..6
    double ridge = 0.0;
};

struct KernelSettings {
    KernelSpec spec;
    int order = 0;
};

struct NnSettings {
    std::vector<std::size_t> hidden = {16, 16};
    TrainConfig train;
};

struct ApproxSettings {
    ApproxMethod method = ApproxMethod::poly;
    std::size_t n_paths = 10000;
    PolySettings poly;
    KernelSettings kernel;
    NnSettings nn;
};

// Degenerate-regressor fallback: when X has no dispersion (every path shares
// one state, e.g. the t=0 column) the projection onto functions of X collapses
// to the constant mean(Y).
struct ConstantFit {
    double value = 0.0;
};

// Fitted conditional-second-moment model with one predict contract.
using Approximator = std::variant<ConstantFit, PolyFit, LocalFit, MlpModel>;

struct FitDiagnostics {
    bool constant_fallback = false;
    double bandwidth = 0.0;                     // kernel only, resolved value
    std::vector<std::size_t> degraded_queries;  // kernel order-1 only
    std::optional<TrainLog> train_log;          // nn only
};

inline bool regressor_is_degenerate(std::span<const double> x) {
    if (x.size() < 2) return true;
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    const double span_abs = hi - lo;
    return span_abs <= 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
}

inline Approximator fit_approximator(const ApproxSettings& settings, const RegressionData& data,
                                     std::uint64_t seed, FitDiagnostics* diag = nullptr) {
    if (regressor_is_degenerate(data.x)) {
        if (diag) diag->constant_fallback = true;
        return ConstantFit{mean(data.y)};
    }
    switch (settings.method) {
    case ApproxMethod::poly:
        return fit_polynomial(data, settings.poly.degree, settings.poly.ridge);
    case ApproxMethod::kernel: {
        LocalFit fit;
        fit.x = data.x;
        fit.y = data.y;
        fit.kernel = settings.kernel.spec;
        fit.order = settings.kernel.order;
        fit.validate();
        if (diag) diag->bandwidth = resolve_bandwidth(fit.kernel, fit.x);
        return fit;
    }
    case ApproxMethod::nn: {
        MlpSpec spec;
        spec.widths.push_back(1);
        spec.widths.insert(spec.widths.end(), settings.nn.hidden.begin(), settings.nn.hidden.end());
        spec.widths.push_back(1);
        spec.seed = seed;
        TrainResult trained = train(spec, settings.nn.train, data);
        if (diag) diag->train_log = trained.log;
        return std::move(trained.model);
    }
    }
    throw validation_error("fit_approximator: unknown method");
}

inline std::vector<double> predict(const Approximator& approx, std::span<const double> x_query,
                                   unsigned threads = 1, FitDiagnostics* diag = nullptr) {
    return std::visit(
        [&](const auto& fit) -> std::vector<double> {
            using T = std::decay_t<decltype(fit)>;
            if constexpr (std::is_same_v<T, ConstantFit>) {
                return std::vector<double>(x_query.size(), fit.value);
            } else if constexpr (std::is_same_v<T, PolyFit>) {
                return predict_polynomial(fit, x_query);
            } else if constexpr (std::is_same_v<T, LocalFit>) {
                LocalPolyResult res = local_poly_fit_predict(fit, x_query, threads);
                if (diag) diag->degraded_queries = res.degraded_queries;
                return std::move(res.values);
            } else {
                return predict_nn(fit, x_query);
            }
        },
        approx);
}

} // namespace fim
