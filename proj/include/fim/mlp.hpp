#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fim/common.hpp"
#include "fim/regression.hpp"
#include "fim/rng.hpp"
#include "fim/stats.hpp"

namespace fim {

// Feed-forward network with ReLU hidden layers and a linear output, written
// directly against flat double buffers. Training is plain mini-batch first-order
// descent; the update loop is sequential and everything is keyed off counters,
// so a fixed seed reproduces the training log bit for bit.

struct MlpSpec {
    std::vector<std::size_t> widths; // [d_in, N_1, ..., N_L, 1]
    std::uint64_t seed = 0;

    std::size_t d_in() const { return widths.front(); }
    std::size_t n_layers() const { return widths.size() - 1; }

    void validate() const {
        require(widths.size() >= 3, "mlp: need input, at least one hidden, and output layer");
        for (std::size_t w : widths) require(w >= 1, "mlp: all layer widths must be at least 1");
        require(widths.back() == 1, "mlp: output layer must have width 1");
    }
};

struct LayerParams {
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    std::vector<double> w; // row-major (n_out x n_in)
    std::vector<double> b;

    double weight(std::size_t i, std::size_t j) const { return w[i * n_in + j]; }
};

struct MlpParams {
    std::vector<LayerParams> layers;
};

// An epoch counts as an improvement only when it beats the best MSE by this
// relative margin; plateau oscillations then feed the early-stop patience.
inline constexpr double kMinRelImprovement = 1e-6;

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    bool adam = true; // false -> plain SGD
    bool standardize_inputs = true;
    bool standardize_targets = true;
    std::size_t patience = 50; // early-stop patience on epoch MSE, 0 disables

    void validate() const {
        require(epochs >= 1, "train: epochs must be at least 1");
        require(batch_size >= 1, "train: batch size must be at least 1");
        require(learning_rate > 0.0, "train: learning rate must be positive");
    }
};

// He-normal weights (variance 2/fan_in, the ReLU-appropriate scaling), zero
// biases; layer l's draws come from substream (seed, "init", l).
inline MlpParams init_params(const MlpSpec& spec) {
    spec.validate();
    MlpParams params;
    params.layers.resize(spec.n_layers());
    for (std::size_t l = 0; l < spec.n_layers(); ++l) {
        LayerParams& layer = params.layers[l];
        layer.n_in = spec.widths[l];
        layer.n_out = spec.widths[l + 1];
        layer.w.resize(layer.n_in * layer.n_out);
        layer.b.assign(layer.n_out, 0.0);
        const std::uint64_t layer_seed = derive_seed(spec.seed, 0x696e6974u /*"init"*/, l);
        const double sd = std::sqrt(2.0 / static_cast<double>(layer.n_in));
        for (std::size_t k = 0; k < layer.w.size(); ++k)
            layer.w[k] = sd * normal_draw(layer_seed, static_cast<std::uint32_t>(k), 0);
    }
    return params;
}

namespace detail {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }
// Subgradient pinned to 0 at the kink for determinism.
inline double relu_grad(double z) { return z > 0.0 ? 1.0 : 0.0; }

// Pre-activations for every layer of one batch; layer l occupies a
// (n x widths[l+1]) block.
struct ForwardWorkspace {
    std::vector<std::vector<double>> pre; // per layer, row-major (n x n_out)
};

inline void forward_batch(const MlpParams& params, std::span<const double> x, std::size_t n,
                          ForwardWorkspace& ws) {
    const std::size_t n_layers = params.layers.size();
    ws.pre.resize(n_layers);
    std::vector<double> activ(x.begin(), x.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
        const LayerParams& layer = params.layers[l];
        auto& z = ws.pre[l];
        z.assign(n * layer.n_out, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            const double* a_in = activ.data() + s * layer.n_in;
            double* z_out = z.data() + s * layer.n_out;
            for (std::size_t i = 0; i < layer.n_out; ++i) {
                double acc = layer.b[i];
                const double* w_row = layer.w.data() + i * layer.n_in;
                for (std::size_t j = 0; j < layer.n_in; ++j) acc += w_row[j] * a_in[j];
                z_out[i] = acc;
            }
        }
        if (l + 1 < n_layers) {
            activ.resize(z.size());
            for (std::size_t k = 0; k < z.size(); ++k) activ[k] = relu(z[k]);
        }
    }
}

} // namespace detail

// Batch forward pass: x is row-major (n x d_in), the returned vector holds the
// linear output per sample.
inline std::vector<double> forward(const MlpParams& params, std::span<const double> x,
                                   std::size_t n) {
    require(!params.layers.empty(), "forward: empty network");
    require(x.size() == n * params.layers.front().n_in, "forward: input shape mismatch");
    detail::ForwardWorkspace ws;
    detail::forward_batch(params, x, n, ws);
    return ws.pre.back();
}

struct LossAndGradients {
    double mse = 0.0;
    MlpParams grads;
};

// Empirical MSE over the batch and its exact reverse-mode gradients.
inline LossAndGradients loss_and_gradients(const MlpParams& params, std::span<const double> x,
                                           std::span<const double> y, std::size_t n) {
    require(n >= 1, "loss_and_gradients: empty batch");
    require(y.size() == n, "loss_and_gradients: target shape mismatch");
    const std::size_t n_layers = params.layers.size();

    detail::ForwardWorkspace ws;
    detail::forward_batch(params, x, n, ws);
    const std::vector<double>& yhat = ws.pre.back();

    LossAndGradients out;
    out.grads.layers.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        out.grads.layers[l].n_in = params.layers[l].n_in;
        out.grads.layers[l].n_out = params.layers[l].n_out;
        out.grads.layers[l].w.assign(params.layers[l].w.size(), 0.0);
        out.grads.layers[l].b.assign(params.layers[l].b.size(), 0.0);
    }

    CompensatedSum loss;
    for (std::size_t s = 0; s < n; ++s) {
        const double r = yhat[s] - y[s];
        loss.add(r * r);
    }
    out.mse = loss.value() / static_cast<double>(n);

    // delta for the output layer: d(mse)/d(yhat) = 2 (yhat - y) / n
    std::vector<double> delta(n);
    for (std::size_t s = 0; s < n; ++s) delta[s] = 2.0 * (yhat[s] - y[s]) / static_cast<double>(n);

    for (std::size_t l = n_layers; l-- > 0;) {
        const LayerParams& layer = params.layers[l];
        LayerParams& grad = out.grads.layers[l];
        const std::size_t n_out = layer.n_out;

        // input activations of layer l
        for (std::size_t s = 0; s < n; ++s) {
            const double* d_row = delta.data() + s * n_out;
            for (std::size_t i = 0; i < n_out; ++i) {
                const double d = d_row[i];
                grad.b[i] += d;
                double* g_row = grad.w.data() + i * layer.n_in;
                if (l == 0) {
                    const double* a_in = x.data() + s * layer.n_in;
                    for (std::size_t j = 0; j < layer.n_in; ++j) g_row[j] += d * a_in[j];
                } else {
                    const double* z_prev = ws.pre[l - 1].data() + s * layer.n_in;
                    for (std::size_t j = 0; j < layer.n_in; ++j)
                        g_row[j] += d * detail::relu(z_prev[j]);
                }
            }
        }

        if (l == 0) break;
        // propagate delta through W_l and the ReLU of layer l-1
        std::vector<double> delta_prev(n * layer.n_in, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            const double* d_row = delta.data() + s * n_out;
            const double* z_prev = ws.pre[l - 1].data() + s * layer.n_in;
            double* dp = delta_prev.data() + s * layer.n_in;
            for (std::size_t j = 0; j < layer.n_in; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n_out; ++i) acc += layer.w[i * layer.n_in + j] * d_row[i];
                dp[j] = acc * detail::relu_grad(z_prev[j]);
            }
        }
        delta.swap(delta_prev);
    }
    return out;
}

struct Standardization {
    double mean = 0.0;
    double scale = 1.0;

    double to_std(double v) const { return (v - mean) / scale; }
    double from_std(double v) const { return v * scale + mean; }
};

// Fitted network plus the input/target standardization folded into prediction.
struct MlpModel {
    MlpSpec spec;
    MlpParams params;
    Standardization x_std;
    Standardization y_std;
};

struct TrainLog {
    std::vector<double> epoch_mse; // full-data MSE in original target units
    std::size_t stopped_epoch = 0; // number of epochs actually run
};

struct TrainResult {
    MlpModel model;
    TrainLog log;
};

namespace detail {

inline Standardization fit_standardization(std::span<const double> v, bool enabled) {
    Standardization s;
    if (!enabled || v.size() < 2) return s;
    s.mean = mean(v);
    const double sd = sample_stddev(v);
    s.scale = sd > 0.0 ? sd : 1.0;
    return s;
}

struct AdamState {
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t step = 0;

    explicit AdamState(const MlpParams& params) {
        for (const auto& layer : params.layers) {
            m_w.emplace_back(layer.w.size(), 0.0);
            v_w.emplace_back(layer.w.size(), 0.0);
            m_b.emplace_back(layer.b.size(), 0.0);
            v_b.emplace_back(layer.b.size(), 0.0);
        }
    }

    void update(MlpParams& params, const MlpParams& grads, double lr) {
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            auto upd = [&](std::vector<double>& p, const std::vector<double>& g,
                           std::vector<double>& m, std::vector<double>& v) {
                for (std::size_t k = 0; k < p.size(); ++k) {
                    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                    p[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps);
                }
            };
            upd(params.layers[l].w, grads.layers[l].w, m_w[l], v_w[l]);
            upd(params.layers[l].b, grads.layers[l].b, m_b[l], v_b[l]);
        }
    }
};

inline void sgd_update(MlpParams& params, const MlpParams& grads, double lr) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        for (std::size_t k = 0; k < params.layers[l].w.size(); ++k)
            params.layers[l].w[k] -= lr * grads.layers[l].w[k];
        for (std::size_t k = 0; k < params.layers[l].b.size(); ++k)
            params.layers[l].b[k] -= lr * grads.layers[l].b[k];
    }
}

// Fisher-Yates with counter-based uniforms; epoch e shuffles under substream
// (seed, "shuf", e).
inline void shuffle_indices(std::vector<std::size_t>& idx, std::uint64_t seed, std::size_t epoch) {
    const std::uint64_t s = derive_seed(seed, 0x73687566u /*"shuf"*/, epoch);
    for (std::size_t i = idx.size(); i > 1; --i) {
        const double u = uniform_draw(s, static_cast<std::uint32_t>(i), 0);
        auto j = static_cast<std::size_t>(u * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(idx[i - 1], idx[j]);
    }
}

} // namespace detail

// Mini-batch training on (x, y) = (netting-set value, squared PnL). Runs the
// epoch budget with optional early stopping; the log records the full-data MSE
// in original units after each epoch. Divergence raises a numeric_error naming
// the last finite epoch.
inline TrainResult train(const MlpSpec& spec, const TrainConfig& cfg, const RegressionData& data) {
    spec.validate();
    cfg.validate();
    require(spec.d_in() == 1, "train: RegressionData carries a single regressor");
    const std::size_t n = data.x.size();
    require(n >= 2 && n == data.y.size(), "train: need at least 2 samples with equal lengths");

    TrainResult result;
    result.model.spec = spec;
    result.model.x_std = detail::fit_standardization(data.x, cfg.standardize_inputs);
    result.model.y_std = detail::fit_standardization(data.y, cfg.standardize_targets);

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = result.model.x_std.to_std(data.x[i]);
        ys[i] = result.model.y_std.to_std(data.y[i]);
    }

    MlpParams params = init_params(spec);
    detail::AdamState adam(params);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    double best_mse = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_best = 0;
    std::vector<double> bx, by;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        detail::shuffle_indices(order, spec.seed, epoch);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const std::size_t bs = stop - start;
            bx.resize(bs);
            by.resize(bs);
            for (std::size_t k = 0; k < bs; ++k) {
                bx[k] = xs[order[start + k]];
                by[k] = ys[order[start + k]];
            }
            const LossAndGradients lg = loss_and_gradients(params, bx, by, bs);
            if (!std::isfinite(lg.mse))
                throw numeric_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                    "; last finite epoch " +
                                    (result.log.epoch_mse.empty()
                                         ? std::string("none")
                                         : std::to_string(result.log.epoch_mse.size() - 1)));
            if (cfg.adam)
                adam.update(params, lg.grads, cfg.learning_rate);
            else
                detail::sgd_update(params, lg.grads, cfg.learning_rate);
        }

        // end-of-epoch full-pass MSE in original target units
        const std::vector<double> yhat_std = forward(params, xs, n);
        CompensatedSum sum;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = result.model.y_std.from_std(yhat_std[i]) - data.y[i];
            sum.add(r * r);
        }
        const double epoch_mse = sum.value() / static_cast<double>(n);
        if (!std::isfinite(epoch_mse))
            throw numeric_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                "; last finite epoch " +
                                (result.log.epoch_mse.empty()
                                     ? std::string("none")
                                     : std::to_string(result.log.epoch_mse.size() - 1)));
        result.log.epoch_mse.push_back(epoch_mse);

        if (epoch_mse < best_mse * (1.0 - kMinRelImprovement)) {
            best_mse = epoch_mse;
            epochs_since_best = 0;
        } else if (cfg.patience > 0 && ++epochs_since_best >= cfg.patience) {
            break;
        }
    }
    result.log.stopped_epoch = result.log.epoch_mse.size();
    result.model.params = std::move(params);
    return result;
}

// Forward pass with the stored standardization.
inline std::vector<double> predict_nn(const MlpModel& model, std::span<const double> x_query) {
    std::vector<double> xs(x_query.size());
    for (std::size_t i = 0; i < x_query.size(); ++i) xs[i] = model.x_std.to_std(x_query[i]);
    std::vector<double> out = forward(model.params, xs, x_query.size());
    for (double& v : out) v = model.y_std.from_std(v);
    return out;
}

} // namespace fim
