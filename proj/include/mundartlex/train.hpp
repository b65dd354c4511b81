#pragma once

// Teacher-forced training: mini-batches, adaptive-moment updates with an
// inverse-square-root warmup schedule, per-epoch loss history.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mundartlex/error.hpp"
#include "mundartlex/transformer.hpp"
#include "mundartlex/vocab.hpp"

namespace mundartlex {

struct TrainConfig {
    int epochs = 55;
    int batch_size = 64;
    double dropout = 0.2;
    std::uint64_t seed = 1;
    double lr_scale = 1.0;
    int warmup_steps = 400;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double adam_eps = 1e-9;
    double label_smoothing = 0.0;
    double ema_decay = 0.0;  // weight averaging for evaluation and the result; 0 disables

    void validate() const {
        if (epochs < 1) throw ValidationError("epochs must be >= 1");
        if (batch_size < 1) throw ValidationError("batch size must be >= 1");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
        if (!(lr_scale > 0.0)) throw ValidationError("learning-rate scale must be positive");
        if (warmup_steps < 1) throw ValidationError("warmup steps must be >= 1");
        if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) throw ValidationError("label smoothing must lie in [0, 1)");
        if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw ValidationError("EMA decay must lie in [0, 1)");
    }
};

/// One training pair as token ids; `tgt` carries neither BOS nor EOS.
struct Example {
    std::vector<TokenId> src;
    std::vector<TokenId> tgt;
};

inline Example make_example(const Vocab& src_vocab, const Vocab& tgt_vocab, const TokenPair& pair) {
    return {encode_tokens(src_vocab, pair.src), encode_tokens(tgt_vocab, pair.tgt)};
}

/// lr(step) = scale · d_model^-0.5 · min(step^-0.5, step · warmup^-1.5), step ≥ 1.
inline double noam_rate(const TrainConfig& cfg, int d_model, std::size_t step) {
    const double s = static_cast<double>(step);
    return cfg.lr_scale / std::sqrt(static_cast<double>(d_model)) *
           std::min(1.0 / std::sqrt(s), s * std::pow(static_cast<double>(cfg.warmup_steps), -1.5));
}

template <class T>
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n, double beta1, double beta2, double eps)
        : m_(n, T{}), v_(n, T{}), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<T>& params, const std::vector<T>& grads, double lr) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = static_cast<double>(grads[i]);
            const double m = beta1_ * static_cast<double>(m_[i]) + (1.0 - beta1_) * g;
            const double v = beta2_ * static_cast<double>(v_[i]) + (1.0 - beta2_) * g * g;
            m_[i] = static_cast<T>(m);
            v_[i] = static_cast<T>(v);
            params[i] -= static_cast<T>(lr * (m / c1) / (std::sqrt(v / c2) + eps_));
        }
    }

    std::size_t steps() const noexcept { return t_; }

private:
    std::vector<T> m_, v_;
    double beta1_, beta2_, eps_;
    std::size_t t_ = 0;
};

/// Teacher-forced decoder input (BOS y1..yn) and gold output (y1..yn EOS).
inline std::pair<std::vector<TokenId>, std::vector<TokenId>> teacher_forcing(const std::vector<TokenId>& tgt) {
    std::vector<TokenId> in{bos_id}, gold;
    in.insert(in.end(), tgt.begin(), tgt.end());
    gold.assign(tgt.begin(), tgt.end());
    gold.push_back(eos_id);
    return {std::move(in), std::move(gold)};
}

/// Mean token loss and its gradient (written to `grads`) over a batch.
template <class T>
double batch_loss_and_gradient(const Transformer<T>& model, const std::vector<const Example*>& batch,
                               std::vector<T>& grads, DropoutContext dropout, double smoothing = 0.0) {
    grads.assign(model.parameter_count(), T{});
    double total = 0.0;
    std::size_t tokens = 0;
    ForwardTrace<T> trace;
    linalg::Matrix<T> dlogits;
    for (const Example* ex : batch) {
        const auto [in, gold] = teacher_forcing(ex->tgt);
        model.run_forward(ex->src, in, dropout, trace);
        const auto [sum, count] = cross_entropy<T>(trace.logits, gold, &dlogits, smoothing);
        total += static_cast<double>(sum);
        tokens += count;
        model.backward(trace, dlogits, grads);
    }
    if (tokens == 0) throw ValidationError("batch contains no target tokens");
    const T inv = static_cast<T>(1.0 / static_cast<double>(tokens));
    for (auto& g : grads) g *= inv;
    return total / static_cast<double>(tokens);
}

/// Mean token loss without dropout or gradients.
template <class T>
double evaluate_loss(const Transformer<T>& model, const std::vector<Example>& data) {
    double total = 0.0;
    std::size_t tokens = 0;
    for (const auto& ex : data) {
        const auto [in, gold] = teacher_forcing(ex.tgt);
        const auto [sum, count] = cross_entropy<T>(model.forward(ex.src, in), gold);
        total += static_cast<double>(sum);
        tokens += count;
    }
    return tokens ? total / static_cast<double>(tokens) : 0.0;
}

struct TrainResult {
    std::vector<double> loss_history;   // mean token loss per epoch
    std::vector<double> valid_history;  // empty without validation data
    std::size_t steps = 0;
};

struct EpochReport {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double valid_loss = 0.0;
    bool has_valid = false;
};

/// Runs epochs·⌈N/batch⌉ optimizer steps over `data`, reshuffled every epoch.
/// Identical seed, data and initial weights give bit-identical results.
template <class T>
TrainResult train(Transformer<T>& model, const std::vector<Example>& data, const TrainConfig& cfg,
                  const std::vector<Example>& valid = {}, const std::function<void(const EpochReport&)>& on_epoch = {}) {
    cfg.validate();
    if (data.empty()) throw ValidationError("empty training set");
    Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    AdamOptimizer<T> adam(model.parameter_count(), cfg.beta1, cfg.beta2, cfg.adam_eps);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

    const bool use_ema = cfg.ema_decay > 0.0;
    const T decay = static_cast<T>(cfg.ema_decay);
    std::vector<T> ema = use_ema ? model.parameters() : std::vector<T>{};

    TrainResult result;
    std::vector<T> grads;
    std::vector<const Example*> batch;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        double epoch_loss = 0.0;
        std::size_t epoch_tokens = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            batch.clear();
            std::size_t tokens = 0;
            for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
                batch.push_back(&data[order[i]]);
                tokens += data[order[i]].tgt.size() + 1;
            }
            const double loss = batch_loss_and_gradient(model, batch, grads, DropoutContext{cfg.dropout, &rng},
                                                        cfg.label_smoothing);
            const std::size_t step = adam.steps() + 1;
            if (!std::isfinite(loss)) throw DivergenceError("non-finite training loss", step);
            adam.step(model.parameters(), grads, noam_rate(cfg, model.config().d_model, step));
            if (use_ema) {
                const auto& p = model.parameters();
                for (std::size_t i = 0; i < p.size(); ++i) ema[i] = decay * ema[i] + (T{1} - decay) * p[i];
            }
            epoch_loss += loss * static_cast<double>(tokens);
            epoch_tokens += tokens;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(epoch_tokens));
        EpochReport report{epoch, result.loss_history.back(), 0.0, false};
        // Validation and the callback see the averaged weights.
        if (use_ema) std::swap(model.parameters(), ema);
        if (!valid.empty()) {
            report.valid_loss = evaluate_loss(model, valid);
            report.has_valid = true;
            result.valid_history.push_back(report.valid_loss);
        }
        if (on_epoch) on_epoch(report);
        if (use_ema) std::swap(model.parameters(), ema);
    }
    if (use_ema) model.parameters() = std::move(ema);
    result.steps = adam.steps();
    return result;
}

}  // namespace mundartlex
