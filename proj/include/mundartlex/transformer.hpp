#pragma once

// Encoder-decoder transformer used for both p2g and g2p, with an exact
// analytic backward pass over a single flat parameter buffer.
//
// Layout: post-norm layers (sublayer -> dropout -> residual add -> layer norm),
// sinusoidal positions, no biases inside attention, and an attention output
// projection from n_heads·d_v back to d_model (64 -> 50 at the default sizes).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mundartlex/error.hpp"
#include "mundartlex/matrix.hpp"
#include "mundartlex/vocab.hpp"

namespace mundartlex {

struct ModelConfig {
    int n_layers = 2;
    int n_heads = 2;
    int d_k = 32;
    int d_v = 32;
    int d_model = 50;
    int d_word_vec = 50;
    int d_inner_hid = 400;
    double dropout = 0.2;
    int max_len = 64;

    void validate() const {
        if (n_layers < 1 || n_heads < 1 || d_k < 1 || d_v < 1 || d_model < 1 || d_inner_hid < 1 || max_len < 2)
            throw ValidationError("model dimensions must be positive (max_len >= 2)");
        if (d_word_vec != d_model) throw ValidationError("d_word_vec must equal d_model");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Deterministic generator; uniform draws avoid <random> distributions so
/// results do not depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

    template <class It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) std::iter_swap(first + (i - 1), first + below(i));
    }

private:
    std::mt19937_64 gen_;
};

/// Named region of the flat parameter buffer.
struct TensorInfo {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const noexcept { return rows * cols; }
    friend bool operator==(const TensorInfo&, const TensorInfo&) = default;
};

namespace detail {

struct Slot {
    std::size_t offset = 0, rows = 0, cols = 0;
};
struct AttnSlots {
    Slot wq, wk, wv, wo;
};
struct NormSlots {
    Slot gain, bias;
};
struct FfnSlots {
    Slot w1, b1, w2, b2;
};
struct EncoderSlots {
    AttnSlots attn;
    NormSlots norm1;
    FfnSlots ffn;
    NormSlots norm2;
};
struct DecoderSlots {
    AttnSlots self_attn;
    NormSlots norm1;
    AttnSlots cross_attn;
    NormSlots norm2;
    FfnSlots ffn;
    NormSlots norm3;
};

template <class T>
struct AttnCache {
    linalg::Matrix<T> xq, xkv, q, k, v, concat;
    std::vector<linalg::Matrix<T>> probs;       // per head, softmax output
    std::vector<linalg::Matrix<T>> drop_masks;  // per head; empty when inactive
    std::vector<char> key_valid;
    bool causal = false;
};

template <class T>
struct NormCache {
    linalg::Matrix<T> xhat;
    std::vector<T> rstd;
};

template <class T>
struct FfnCache {
    linalg::Matrix<T> x, pre, act;
};

template <class T>
struct EncoderLayerCache {
    AttnCache<T> attn;
    linalg::Matrix<T> attn_drop;
    NormCache<T> norm1;
    FfnCache<T> ffn;
    linalg::Matrix<T> ffn_drop;
    NormCache<T> norm2;
};

template <class T>
struct DecoderLayerCache {
    AttnCache<T> self_attn;
    linalg::Matrix<T> self_drop;
    NormCache<T> norm1;
    AttnCache<T> cross_attn;
    linalg::Matrix<T> cross_drop;
    NormCache<T> norm2;
    FfnCache<T> ffn;
    linalg::Matrix<T> ffn_drop;
    NormCache<T> norm3;
};

}  // namespace detail

/// Dropout source for one training step. A null generator or zero rate means
/// evaluation mode.
struct DropoutContext {
    double rate = 0.0;
    Rng* rng = nullptr;

    bool active() const noexcept { return rng != nullptr && rate > 0.0; }
};

template <class T>
struct EncoderOutput {
    linalg::Matrix<T> states;
    std::vector<char> key_valid;  // false at PAD positions of the source
};

/// Per-example activations kept for the backward pass.
template <class T>
struct ForwardTrace {
    std::vector<TokenId> src, prefix;
    linalg::Matrix<T> src_drop, tgt_drop;
    detail::NormCache<T> src_norm, tgt_norm;
    std::vector<detail::EncoderLayerCache<T>> enc;
    std::vector<detail::DecoderLayerCache<T>> dec;
    EncoderOutput<T> memory;
    linalg::Matrix<T> dec_out;
    linalg::Matrix<T> logits;
};

template <class T = double>
class Transformer {
public:
    using Matrix = linalg::Matrix<T>;

    static constexpr T norm_eps = static_cast<T>(1e-6);

    /// All parameters start at zero; call init_glorot() for training.
    Transformer(ModelConfig cfg, std::size_t src_vocab, std::size_t tgt_vocab)
        : cfg_(cfg), src_vocab_(src_vocab), tgt_vocab_(tgt_vocab) {
        cfg_.validate();
        if (src_vocab <= num_specials || tgt_vocab <= num_specials)
            throw ValidationError("vocabularies must contain at least one regular token");
        build_layout();
        params_.assign(total_, T{});
        build_positions();
    }

    const ModelConfig& config() const noexcept { return cfg_; }
    std::size_t src_vocab_size() const noexcept { return src_vocab_; }
    std::size_t tgt_vocab_size() const noexcept { return tgt_vocab_; }
    const std::vector<TensorInfo>& manifest() const noexcept { return manifest_; }
    std::size_t parameter_count() const noexcept { return total_; }
    std::vector<T>& parameters() noexcept { return params_; }
    const std::vector<T>& parameters() const noexcept { return params_; }

    /// Glorot-uniform weight matrices, unit-variance uniform embeddings, unit
    /// norm gains, zero biases. PAD embeddings stay zero.
    void init_glorot(std::uint64_t seed) {
        Rng rng(seed);
        std::fill(params_.begin(), params_.end(), T{});
        for (const auto& t : manifest_) {
            const auto leaf = t.name.substr(t.name.find_last_of('.') + 1);
            T* p = params_.data() + t.offset;
            if (leaf == "gain") {
                std::fill(p, p + t.size(), T{1});
            } else if (leaf == "bias" || leaf == "b1" || leaf == "b2") {
                continue;
            } else if (leaf == "embedding") {
                const double limit = std::sqrt(3.0);
                for (std::size_t i = t.cols; i < t.size(); ++i) p[i] = static_cast<T>(rng.uniform(-limit, limit));
            } else {
                const double limit = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
                for (std::size_t i = 0; i < t.size(); ++i) p[i] = static_cast<T>(rng.uniform(-limit, limit));
            }
        }
    }

    /// Evaluation-mode logits, one row per prefix position.
    Matrix forward(std::span<const TokenId> src, std::span<const TokenId> prefix) const {
        ForwardTrace<T> trace;
        run_forward(src, prefix, {}, trace);
        return std::move(trace.logits);
    }

    EncoderOutput<T> encode(std::span<const TokenId> src) const {
        check_source(src);
        std::vector<detail::EncoderLayerCache<T>> caches(static_cast<std::size_t>(cfg_.n_layers));
        Matrix drop;
        detail::NormCache<T> norm;
        return run_encoder(src, {}, caches, drop, norm);
    }

    Matrix decode(const EncoderOutput<T>& memory, std::span<const TokenId> prefix) const {
        check_prefix(prefix);
        std::vector<detail::DecoderLayerCache<T>> caches(static_cast<std::size_t>(cfg_.n_layers));
        Matrix drop;
        detail::NormCache<T> norm;
        return project(run_decoder(memory, prefix, {}, caches, drop, norm));
    }

    /// Log-softmax of the logits at the last prefix position.
    std::vector<T> next_log_probs(const EncoderOutput<T>& memory, std::span<const TokenId> prefix) const {
        const Matrix logits = decode(memory, prefix);
        return log_softmax(logits.row(logits.rows() - 1));
    }

    /// Forward pass keeping every activation needed by backward().
    void run_forward(std::span<const TokenId> src, std::span<const TokenId> prefix, DropoutContext dropout,
                     ForwardTrace<T>& trace) const {
        check_source(src);
        check_prefix(prefix);
        trace.src.assign(src.begin(), src.end());
        trace.prefix.assign(prefix.begin(), prefix.end());
        trace.enc.assign(static_cast<std::size_t>(cfg_.n_layers), {});
        trace.dec.assign(static_cast<std::size_t>(cfg_.n_layers), {});
        trace.memory = run_encoder(src, dropout, trace.enc, trace.src_drop, trace.src_norm);
        trace.dec_out = run_decoder(trace.memory, prefix, dropout, trace.dec, trace.tgt_drop, trace.tgt_norm);
        trace.logits = project(trace.dec_out);
    }

    /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logits).
    void backward(const ForwardTrace<T>& trace, const Matrix& dlogits, std::vector<T>& grads) const {
        if (grads.size() != total_) grads.assign(total_, T{});
        // output projection
        add_matmul_tn<T>(trace.dec_out, dlogits, gview(grads, out_w_));
        linalg::add_col_sums<T>(dlogits, grow(grads, out_b_));
        Matrix dy = linalg::matmul_nt<T>(dlogits, pview(out_w_));

        Matrix dmemory(trace.memory.states.rows(), trace.memory.states.cols());
        for (std::size_t l = dec_.size(); l-- > 0;) dy = decoder_layer_backward(dec_[l], trace.dec[l], dy, dmemory, grads);
        dy = layer_norm_backward(tgt_norm_, trace.tgt_norm, dy, grads);
        embed_backward(tgt_emb_, trace.prefix, trace.tgt_drop, dy, grads);

        Matrix dx = std::move(dmemory);
        for (std::size_t l = enc_.size(); l-- > 0;) dx = encoder_layer_backward(enc_[l], trace.enc[l], dx, grads);
        dx = layer_norm_backward(src_norm_, trace.src_norm, dx, grads);
        embed_backward(src_emb_, trace.src, trace.src_drop, dx, grads);
    }

    static std::vector<T> log_softmax(std::span<const T> row) {
        T mx = -std::numeric_limits<T>::infinity();
        for (T v : row) mx = std::max(mx, v);
        T sum{};
        for (T v : row) sum += std::exp(v - mx);
        const T lse = mx + std::log(sum);
        std::vector<T> out(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] - lse;
        return out;
    }

private:
    using Slot = detail::Slot;

    // ---- layout ---------------------------------------------------------

    Slot add_tensor(const std::string& name, std::size_t rows, std::size_t cols) {
        Slot s{total_, rows, cols};
        manifest_.push_back({name, total_, rows, cols});
        total_ += rows * cols;
        return s;
    }

    detail::AttnSlots add_attention(const std::string& prefix) {
        const auto d = static_cast<std::size_t>(cfg_.d_model);
        const auto hk = static_cast<std::size_t>(cfg_.n_heads * cfg_.d_k);
        const auto hv = static_cast<std::size_t>(cfg_.n_heads * cfg_.d_v);
        return {add_tensor(prefix + ".wq", d, hk), add_tensor(prefix + ".wk", d, hk), add_tensor(prefix + ".wv", d, hv),
                add_tensor(prefix + ".wo", hv, d)};
    }

    detail::NormSlots add_norm(const std::string& prefix) {
        const auto d = static_cast<std::size_t>(cfg_.d_model);
        return {add_tensor(prefix + ".gain", 1, d), add_tensor(prefix + ".bias", 1, d)};
    }

    detail::FfnSlots add_ffn(const std::string& prefix) {
        const auto d = static_cast<std::size_t>(cfg_.d_model);
        const auto h = static_cast<std::size_t>(cfg_.d_inner_hid);
        return {add_tensor(prefix + ".w1", d, h), add_tensor(prefix + ".b1", 1, h), add_tensor(prefix + ".w2", h, d),
                add_tensor(prefix + ".b2", 1, d)};
    }

    void build_layout() {
        const auto d = static_cast<std::size_t>(cfg_.d_model);
        src_emb_ = add_tensor("src.embedding", src_vocab_, d);
        tgt_emb_ = add_tensor("tgt.embedding", tgt_vocab_, d);
        src_norm_ = add_norm("src.norm");
        tgt_norm_ = add_norm("tgt.norm");
        for (int l = 0; l < cfg_.n_layers; ++l) {
            const auto p = "enc." + std::to_string(l);
            detail::EncoderSlots e;
            e.attn = add_attention(p + ".attn");
            e.norm1 = add_norm(p + ".norm1");
            e.ffn = add_ffn(p + ".ffn");
            e.norm2 = add_norm(p + ".norm2");
            enc_.push_back(e);
        }
        for (int l = 0; l < cfg_.n_layers; ++l) {
            const auto p = "dec." + std::to_string(l);
            detail::DecoderSlots s;
            s.self_attn = add_attention(p + ".self_attn");
            s.norm1 = add_norm(p + ".norm1");
            s.cross_attn = add_attention(p + ".cross_attn");
            s.norm2 = add_norm(p + ".norm2");
            s.ffn = add_ffn(p + ".ffn");
            s.norm3 = add_norm(p + ".norm3");
            dec_.push_back(s);
        }
        out_w_ = add_tensor("out.weight", d, tgt_vocab_);
        out_b_ = add_tensor("out.bias", 1, tgt_vocab_);
    }

    void build_positions() {
        const auto d = static_cast<std::size_t>(cfg_.d_model);
        positions_ = Matrix(static_cast<std::size_t>(cfg_.max_len), d);
        for (std::size_t pos = 0; pos < positions_.rows(); ++pos)
            for (std::size_t i = 0; i < d; ++i) {
                const double angle = static_cast<double>(pos) /
                                     std::pow(10000.0, static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
                positions_(pos, i) = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
            }
    }

    linalg::ConstView<T> pview(const Slot& s) const { return {params_.data() + s.offset, s.rows, s.cols}; }
    std::span<const T> prow(const Slot& s) const { return {params_.data() + s.offset, s.rows * s.cols}; }
    static linalg::View<T> gview(std::vector<T>& g, const Slot& s) { return {g.data() + s.offset, s.rows, s.cols}; }
    static std::span<T> grow(std::vector<T>& g, const Slot& s) { return {g.data() + s.offset, s.rows * s.cols}; }

    template <class U>
    static void add_matmul_tn(linalg::ConstView<U> a, linalg::ConstView<U> b, linalg::View<U> c) {
        linalg::add_matmul_tn<U>(a, b, c);
    }

    void check_source(std::span<const TokenId> src) const {
        if (src.empty()) throw ValidationError("empty source sequence");
        if (src.size() > static_cast<std::size_t>(cfg_.max_len))
            throw ValidationError("source length " + std::to_string(src.size()) + " exceeds max_len " +
                                  std::to_string(cfg_.max_len));
        bool any = false;
        for (auto id : src) {
            if (id < 0 || static_cast<std::size_t>(id) >= src_vocab_) throw ValidationError("source id out of range");
            any |= id != pad_id;
        }
        if (!any) throw ValidationError("source sequence contains only padding");
    }

    void check_prefix(std::span<const TokenId> prefix) const {
        if (prefix.empty()) throw ValidationError("empty target prefix");
        if (prefix.size() > static_cast<std::size_t>(cfg_.max_len))
            throw ValidationError("target prefix length " + std::to_string(prefix.size()) + " exceeds max_len " +
                                  std::to_string(cfg_.max_len));
        for (auto id : prefix)
            if (id < 0 || static_cast<std::size_t>(id) >= tgt_vocab_) throw ValidationError("target id out of range");
    }

    // ---- building blocks --------------------------------------------------

    Matrix dropout_mask(std::size_t rows, std::size_t cols, DropoutContext dropout) const {
        if (!dropout.active()) return {};
        Matrix mask(rows, cols);
        const T keep_scale = static_cast<T>(1.0 / (1.0 - dropout.rate));
        for (auto& m : mask.values()) m = dropout.rng->uniform() < dropout.rate ? T{} : keep_scale;
        return mask;
    }

    static void apply_mask(Matrix& x, const Matrix& mask) {
        if (mask.size() == 0) return;
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] *= mask.data()[i];
    }

    Matrix embed(const Slot& table, std::span<const TokenId> ids, DropoutContext dropout, Matrix& drop) const {
        const auto d = static_cast<std::size_t>(cfg_.d_model);
        Matrix x(ids.size(), d);
        const auto tab = pview(table);
        for (std::size_t t = 0; t < ids.size(); ++t)
            for (std::size_t i = 0; i < d; ++i) x(t, i) = tab(static_cast<std::size_t>(ids[t]), i) + positions_(t, i);
        drop = dropout_mask(x.rows(), x.cols(), dropout);
        apply_mask(x, drop);
        return x;
    }

    void embed_backward(const Slot& table, const std::vector<TokenId>& ids, const Matrix& drop, Matrix dx,
                        std::vector<T>& grads) const {
        apply_mask(dx, drop);
        auto g = gview(grads, table);
        for (std::size_t t = 0; t < ids.size(); ++t)
            for (std::size_t i = 0; i < dx.cols(); ++i) g(static_cast<std::size_t>(ids[t]), i) += dx(t, i);
    }

    Matrix attention(const detail::AttnSlots& s, const Matrix& xq, const Matrix& xkv, const std::vector<char>& key_valid,
                     bool causal, DropoutContext dropout, detail::AttnCache<T>& c) const {
        const auto heads = static_cast<std::size_t>(cfg_.n_heads);
        const auto dk = static_cast<std::size_t>(cfg_.d_k);
        const auto dv = static_cast<std::size_t>(cfg_.d_v);
        const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dk)));
        c.xq = xq;
        c.xkv = xkv;
        c.key_valid = key_valid;
        c.causal = causal;
        c.q = linalg::matmul<T>(xq, pview(s.wq));
        c.k = linalg::matmul<T>(xkv, pview(s.wk));
        c.v = linalg::matmul<T>(xkv, pview(s.wv));
        c.concat = Matrix(xq.rows(), heads * dv);
        c.probs.assign(heads, {});
        c.drop_masks.assign(heads, {});
        const std::size_t lq = xq.rows(), lk = xkv.rows();
        for (std::size_t h = 0; h < heads; ++h) {
            Matrix p(lq, lk);
            for (std::size_t i = 0; i < lq; ++i) {
                T mx = -std::numeric_limits<T>::infinity();
                for (std::size_t j = 0; j < lk; ++j) {
                    if (!key_valid[j] || (causal && j > i)) continue;
                    T sc{};
                    for (std::size_t e = 0; e < dk; ++e) sc += c.q(i, h * dk + e) * c.k(j, h * dk + e);
                    p(i, j) = sc * scale;
                    mx = std::max(mx, p(i, j));
                }
                if (mx == -std::numeric_limits<T>::infinity()) continue;  // no admissible key: row stays zero
                T sum{};
                for (std::size_t j = 0; j < lk; ++j) {
                    if (!key_valid[j] || (causal && j > i)) continue;
                    p(i, j) = std::exp(p(i, j) - mx);
                    sum += p(i, j);
                }
                for (std::size_t j = 0; j < lk; ++j) p(i, j) /= sum;
            }
            Matrix mask = dropout_mask(lq, lk, dropout);
            Matrix pd = p;
            apply_mask(pd, mask);
            for (std::size_t i = 0; i < lq; ++i)
                for (std::size_t j = 0; j < lk; ++j) {
                    const T w = pd(i, j);
                    if (w == T{}) continue;
                    for (std::size_t e = 0; e < dv; ++e) c.concat(i, h * dv + e) += w * c.v(j, h * dv + e);
                }
            c.probs[h] = std::move(p);
            c.drop_masks[h] = std::move(mask);
        }
        return linalg::matmul<T>(c.concat, pview(s.wo));
    }

    /// Returns (d xq, d xkv).
    std::pair<Matrix, Matrix> attention_backward(const detail::AttnSlots& s, const detail::AttnCache<T>& c,
                                                 const Matrix& dout, std::vector<T>& grads) const {
        const auto heads = static_cast<std::size_t>(cfg_.n_heads);
        const auto dk = static_cast<std::size_t>(cfg_.d_k);
        const auto dv = static_cast<std::size_t>(cfg_.d_v);
        const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dk)));
        const std::size_t lq = c.xq.rows(), lk = c.xkv.rows();

        add_matmul_tn<T>(c.concat, dout, gview(grads, s.wo));
        const Matrix dconcat = linalg::matmul_nt<T>(dout, pview(s.wo));
        Matrix dq(lq, heads * dk), dk_m(lk, heads * dk), dv_m(lk, heads * dv);
        for (std::size_t h = 0; h < heads; ++h) {
            const Matrix& p = c.probs[h];
            const Matrix& mask = c.drop_masks[h];
            Matrix dp(lq, lk);
            for (std::size_t i = 0; i < lq; ++i)
                for (std::size_t j = 0; j < lk; ++j) {
                    T acc{};
                    for (std::size_t e = 0; e < dv; ++e) acc += dconcat(i, h * dv + e) * c.v(j, h * dv + e);
                    const T m = mask.size() ? mask(i, j) : T{1};
                    const T pd = p(i, j) * m;
                    if (pd != T{})
                        for (std::size_t e = 0; e < dv; ++e) dv_m(j, h * dv + e) += pd * dconcat(i, h * dv + e);
                    dp(i, j) = acc * m;
                }
            for (std::size_t i = 0; i < lq; ++i) {
                T dot{};
                for (std::size_t j = 0; j < lk; ++j) dot += p(i, j) * dp(i, j);
                for (std::size_t j = 0; j < lk; ++j) {
                    const T ds = p(i, j) * (dp(i, j) - dot) * scale;
                    if (ds == T{}) continue;
                    for (std::size_t e = 0; e < dk; ++e) {
                        dq(i, h * dk + e) += ds * c.k(j, h * dk + e);
                        dk_m(j, h * dk + e) += ds * c.q(i, h * dk + e);
                    }
                }
            }
        }
        add_matmul_tn<T>(c.xq, dq, gview(grads, s.wq));
        add_matmul_tn<T>(c.xkv, dk_m, gview(grads, s.wk));
        add_matmul_tn<T>(c.xkv, dv_m, gview(grads, s.wv));
        Matrix dxq = linalg::matmul_nt<T>(dq, pview(s.wq));
        Matrix dxkv = linalg::matmul_nt<T>(dk_m, pview(s.wk));
        linalg::add_inplace<T>(dxkv, linalg::matmul_nt<T>(dv_m, pview(s.wv)));
        return {std::move(dxq), std::move(dxkv)};
    }

    Matrix layer_norm(const detail::NormSlots& s, const Matrix& x, detail::NormCache<T>& c) const {
        const std::size_t n = x.cols();
        const auto gain = prow(s.gain);
        const auto bias = prow(s.bias);
        c.xhat = Matrix(x.rows(), n);
        c.rstd.assign(x.rows(), T{});
        Matrix y(x.rows(), n);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            T mean{};
            for (std::size_t i = 0; i < n; ++i) mean += x(r, i);
            mean /= static_cast<T>(n);
            T var{};
            for (std::size_t i = 0; i < n; ++i) var += (x(r, i) - mean) * (x(r, i) - mean);
            var /= static_cast<T>(n);
            const T rstd = T{1} / std::sqrt(var + norm_eps);
            c.rstd[r] = rstd;
            for (std::size_t i = 0; i < n; ++i) {
                c.xhat(r, i) = (x(r, i) - mean) * rstd;
                y(r, i) = gain[i] * c.xhat(r, i) + bias[i];
            }
        }
        return y;
    }

    Matrix layer_norm_backward(const detail::NormSlots& s, const detail::NormCache<T>& c, const Matrix& dy,
                               std::vector<T>& grads) const {
        const std::size_t n = dy.cols();
        const auto gain = prow(s.gain);
        auto dgain = grow(grads, s.gain);
        auto dbias = grow(grads, s.bias);
        Matrix dx(dy.rows(), n);
        std::vector<T> dxhat(n);
        for (std::size_t r = 0; r < dy.rows(); ++r) {
            T mean_d{}, mean_dx{};
            for (std::size_t i = 0; i < n; ++i) {
                dgain[i] += dy(r, i) * c.xhat(r, i);
                dbias[i] += dy(r, i);
                dxhat[i] = dy(r, i) * gain[i];
                mean_d += dxhat[i];
                mean_dx += dxhat[i] * c.xhat(r, i);
            }
            mean_d /= static_cast<T>(n);
            mean_dx /= static_cast<T>(n);
            for (std::size_t i = 0; i < n; ++i) dx(r, i) = c.rstd[r] * (dxhat[i] - mean_d - c.xhat(r, i) * mean_dx);
        }
        return dx;
    }

    Matrix feed_forward(const detail::FfnSlots& s, const Matrix& x, detail::FfnCache<T>& c) const {
        c.x = x;
        c.pre = linalg::matmul<T>(x, pview(s.w1));
        linalg::add_row_broadcast<T>(c.pre, prow(s.b1));
        c.act = c.pre;
        for (auto& v : c.act.values()) v = std::max(v, T{});
        Matrix out = linalg::matmul<T>(c.act, pview(s.w2));
        linalg::add_row_broadcast<T>(out, prow(s.b2));
        return out;
    }

    Matrix feed_forward_backward(const detail::FfnSlots& s, const detail::FfnCache<T>& c, const Matrix& dout,
                                 std::vector<T>& grads) const {
        add_matmul_tn<T>(c.act, dout, gview(grads, s.w2));
        linalg::add_col_sums<T>(dout, grow(grads, s.b2));
        Matrix dpre = linalg::matmul_nt<T>(dout, pview(s.w2));
        for (std::size_t i = 0; i < dpre.size(); ++i)
            if (!(c.pre.data()[i] > T{})) dpre.data()[i] = T{};
        add_matmul_tn<T>(c.x, dpre, gview(grads, s.w1));
        linalg::add_col_sums<T>(dpre, grow(grads, s.b1));
        return linalg::matmul_nt<T>(dpre, pview(s.w1));
    }

    // ---- layers -------------------------------------------------------------

    Matrix encoder_layer(const detail::EncoderSlots& s, const Matrix& x, const std::vector<char>& key_valid,
                         DropoutContext dropout, detail::EncoderLayerCache<T>& c) const {
        Matrix a = attention(s.attn, x, x, key_valid, false, dropout, c.attn);
        c.attn_drop = dropout_mask(a.rows(), a.cols(), dropout);
        apply_mask(a, c.attn_drop);
        linalg::add_inplace<T>(a, x);
        Matrix h = layer_norm(s.norm1, a, c.norm1);
        Matrix f = feed_forward(s.ffn, h, c.ffn);
        c.ffn_drop = dropout_mask(f.rows(), f.cols(), dropout);
        apply_mask(f, c.ffn_drop);
        linalg::add_inplace<T>(f, h);
        return layer_norm(s.norm2, f, c.norm2);
    }

    Matrix encoder_layer_backward(const detail::EncoderSlots& s, const detail::EncoderLayerCache<T>& c,
                                  const Matrix& dy, std::vector<T>& grads) const {
        Matrix dh = layer_norm_backward(s.norm2, c.norm2, dy, grads);
        Matrix df = dh;
        apply_mask(df, c.ffn_drop);
        linalg::add_inplace<T>(dh, feed_forward_backward(s.ffn, c.ffn, df, grads));
        Matrix dx = layer_norm_backward(s.norm1, c.norm1, dh, grads);
        Matrix da = dx;
        apply_mask(da, c.attn_drop);
        auto [dq, dkv] = attention_backward(s.attn, c.attn, da, grads);
        linalg::add_inplace<T>(dx, dq);
        linalg::add_inplace<T>(dx, dkv);
        return dx;
    }

    Matrix decoder_layer(const detail::DecoderSlots& s, const Matrix& y, const EncoderOutput<T>& memory,
                         DropoutContext dropout, detail::DecoderLayerCache<T>& c) const {
        const std::vector<char> all_valid(y.rows(), 1);
        Matrix a = attention(s.self_attn, y, y, all_valid, true, dropout, c.self_attn);
        c.self_drop = dropout_mask(a.rows(), a.cols(), dropout);
        apply_mask(a, c.self_drop);
        linalg::add_inplace<T>(a, y);
        Matrix h1 = layer_norm(s.norm1, a, c.norm1);
        Matrix b = attention(s.cross_attn, h1, memory.states, memory.key_valid, false, dropout, c.cross_attn);
        c.cross_drop = dropout_mask(b.rows(), b.cols(), dropout);
        apply_mask(b, c.cross_drop);
        linalg::add_inplace<T>(b, h1);
        Matrix h2 = layer_norm(s.norm2, b, c.norm2);
        Matrix f = feed_forward(s.ffn, h2, c.ffn);
        c.ffn_drop = dropout_mask(f.rows(), f.cols(), dropout);
        apply_mask(f, c.ffn_drop);
        linalg::add_inplace<T>(f, h2);
        return layer_norm(s.norm3, f, c.norm3);
    }

    Matrix decoder_layer_backward(const detail::DecoderSlots& s, const detail::DecoderLayerCache<T>& c,
                                  const Matrix& dy, Matrix& dmemory, std::vector<T>& grads) const {
        Matrix dh2 = layer_norm_backward(s.norm3, c.norm3, dy, grads);
        Matrix df = dh2;
        apply_mask(df, c.ffn_drop);
        linalg::add_inplace<T>(dh2, feed_forward_backward(s.ffn, c.ffn, df, grads));
        Matrix dh1 = layer_norm_backward(s.norm2, c.norm2, dh2, grads);
        Matrix db = dh1;
        apply_mask(db, c.cross_drop);
        auto [dq_cross, dmem] = attention_backward(s.cross_attn, c.cross_attn, db, grads);
        linalg::add_inplace<T>(dh1, dq_cross);
        linalg::add_inplace<T>(dmemory, dmem);
        Matrix dyin = layer_norm_backward(s.norm1, c.norm1, dh1, grads);
        Matrix da = dyin;
        apply_mask(da, c.self_drop);
        auto [dq, dkv] = attention_backward(s.self_attn, c.self_attn, da, grads);
        linalg::add_inplace<T>(dyin, dq);
        linalg::add_inplace<T>(dyin, dkv);
        return dyin;
    }

    EncoderOutput<T> run_encoder(std::span<const TokenId> src, DropoutContext dropout,
                                 std::vector<detail::EncoderLayerCache<T>>& caches, Matrix& drop,
                                 detail::NormCache<T>& norm) const {
        EncoderOutput<T> out;
        out.key_valid.resize(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) out.key_valid[i] = src[i] != pad_id;
        Matrix x = layer_norm(src_norm_, embed(src_emb_, src, dropout, drop), norm);
        for (std::size_t l = 0; l < enc_.size(); ++l) x = encoder_layer(enc_[l], x, out.key_valid, dropout, caches[l]);
        out.states = std::move(x);
        return out;
    }

    Matrix run_decoder(const EncoderOutput<T>& memory, std::span<const TokenId> prefix, DropoutContext dropout,
                       std::vector<detail::DecoderLayerCache<T>>& caches, Matrix& drop,
                       detail::NormCache<T>& norm) const {
        Matrix y = layer_norm(tgt_norm_, embed(tgt_emb_, prefix, dropout, drop), norm);
        for (std::size_t l = 0; l < dec_.size(); ++l) y = decoder_layer(dec_[l], y, memory, dropout, caches[l]);
        return y;
    }

    Matrix project(const Matrix& y) const {
        Matrix logits = linalg::matmul<T>(y, pview(out_w_));
        linalg::add_row_broadcast<T>(logits, prow(out_b_));
        return logits;
    }

    ModelConfig cfg_;
    std::size_t src_vocab_;
    std::size_t tgt_vocab_;
    std::vector<TensorInfo> manifest_;
    std::size_t total_ = 0;
    std::vector<T> params_;
    Matrix positions_;
    Slot src_emb_, tgt_emb_, out_w_, out_b_;
    detail::NormSlots src_norm_, tgt_norm_;
    std::vector<detail::EncoderSlots> enc_;
    std::vector<detail::DecoderSlots> dec_;
};

/// Summed cross-entropy of `logits` against `gold` (PAD positions skipped);
/// writes d(sum)/d(logits) into `dlogits` when given. With smoothing `eps`
/// the target distribution is (1 - eps)·onehot + eps/V. Returns (sum, count).
template <class T>
std::pair<T, std::size_t> cross_entropy(const linalg::Matrix<T>& logits, std::span<const TokenId> gold,
                                        linalg::Matrix<T>* dlogits = nullptr, double smoothing = 0.0) {
    if (gold.size() != logits.rows()) throw ValidationError("gold length does not match logits rows");
    if (dlogits) *dlogits = linalg::Matrix<T>(logits.rows(), logits.cols());
    const T eps = static_cast<T>(smoothing);
    const T uniform = eps / static_cast<T>(logits.cols());
    T total{};
    std::size_t count = 0;
    for (std::size_t t = 0; t < gold.size(); ++t) {
        if (gold[t] == pad_id) continue;
        const auto lp = Transformer<T>::log_softmax(logits.row(t));
        const auto g = static_cast<std::size_t>(gold[t]);
        T row_loss = -(T{1} - eps) * lp[g];
        if (eps != T{})
            for (T v : lp) row_loss -= uniform * v;
        total += row_loss;
        ++count;
        if (dlogits) {
            for (std::size_t v = 0; v < lp.size(); ++v) (*dlogits)(t, v) = std::exp(lp[v]) - uniform;
            (*dlogits)(t, g) -= T{1} - eps;
        }
    }
    return {total, count};
}

/// Mean cross-entropy over non-PAD positions.
template <class T>
T sequence_loss(const linalg::Matrix<T>& logits, std::span<const TokenId> gold) {
    const auto [sum, count] = cross_entropy<T>(logits, gold);
    if (count == 0) throw ValidationError("loss over an all-padding target");
    return sum / static_cast<T>(count);
}

}  // namespace mundartlex
