// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/model.hpp"

#include <cmath>

#include "ilre/error.hpp"
#include "ilre/kernels.hpp"

namespace ilre {
namespace {

constexpr double kNormEps = 1e-6;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// value_i = f(key(seed, name), i): any block can be regenerated independently.
void fill_uniform(std::span<float> out, std::uint64_t seed, const std::string& name, double bound) {
    const std::uint64_t key = splitmix64(seed ^ fnv1a64(name));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t bits = splitmix64(key + 0xD1B54A32D192ED03ull * (static_cast<std::uint64_t>(i) + 1));
        const double unit = static_cast<double>(bits >> 40) * 0x1.0p-24; // [0, 1)
        out[i] = static_cast<float>((2.0 * unit - 1.0) * bound);
    }
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, const std::string& name, double bound) {
    Matrix m(rows, cols);
    fill_uniform(m.data(), seed, name, bound);
    return m;
}

void rms_norm(std::span<const float> x, std::span<const float> gain, std::span<float> out) {
    const double ms = kernels::active().sum_squares(x.data(), x.size()) / static_cast<double>(x.size());
    const double inv = 1.0 / std::sqrt(ms + kNormEps);
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = static_cast<float>(x[j] * inv) * gain[j];
    }
}

Matrix rms_norm_rows(const Matrix& x, std::span<const float> gain) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t t = 0; t < x.rows(); ++t) {
        rms_norm(x.row(t), gain, out.row(t));
    }
    return out;
}

// y = x * W for W stored in x in_dim x out_dim row-major.
void matvec(std::span<const float> x, const Matrix& w, std::span<float> y) {
    kernels::active().weighted_row_sum(x.data(), w.data().data(), w.rows(), w.cols(), y.data());
}

HeadTensor project_heads(const Matrix& normed, const Matrix& w, std::size_t heads) {
    const std::size_t d = w.cols();
    const std::size_t dh = d / heads;
    HeadTensor out(heads, normed.rows(), dh);
    std::vector<float> tmp(d);
    for (std::size_t t = 0; t < normed.rows(); ++t) {
        matvec(normed.row(t), w, tmp);
        for (std::size_t h = 0; h < heads; ++h) {
            auto dst = out.row(h, t);
            std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(h * dh),
                      tmp.begin() + static_cast<std::ptrdiff_t>((h + 1) * dh), dst.begin());
        }
    }
    return out;
}

float gelu(float x) {
    return static_cast<float>(0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))));
}

void check_layer(const Weights& w, std::size_t layer, const Matrix& input, std::span<const std::size_t> positions) {
    if (layer < 1 || layer > w.layers.size()) {
        raise(Errc::InvalidArgument, "layer index " + std::to_string(layer) + " outside 1.." +
                                         std::to_string(w.layers.size()));
    }
    if (input.rows() != 0 && input.cols() != w.spec.d_model) {
        raise(Errc::DimensionMismatch, "hidden state width differs from d_model");
    }
    if (positions.size() != input.rows()) {
        raise(Errc::DimensionMismatch, "positions length must equal token count");
    }
}

} // namespace

void ModelSpec::validate() const {
    if (d_model == 0 || n_heads == 0 || n_layers == 0 || vocab <= Vocab::reserved || rope_base <= 0.0) {
        raise(Errc::InvalidArgument, "model dimensions must be positive");
    }
    if (d_model % n_heads != 0) {
        raise(Errc::DimensionMismatch,
              "d_model " + std::to_string(d_model) + " not divisible by heads " + std::to_string(n_heads));
    }
    if (head_dim() % 2 != 0) {
        raise(Errc::DimensionMismatch, "head dim must be even for rotary encoding");
    }
    if (n_layers < 2) {
        raise(Errc::InvalidArgument, "model needs at least 2 layers");
    }
}

const LayerWeights& Weights::layer(std::size_t l) const {
    if (l < 1 || l > layers.size()) {
        raise(Errc::InvalidArgument, "layer index out of range");
    }
    return layers[l - 1];
}

Weights build_model(const ModelSpec& spec) {
    spec.validate();
    const std::size_t d = spec.d_model;
    const std::size_t f = spec.ffn();
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));

    Weights w;
    w.spec = spec;
    w.embedding = uniform_matrix(static_cast<std::size_t>(spec.vocab), d, spec.seed, "embedding", bound);
    w.layers.resize(spec.n_layers);
    for (std::size_t l = 0; l < spec.n_layers; ++l) {
        const std::string prefix = "layers." + std::to_string(l + 1) + ".";
        auto& lw = w.layers[l];
        lw.attn_norm.assign(d, 1.0f);
        lw.wq = uniform_matrix(d, d, spec.seed, prefix + "wq", bound);
        lw.wk = uniform_matrix(d, d, spec.seed, prefix + "wk", bound);
        lw.wv = uniform_matrix(d, d, spec.seed, prefix + "wv", bound);
        lw.wo = uniform_matrix(d, d, spec.seed, prefix + "wo", bound);
        lw.ffn_norm.assign(d, 1.0f);
        lw.w_up = uniform_matrix(d, f, spec.seed, prefix + "w_up", bound);
        lw.w_down = uniform_matrix(f, d, spec.seed, prefix + "w_down", bound);
    }
    return w;
}

Matrix embed(const Weights& w, std::span<const TokenId> ids) {
    Matrix x(ids.size(), w.spec.d_model);
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] < 0 || ids[t] >= w.spec.vocab) {
            raise(Errc::InvalidArgument, "token id " + std::to_string(ids[t]) + " outside vocabulary");
        }
        auto src = w.embedding.row(static_cast<std::size_t>(ids[t]));
        std::copy(src.begin(), src.end(), x.row(t).begin());
    }
    return x;
}

LayerOutput layer_forward(const Weights& w, std::size_t layer, const Matrix& input, const HeadTensor& cache_k,
                          const HeadTensor& cache_v, std::span<const std::size_t> positions, const AttentionMask& mask,
                          OpCounter* counter) {
    check_layer(w, layer, input, positions);
    const auto& spec = w.spec;
    const auto& lw = w.layer(layer);
    const std::size_t heads = spec.n_heads;
    const std::size_t dh = spec.head_dim();
    const std::size_t d = spec.d_model;
    const std::size_t t_new = input.rows();

    if (t_new == 0) {
        return {Matrix(0, d), HeadTensor(heads, 0, dh), HeadTensor(heads, 0, dh)};
    }
    if (cache_k.rows() != cache_v.rows()) {
        raise(Errc::DimensionMismatch, "key and value caches differ in length");
    }

    const Matrix normed = rms_norm_rows(input, lw.attn_norm);
    HeadTensor q = project_heads(normed, lw.wq, heads);
    HeadTensor k = project_heads(normed, lw.wk, heads);
    HeadTensor v = project_heads(normed, lw.wv, heads);
    apply_position_encoding(q, positions, spec.rope_base);
    apply_position_encoding(k, positions, spec.rope_base);

    const HeadTensor all_k = concat_rows(cache_k, k);
    const HeadTensor all_v = concat_rows(cache_v, v);
    const HeadTensor attn = masked_attention(q, all_k, all_v, mask, counter);

    Matrix hidden(t_new, d);
    std::vector<float> merged(d);
    std::vector<float> proj(d);
    std::vector<float> normed2(d);
    std::vector<float> up(spec.ffn());
    std::vector<float> down(d);
    for (std::size_t t = 0; t < t_new; ++t) {
        for (std::size_t h = 0; h < heads; ++h) {
            auto src = attn.row(h, t);
            std::copy(src.begin(), src.end(), merged.begin() + static_cast<std::ptrdiff_t>(h * dh));
        }
        matvec(merged, lw.wo, proj);
        auto x = input.row(t);
        auto out = hidden.row(t);
        for (std::size_t j = 0; j < d; ++j) {
            out[j] = x[j] + proj[j];
        }
        rms_norm(out, lw.ffn_norm, normed2);
        matvec(normed2, lw.w_up, up);
        for (auto& u : up) {
            u = gelu(u);
        }
        matvec(up, lw.w_down, down);
        for (std::size_t j = 0; j < d; ++j) {
            out[j] += down[j];
        }
    }
    return {std::move(hidden), std::move(k), std::move(v)};
}

HeadTensor layer_keys(const Weights& w, std::size_t layer, const Matrix& input, std::span<const std::size_t> positions) {
    check_layer(w, layer, input, positions);
    const auto& lw = w.layer(layer);
    if (input.rows() == 0) {
        return HeadTensor(w.spec.n_heads, 0, w.spec.head_dim());
    }
    HeadTensor k = project_heads(rms_norm_rows(input, lw.attn_norm), lw.wk, w.spec.n_heads);
    apply_position_encoding(k, positions, w.spec.rope_base);
    return k;
}

HeadTensor layer_queries(const Weights& w, std::size_t layer, const Matrix& input,
                         std::span<const std::size_t> positions) {
    check_layer(w, layer, input, positions);
    const auto& lw = w.layer(layer);
    if (input.rows() == 0) {
        return HeadTensor(w.spec.n_heads, 0, w.spec.head_dim());
    }
    HeadTensor q = project_heads(rms_norm_rows(input, lw.attn_norm), lw.wq, w.spec.n_heads);
    apply_position_encoding(q, positions, w.spec.rope_base);
    return q;
}

} // namespace ilre
