// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ilre/attention.hpp"
#include "ilre/tensor.hpp"
#include "ilre/text_codec.hpp"

namespace ilre {

// Dimensions of the toy decoder. Layers are numbered 1..n_layers.
struct ModelSpec {
    TokenId vocab = 32768;
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_layers = 4;
    std::size_t ffn_dim = 0; // 0 selects 4 * d_model
    std::uint64_t seed = 0;
    double rope_base = 10000.0;

    std::size_t head_dim() const { return d_model / n_heads; }
    std::size_t ffn() const { return ffn_dim == 0 ? 4 * d_model : ffn_dim; }

    // Throws Errc::DimensionMismatch when d_model % n_heads != 0 or the head dim
    // is odd, Errc::InvalidArgument for other invalid fields.
    void validate() const;

    bool operator==(const ModelSpec&) const = default;
};

struct LayerWeights {
    std::vector<float> attn_norm; // d
    Matrix wq, wk, wv, wo;        // d x d
    std::vector<float> ffn_norm;  // d
    Matrix w_up;                  // d x ffn
    Matrix w_down;                // ffn x d

    bool operator==(const LayerWeights&) const = default;
};

// Immutable after build_model(); safe to share across threads.
struct Weights {
    ModelSpec spec;
    Matrix embedding; // vocab x d
    std::vector<LayerWeights> layers;

    const LayerWeights& layer(std::size_t l) const; // 1-based

    bool operator==(const Weights&) const = default;
};

// Every projection block is drawn uniform in [-1/sqrt(d), 1/sqrt(d)] from a
// counter-based generator keyed by (seed, block name); norm gains are 1.
Weights build_model(const ModelSpec& spec);

// Embedding rows for the given ids (T x d).
Matrix embed(const Weights& w, std::span<const TokenId> ids);

struct LayerOutput {
    Matrix hidden;     // T x d
    HeadTensor keys;   // H x T x dh, rotary-encoded
    HeadTensor values; // H x T x dh
};

// One pre-norm block. cache_k/cache_v (H x C x dh, already encoded) precede the
// new tokens' keys/values in the attention columns; mask is T x (C + T).
LayerOutput layer_forward(const Weights& w, std::size_t layer, const Matrix& input, const HeadTensor& cache_k,
                          const HeadTensor& cache_v, std::span<const std::size_t> positions, const AttentionMask& mask,
                          OpCounter* counter = nullptr);

// Rotary-encoded key (or query) states of `layer` for the input hidden states,
// without running the rest of the block.
HeadTensor layer_keys(const Weights& w, std::size_t layer, const Matrix& input, std::span<const std::size_t> positions);
HeadTensor layer_queries(const Weights& w, std::size_t layer, const Matrix& input,
                         std::span<const std::size_t> positions);

} // namespace ilre
