// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "ilre/attention.hpp"
#include "ilre/model.hpp"
#include "ilre/tensor.hpp"
#include "ilre/text_codec.hpp"

namespace ilre {

struct StreamConfig {
    std::size_t sink = 4;
    std::size_t window = 512;
    std::size_t chunk = 1024; // the first chunk carries `sink` extra tokens
    std::size_t retrieval_layer = 1;

    void validate(std::size_t n_layers) const;

    bool operator==(const StreamConfig&) const = default;
};

// Attention mask for one chunk against a sink + window cache. Columns are the
// sink rows, then the window rows (ascending position), then the chunk rows.
// Row r sees every sink and window column and chunk columns 0..r.
struct LambdaMask {
    std::size_t chunk_len = 0;
    std::size_t sink_len = 0;
    std::size_t window_len = 0;

    std::size_t rows() const { return chunk_len; }
    std::size_t cols() const { return sink_len + window_len + chunk_len; }
    bool allowed(std::size_t r, std::size_t c) const { return c < sink_len + window_len + r + 1; }
    std::size_t allowed_count(std::size_t r) const { return sink_len + window_len + r + 1; }

    AttentionMask to_attention_mask() const;
};

LambdaMask build_lambda_mask(std::size_t chunk_len, std::size_t sink_len, std::size_t window_len);

// Chunk lengths used to stream a context of `length` tokens.
std::vector<std::size_t> chunk_schedule(std::size_t length, std::size_t sink, std::size_t chunk);

// Sink and sliding-window key/value rows of one layer below the retrieval layer.
struct LayerCache {
    HeadTensor sink_k, sink_v;
    HeadTensor window_k, window_v;
    std::vector<std::size_t> sink_positions;
    std::vector<std::size_t> window_positions; // ascending, contiguous

    std::size_t resident_rows() const { return sink_positions.size() + window_positions.size(); }
};

struct StreamStats {
    std::size_t chunks = 0;
    std::size_t peak_attended_rows = 0; // cache + chunk rows seen by one attention call
    std::size_t peak_resident_rows = 0; // cache rows between chunks
};

struct StreamCache {
    StreamConfig config;
    std::size_t context_length = 0;
    std::vector<LayerCache> layers; // layers 1 .. retrieval_layer - 1
    HeadTensor full_keys;           // H x L x dh at the retrieval layer, row i = position i
    std::size_t cursor = 0;         // rows of full_keys written so far
    StreamStats stats;

    // Key + value rows held below the retrieval layer (per head).
    std::size_t lower_layer_cells() const;
    std::size_t retrieval_key_cells() const { return cursor; }
};

// Streams the context through layers 1..l_R-1 chunk by chunk with Lambda masks,
// keeps only sink + window rows per layer, and fills the full-length key store
// at layer l_R. Layers above l_R are never evaluated. Positions are absolute
// token indices. A context shorter than the sink becomes all-sink.
StreamCache stream_prefill_context(const Weights& w, const StreamConfig& config, const TokenSeq& context,
                                   OpCounter* counter = nullptr);

// Runs the query tokens (positions start_position..) through layers 1..l_R-1
// against the sink + window caches and returns rotary-encoded query states of
// layer l_R (H x Lq x dh). Throws Errc::EmptyQuery for an empty query.
HeadTensor prefill_query_part(const Weights& w, const StreamCache& cache, const TokenSeq& query,
                              OpCounter* counter = nullptr);
HeadTensor prefill_query_part(const Weights& w, const StreamCache& cache, const TokenSeq& query,
                              std::size_t start_position, OpCounter* counter = nullptr);

} // namespace ilre
