// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/prefill.hpp"

#include <algorithm>
#include <numeric>

#include "ilre/error.hpp"

namespace ilre {
namespace {

std::vector<std::size_t> iota_positions(std::size_t begin, std::size_t count) {
    std::vector<std::size_t> p(count);
    std::iota(p.begin(), p.end(), begin);
    return p;
}

// Appends a processed chunk to the layer cache, then refills the sink from the
// oldest rows and trims the window to its newest `window` rows.
void absorb_chunk(LayerCache& cache, const HeadTensor& keys, const HeadTensor& values,
                  const std::vector<std::size_t>& positions, std::size_t sink, std::size_t window) {
    HeadTensor all_k = concat_rows(concat_rows(cache.sink_k, cache.window_k), keys);
    HeadTensor all_v = concat_rows(concat_rows(cache.sink_v, cache.window_v), values);
    std::vector<std::size_t> all_pos = cache.sink_positions;
    all_pos.insert(all_pos.end(), cache.window_positions.begin(), cache.window_positions.end());
    all_pos.insert(all_pos.end(), positions.begin(), positions.end());

    const std::size_t total = all_pos.size();
    const std::size_t n_sink = std::min(sink, total);
    const std::size_t rest = total - n_sink;
    const std::size_t first_window = n_sink + (rest > window ? rest - window : 0);

    cache.sink_k = all_k.slice_rows(0, n_sink);
    cache.sink_v = all_v.slice_rows(0, n_sink);
    cache.window_k = all_k.slice_rows(first_window, total);
    cache.window_v = all_v.slice_rows(first_window, total);
    cache.sink_positions.assign(all_pos.begin(), all_pos.begin() + static_cast<std::ptrdiff_t>(n_sink));
    cache.window_positions.assign(all_pos.begin() + static_cast<std::ptrdiff_t>(first_window), all_pos.end());
}

LayerCache empty_layer_cache(std::size_t heads, std::size_t dim) {
    LayerCache c;
    c.sink_k = c.sink_v = c.window_k = c.window_v = HeadTensor(heads, 0, dim);
    return c;
}

} // namespace

void StreamConfig::validate(std::size_t n_layers) const {
    if (window < 1) {
        raise(Errc::InvalidArgument, "window must be at least 1");
    }
    if (chunk < 1) {
        raise(Errc::InvalidArgument, "chunk must be at least 1");
    }
    if (retrieval_layer < 1 || retrieval_layer > n_layers) {
        raise(Errc::InvalidArgument, "retrieval layer " + std::to_string(retrieval_layer) + " outside 1.." +
                                         std::to_string(n_layers));
    }
}

AttentionMask LambdaMask::to_attention_mask() const {
    std::vector<std::size_t> limits(chunk_len);
    for (std::size_t r = 0; r < chunk_len; ++r) {
        limits[r] = allowed_count(r);
    }
    return AttentionMask::prefix(cols(), std::move(limits));
}

LambdaMask build_lambda_mask(std::size_t chunk_len, std::size_t sink_len, std::size_t window_len) {
    if (chunk_len < 1) {
        raise(Errc::InvalidArgument, "Lambda mask needs at least one chunk row");
    }
    return {chunk_len, sink_len, window_len};
}

std::vector<std::size_t> chunk_schedule(std::size_t length, std::size_t sink, std::size_t chunk) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    std::size_t next = chunk + sink;
    while (pos < length) {
        const std::size_t n = std::min(next, length - pos);
        out.push_back(n);
        pos += n;
        next = chunk;
    }
    return out;
}

std::size_t StreamCache::lower_layer_cells() const {
    std::size_t cells = 0;
    for (const auto& l : layers) {
        cells += 2 * l.resident_rows();
    }
    return cells;
}

StreamCache stream_prefill_context(const Weights& w, const StreamConfig& config, const TokenSeq& context,
                                   OpCounter* counter) {
    config.validate(w.spec.n_layers);
    const std::size_t length = context.size();
    if (length == 0) {
        raise(Errc::InvalidArgument, "context must contain at least one token");
    }
    const std::size_t heads = w.spec.n_heads;
    const std::size_t dh = w.spec.head_dim();
    const std::size_t lr = config.retrieval_layer;

    StreamCache cache;
    cache.config = config;
    cache.context_length = length;
    cache.layers.assign(lr - 1, empty_layer_cache(heads, dh));
    cache.full_keys = HeadTensor(heads, length, dh);

    std::size_t begin = 0;
    for (const std::size_t n : chunk_schedule(length, config.sink, config.chunk)) {
        const auto positions = iota_positions(begin, n);
        Matrix x = embed(w, std::span<const TokenId>(context.ids).subspan(begin, n));
        for (std::size_t l = 1; l < lr; ++l) {
            LayerCache& lc = cache.layers[l - 1];
            const HeadTensor cache_k = concat_rows(lc.sink_k, lc.window_k);
            const HeadTensor cache_v = concat_rows(lc.sink_v, lc.window_v);
            const LambdaMask mask = build_lambda_mask(n, lc.sink_positions.size(), lc.window_positions.size());
            LayerOutput out = layer_forward(w, l, x, cache_k, cache_v, positions, mask.to_attention_mask(), counter);
            cache.stats.peak_attended_rows = std::max(cache.stats.peak_attended_rows, mask.cols());
            absorb_chunk(lc, out.keys, out.values, positions, config.sink, config.window);
            cache.stats.peak_resident_rows = std::max(cache.stats.peak_resident_rows, lc.resident_rows());
            x = std::move(out.hidden);
        }
        const HeadTensor keys = layer_keys(w, lr, x, positions);
        for (std::size_t h = 0; h < heads; ++h) {
            auto src = keys.head(h);
            std::copy(src.begin(), src.end(), cache.full_keys.row(h, begin).begin());
        }
        cache.cursor += n;
        ++cache.stats.chunks;
        begin += n;
    }
    return cache;
}

HeadTensor prefill_query_part(const Weights& w, const StreamCache& cache, const TokenSeq& query, OpCounter* counter) {
    return prefill_query_part(w, cache, query, cache.context_length, counter);
}

HeadTensor prefill_query_part(const Weights& w, const StreamCache& cache, const TokenSeq& query,
                              std::size_t start_position, OpCounter* counter) {
    if (query.empty()) {
        raise(Errc::EmptyQuery, "query part has no tokens");
    }
    const std::size_t lr = cache.config.retrieval_layer;
    if (cache.layers.size() + 1 != lr) {
        raise(Errc::InvalidArgument, "stream cache does not match its retrieval layer");
    }
    const std::size_t n = query.size();
    const auto positions = iota_positions(start_position, n);
    Matrix x = embed(w, query.ids);
    for (std::size_t l = 1; l < lr; ++l) {
        const LayerCache& lc = cache.layers[l - 1];
        const LambdaMask mask = build_lambda_mask(n, lc.sink_positions.size(), lc.window_positions.size());
        LayerOutput out = layer_forward(w, l, x, concat_rows(lc.sink_k, lc.window_k),
                                        concat_rows(lc.sink_v, lc.window_v), positions, mask.to_attention_mask(),
                                        counter);
        x = std::move(out.hidden);
    }
    return layer_queries(w, lr, x, positions);
}

} // namespace ilre
