// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ilre/attention.hpp"
#include "ilre/tensor.hpp"
#include "ilre/text_codec.hpp"

namespace ilre {

// H x Lq x L softmax probabilities of query rows over all context keys.
struct AttentionProbs {
    std::size_t heads = 0;
    std::size_t queries = 0;
    std::size_t keys = 0;
    std::vector<float> values;

    float at(std::size_t h, std::size_t q, std::size_t c) const { return values[(h * queries + q) * keys + c]; }
};

// Reduced per-position scores over the non-sink context; values[c] belongs to
// absolute context index origin + c.
struct ScoreVector {
    std::vector<double> values;
    std::size_t origin = 0;

    std::size_t size() const { return values.size(); }
};

struct PoolingConfig {
    std::vector<std::size_t> max_kernels{2, 4, 8};
    std::vector<std::size_t> avg_kernels{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
    std::size_t budget = 1024;

    std::size_t combinations() const { return max_kernels.size() * avg_kernels.size(); }
    void validate() const;

    // Kernel sets of the ablation study.
    static PoolingConfig defaults(std::size_t budget);
    static PoolingConfig less_max_kernels(std::size_t budget); // max {4}
    static PoolingConfig less_avg_kernels(std::size_t budget); // avg 1..9
    static PoolingConfig one_max_avg(std::size_t budget);      // max {4}, avg {5}
    // Plain top-k selection: one max kernel of size 1 and one avg kernel.
    static PoolingConfig snapkv(std::size_t budget, std::size_t avg_kernel = 1);

    bool operator==(const PoolingConfig&) const = default;
};

// softmax(q K^T / sqrt(dh)) over all L keys, per head and query row. Each
// (query row, key) pair counts one dot product.
AttentionProbs query_context_scores(const HeadTensor& query_states, const HeadTensor& full_keys,
                                    OpCounter* counter = nullptr);

// out[c] = max over heads and query rows of A[h, q, sink + c].
// Throws Errc::DegenerateContext when L <= sink.
ScoreVector reduce_scores(const AttentionProbs& probs, std::size_t sink);

// Max pooling with size = stride = m; a trailing partial window pools what it has.
std::vector<double> max_pool(const std::vector<double>& values, std::size_t m);

// Sums of n consecutive entries, stride 1, with n clamped to the input length.
// Ranking by these sums is ranking by the average.
std::vector<double> window_sums(const std::vector<double>& pooled, std::size_t n);

// Candidate absolute indices for one (max kernel, avg kernel) combination:
// avg windows ranked by value (ties: lower position), each window expanded to
// its context offsets in ascending order. Offsets repeat across overlapping
// windows; the allocator skips what it already holds.
class CandidateStream {
public:
    CandidateStream(const ScoreVector& scores, std::size_t max_kernel, std::size_t avg_kernel,
                    std::size_t max_windows = std::numeric_limits<std::size_t>::max());

    std::optional<std::size_t> next();
    std::vector<std::size_t> drain();

    // Ranked avg-window positions (after the max_windows cap).
    const std::vector<std::size_t>& ranked_windows() const { return m_ranked; }
    // Inclusive range of non-sink offsets covered by avg window a.
    std::size_t window_first(std::size_t a) const { return a * m_max_kernel; }
    std::size_t window_last(std::size_t a) const;

private:
    std::size_t m_origin = 0;
    std::size_t m_length = 0;
    std::size_t m_max_kernel = 1;
    std::size_t m_avg_span = 1;
    std::vector<std::size_t> m_ranked;
    std::size_t m_window = 0;
    std::size_t m_offset = 0;
};

CandidateStream pooled_ranking(const ScoreVector& scores, std::size_t max_kernel, std::size_t avg_kernel,
                               std::size_t max_windows = std::numeric_limits<std::size_t>::max());

// Top-window cap per max kernel: floor(B / m) + 1.
std::size_t top_window_cap(std::size_t budget, std::size_t max_kernel);

struct AllocationResult {
    std::vector<std::size_t> indices; // ascending, unique, includes the sink
    TokenSeq compressed;
    std::size_t topped_up = 0; // indices added by the final m=1, n=1 pass
};

// Distributes the budget over every (max, avg) kernel combination in order,
// deduplicating against indices already held, then tops up any shortfall from
// the plain ranking. |indices| = min(sink + budget, L).
AllocationResult context_allocate(const ScoreVector& scores, const PoolingConfig& cfg, const TokenSeq& context,
                                  std::size_t sink);

} // namespace ilre
