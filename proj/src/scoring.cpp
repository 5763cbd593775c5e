// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ilre/error.hpp"
#include "ilre/kernels.hpp"

namespace ilre {

void PoolingConfig::validate() const {
    if (max_kernels.empty() || avg_kernels.empty()) {
        raise(Errc::InvalidArgument, "pooling needs at least one max and one avg kernel");
    }
    for (std::size_t k : max_kernels) {
        if (k < 1) {
            raise(Errc::InvalidArgument, "max kernel sizes must be >= 1");
        }
    }
    for (std::size_t k : avg_kernels) {
        if (k < 1) {
            raise(Errc::InvalidArgument, "avg kernel sizes must be >= 1");
        }
    }
}

PoolingConfig PoolingConfig::defaults(std::size_t budget) {
    PoolingConfig c;
    c.budget = budget;
    return c;
}

PoolingConfig PoolingConfig::less_max_kernels(std::size_t budget) {
    PoolingConfig c = defaults(budget);
    c.max_kernels = {4};
    return c;
}

PoolingConfig PoolingConfig::less_avg_kernels(std::size_t budget) {
    PoolingConfig c = defaults(budget);
    c.avg_kernels = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    return c;
}

PoolingConfig PoolingConfig::one_max_avg(std::size_t budget) {
    return {{4}, {5}, budget};
}

PoolingConfig PoolingConfig::snapkv(std::size_t budget, std::size_t avg_kernel) {
    return {{1}, {avg_kernel}, budget};
}

AttentionProbs query_context_scores(const HeadTensor& query_states, const HeadTensor& full_keys, OpCounter* counter) {
    if (query_states.heads() != full_keys.heads() || query_states.dim() != full_keys.dim()) {
        raise(Errc::DimensionMismatch, "query states and key store disagree in heads or head dim");
    }
    if (full_keys.rows() == 0) {
        raise(Errc::InvalidArgument, "key store is empty");
    }
    AttentionProbs out;
    out.heads = query_states.heads();
    out.queries = query_states.rows();
    out.keys = full_keys.rows();
    out.values.resize(out.heads * out.queries * out.keys);

    const auto& kern = kernels::active();
    const float scale = 1.0f / std::sqrt(static_cast<float>(query_states.dim()));
    for (std::size_t h = 0; h < out.heads; ++h) {
        for (std::size_t q = 0; q < out.queries; ++q) {
            float* row = out.values.data() + (h * out.queries + q) * out.keys;
            kern.dot_rows(query_states.row(h, q).data(), full_keys.head(h).data(), out.keys, full_keys.dim(), scale,
                          row);
            const float peak = kern.max_value(row, out.keys);
            const double sum = kern.exp_shift_sum(row, out.keys, peak);
            kern.scale(row, out.keys, static_cast<float>(1.0 / sum));
        }
    }
    if (counter != nullptr) {
        counter->dot_products += static_cast<std::uint64_t>(out.queries) * out.keys;
    }
    return out;
}

ScoreVector reduce_scores(const AttentionProbs& probs, std::size_t sink) {
    if (probs.keys <= sink) {
        raise(Errc::DegenerateContext, "context of " + std::to_string(probs.keys) + " tokens has nothing past a sink of " +
                                           std::to_string(sink));
    }
    ScoreVector out;
    out.origin = sink;
    out.values.assign(probs.keys - sink, 0.0);
    for (std::size_t h = 0; h < probs.heads; ++h) {
        for (std::size_t q = 0; q < probs.queries; ++q) {
            const float* row = probs.values.data() + (h * probs.queries + q) * probs.keys + sink;
            for (std::size_t c = 0; c < out.values.size(); ++c) {
                out.values[c] = std::max(out.values[c], static_cast<double>(row[c]));
            }
        }
    }
    return out;
}

std::vector<double> max_pool(const std::vector<double>& values, std::size_t m) {
    if (m < 1) {
        raise(Errc::InvalidArgument, "max kernel must be >= 1");
    }
    std::vector<double> pooled((values.size() + m - 1) / m);
    for (std::size_t p = 0; p < pooled.size(); ++p) {
        const auto first = values.begin() + static_cast<std::ptrdiff_t>(p * m);
        const auto last = values.begin() + static_cast<std::ptrdiff_t>(std::min((p + 1) * m, values.size()));
        pooled[p] = *std::max_element(first, last);
    }
    return pooled;
}

std::vector<double> window_sums(const std::vector<double>& pooled, std::size_t n) {
    if (pooled.empty()) {
        return {};
    }
    const std::size_t span = std::min(std::max<std::size_t>(n, 1), pooled.size());
    std::vector<double> sums(pooled.size() - span + 1);
    for (std::size_t a = 0; a < sums.size(); ++a) {
        double s = 0.0;
        for (std::size_t k = 0; k < span; ++k) {
            s += pooled[a + k];
        }
        sums[a] = s;
    }
    return sums;
}

CandidateStream::CandidateStream(const ScoreVector& scores, std::size_t max_kernel, std::size_t avg_kernel,
                                 std::size_t max_windows)
    : m_origin(scores.origin), m_length(scores.size()), m_max_kernel(max_kernel) {
    if (max_kernel < 1 || avg_kernel < 1) {
        raise(Errc::InvalidArgument, "kernel sizes must be >= 1");
    }
    if (scores.values.empty()) {
        return;
    }
    const std::vector<double> pooled = max_pool(scores.values, max_kernel);
    m_avg_span = std::min(avg_kernel, pooled.size());
    const std::vector<double> sums = window_sums(pooled, m_avg_span);

    m_ranked.resize(sums.size());
    std::iota(m_ranked.begin(), m_ranked.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) { return sums[a] > sums[b] || (sums[a] == sums[b] && a < b); };
    if (max_windows < m_ranked.size()) {
        std::partial_sort(m_ranked.begin(), m_ranked.begin() + static_cast<std::ptrdiff_t>(max_windows),
                          m_ranked.end(), better);
        m_ranked.resize(max_windows);
    } else {
        std::sort(m_ranked.begin(), m_ranked.end(), better);
    }
    if (!m_ranked.empty()) {
        m_offset = window_first(m_ranked.front());
    }
}

std::size_t CandidateStream::window_last(std::size_t a) const {
    return std::min((a + m_avg_span) * m_max_kernel, m_length) - 1;
}

std::optional<std::size_t> CandidateStream::next() {
    while (m_window < m_ranked.size()) {
        const std::size_t a = m_ranked[m_window];
        if (m_offset <= window_last(a)) {
            return m_origin + m_offset++;
        }
        if (++m_window < m_ranked.size()) {
            m_offset = window_first(m_ranked[m_window]);
        }
    }
    return std::nullopt;
}

std::vector<std::size_t> CandidateStream::drain() {
    std::vector<std::size_t> out;
    while (auto i = next()) {
        out.push_back(*i);
    }
    return out;
}

CandidateStream pooled_ranking(const ScoreVector& scores, std::size_t max_kernel, std::size_t avg_kernel,
                               std::size_t max_windows) {
    return CandidateStream(scores, max_kernel, avg_kernel, max_windows);
}

std::size_t top_window_cap(std::size_t budget, std::size_t max_kernel) {
    return budget / max_kernel + 1;
}

AllocationResult context_allocate(const ScoreVector& scores, const PoolingConfig& cfg, const TokenSeq& context,
                                  std::size_t sink) {
    cfg.validate();
    const std::size_t length = context.size();
    const std::size_t n_sink = std::min(sink, length);
    const std::size_t budget = cfg.budget;

    AllocationResult result;
    if (n_sink + budget >= length) {
        result.indices.resize(length);
        std::iota(result.indices.begin(), result.indices.end(), std::size_t{0});
        result.compressed.ids = context.ids;
        return result;
    }
    if (scores.size() + sink != length || scores.origin != sink) {
        raise(Errc::DimensionMismatch, "score vector must cover context positions sink..L-1");
    }
    for (double v : scores.values) {
        if (!std::isfinite(v)) {
            raise(Errc::InvalidArgument, "score vector contains a non-finite value");
        }
    }

    std::vector<std::uint8_t> taken(length, 0);
    std::size_t held = 0;
    auto take = [&](std::size_t i) {
        if (taken[i] != 0) {
            return false;
        }
        taken[i] = 1;
        ++held;
        return true;
    };
    for (std::size_t i = 0; i < n_sink; ++i) {
        take(i);
    }

    const std::size_t combos = cfg.combinations();
    const std::size_t per_combo = budget / combos;
    const std::size_t remainder = budget % combos;
    std::size_t combo = 0;
    for (std::size_t m : cfg.max_kernels) {
        const std::size_t cap = top_window_cap(budget, m);
        for (std::size_t n : cfg.avg_kernels) {
            const std::size_t quota = per_combo + (combo < remainder ? 1 : 0);
            ++combo;
            if (quota == 0) {
                continue;
            }
            CandidateStream stream(scores, m, n, cap);
            std::size_t got = 0;
            while (got < quota) {
                const auto i = stream.next();
                if (!i) {
                    break;
                }
                if (take(*i)) {
                    ++got;
                }
            }
        }
    }

    const std::size_t target = n_sink + budget;
    if (held < target) {
        CandidateStream plain(scores, 1, 1);
        while (held < target) {
            const auto i = plain.next();
            if (!i) {
                break;
            }
            if (take(*i)) {
                ++result.topped_up;
            }
        }
    }

    result.indices.reserve(held);
    for (std::size_t i = 0; i < length; ++i) {
        if (taken[i] != 0) {
            result.indices.push_back(i);
        }
    }
    result.compressed = gather(context, result.indices);
    return result;
}

} // namespace ilre
