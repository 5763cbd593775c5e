// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ilre/error.hpp"
#include "ilre/kernels.hpp"

namespace ilre {

AttentionMask AttentionMask::dense(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> allow) {
    if (allow.size() != rows * cols) {
        raise(Errc::DimensionMismatch, "dense mask size must be rows * cols");
    }
    AttentionMask m;
    m.m_rows = rows;
    m.m_cols = cols;
    m.m_bits = std::move(allow);
    return m;
}

AttentionMask AttentionMask::causal(std::size_t rows, std::size_t cols) {
    if (cols < rows) {
        raise(Errc::DimensionMismatch, "causal mask needs at least as many columns as rows");
    }
    std::vector<std::size_t> limits(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        limits[r] = cols - rows + r + 1;
    }
    return prefix(cols, std::move(limits));
}

AttentionMask AttentionMask::prefix(std::size_t cols, std::vector<std::size_t> limits) {
    for (std::size_t lim : limits) {
        if (lim > cols) {
            raise(Errc::DimensionMismatch, "prefix mask limit exceeds column count");
        }
    }
    AttentionMask m;
    m.m_rows = limits.size();
    m.m_cols = cols;
    m.m_limits = std::move(limits);
    return m;
}

bool AttentionMask::allowed(std::size_t r, std::size_t c) const {
    if (!m_limits.empty() || m_bits.empty()) {
        return r < m_limits.size() && c < m_limits[r];
    }
    return m_bits[r * m_cols + c] != 0;
}

std::size_t AttentionMask::allowed_count(std::size_t r) const {
    if (m_bits.empty()) {
        return m_limits[r];
    }
    const auto first = m_bits.begin() + static_cast<std::ptrdiff_t>(r * m_cols);
    return static_cast<std::size_t>(std::count_if(first, first + static_cast<std::ptrdiff_t>(m_cols),
                                                  [](std::uint8_t b) { return b != 0; }));
}

std::optional<std::size_t> AttentionMask::prefix_length(std::size_t r) const {
    if (m_bits.empty()) {
        return m_limits[r];
    }
    return std::nullopt;
}

HeadTensor masked_attention(const HeadTensor& q, const HeadTensor& k, const HeadTensor& v, const AttentionMask& mask,
                            OpCounter* counter, std::vector<float>* probs) {
    const std::size_t heads = q.heads();
    const std::size_t tq = q.rows();
    const std::size_t tk = k.rows();
    const std::size_t dim = q.dim();
    if (k.heads() != heads || v.heads() != heads || k.dim() != dim || v.dim() != dim || v.rows() != tk) {
        raise(Errc::DimensionMismatch, "masked_attention: Q/K/V shapes disagree");
    }
    if (mask.rows() != tq || mask.cols() != tk) {
        raise(Errc::DimensionMismatch, "masked_attention: mask is " + std::to_string(mask.rows()) + "x" +
                                           std::to_string(mask.cols()) + ", expected " + std::to_string(tq) + "x" +
                                           std::to_string(tk));
    }
    std::uint64_t pairs = 0;
    for (std::size_t r = 0; r < tq; ++r) {
        const std::size_t n = mask.allowed_count(r);
        if (n == 0) {
            raise(Errc::EmptyRow, "mask row " + std::to_string(r) + " allows no columns");
        }
        pairs += n;
    }
    if (counter != nullptr) {
        counter->dot_products += pairs;
    }
    if (probs != nullptr) {
        probs->assign(heads * tq * tk, 0.0f);
    }

    const auto& kern = kernels::active();
    const float scale = 1.0f / std::sqrt(static_cast<float>(dim));
    constexpr float neg_inf = -std::numeric_limits<float>::infinity();

    HeadTensor out(heads, tq, dim);
    std::vector<float> logits(tk);
    for (std::size_t h = 0; h < heads; ++h) {
        const float* keys = k.head(h).data();
        const float* values = v.head(h).data();
        for (std::size_t r = 0; r < tq; ++r) {
            const auto limit = mask.prefix_length(r);
            const std::size_t n = limit.value_or(tk);
            kern.dot_rows(q.row(h, r).data(), keys, n, dim, scale, logits.data());
            if (!limit) {
                for (std::size_t c = 0; c < tk; ++c) {
                    if (!mask.allowed(r, c)) {
                        logits[c] = neg_inf;
                    }
                }
            }
            const float peak = kern.max_value(logits.data(), n);
            const double sum = kern.exp_shift_sum(logits.data(), n, peak);
            kern.scale(logits.data(), n, static_cast<float>(1.0 / sum));
            kern.weighted_row_sum(logits.data(), values, n, dim, out.row(h, r).data());
            if (probs != nullptr) {
                std::copy(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(n),
                          probs->begin() + static_cast<std::ptrdiff_t>((h * tq + r) * tk));
            }
        }
    }
    return out;
}

} // namespace ilre
