// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ilre/tensor.hpp"

namespace ilre {

// Instrumentation for the complexity accounting: one unit per (query row,
// key column) pair scored, counted once regardless of head count.
struct OpCounter {
    std::uint64_t dot_products = 0;
};

// Boolean allow-matrix over (query row, key column). Masks produced by the
// prefill (causal and Lambda-shaped) allow a column prefix per row and are
// stored as row limits; arbitrary masks are stored densely.
class AttentionMask {
public:
    AttentionMask() = default;

    // allow is rows x cols row-major, non-zero = allowed.
    static AttentionMask dense(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> allow);
    // Row r allows columns [0, cols - rows + r]; requires cols >= rows.
    static AttentionMask causal(std::size_t rows, std::size_t cols);
    // Row r allows columns [0, limits[r]).
    static AttentionMask prefix(std::size_t cols, std::vector<std::size_t> limits);

    std::size_t rows() const { return m_rows; }
    std::size_t cols() const { return m_cols; }

    bool allowed(std::size_t r, std::size_t c) const;
    std::size_t allowed_count(std::size_t r) const;
    std::optional<std::size_t> prefix_length(std::size_t r) const;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<std::uint8_t> m_bits;
    std::vector<std::size_t> m_limits;
};

// Softmax over allowed columns of Q K^T / sqrt(d_h), then the weighted sum of V.
// q: H x Tq x dh, k and v: H x Tk x dh. Throws Errc::EmptyRow when a mask row
// allows nothing. When `probs` is given it receives the H x Tq x Tk
// probabilities (zero where masked).
HeadTensor masked_attention(const HeadTensor& q, const HeadTensor& k, const HeadTensor& v, const AttentionMask& mask,
                            OpCounter* counter = nullptr, std::vector<float>* probs = nullptr);

// Rotary encoding: pair (2i, 2i+1) of each row is rotated by
// position * base^(-2i/dh). Applied to every head of `vecs` in place.
void apply_position_encoding(HeadTensor& vecs, std::span<const std::size_t> positions, double base);
void apply_position_encoding(std::span<float> vec, std::size_t position, double base);

} // namespace ilre
