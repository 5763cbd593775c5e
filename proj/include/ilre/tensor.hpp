// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ilre {

// Row-major rows x cols float matrix. Used for hidden states (T x d) and weights.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : m_rows(rows), m_cols(cols), m_data(rows * cols, 0.0f) {}

    std::size_t rows() const { return m_rows; }
    std::size_t cols() const { return m_cols; }

    std::span<float> row(std::size_t r) { return {m_data.data() + r * m_cols, m_cols}; }
    std::span<const float> row(std::size_t r) const { return {m_data.data() + r * m_cols, m_cols}; }

    float& operator()(std::size_t r, std::size_t c) { return m_data[r * m_cols + c]; }
    float operator()(std::size_t r, std::size_t c) const { return m_data[r * m_cols + c]; }

    std::vector<float>& data() { return m_data; }
    const std::vector<float>& data() const { return m_data; }

    // Rows [begin, end) as a new matrix.
    Matrix slice_rows(std::size_t begin, std::size_t end) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<float> m_data;
};

// Per-head row blocks laid out [head][row][dim]. Holds Q/K/V states.
class HeadTensor {
public:
    HeadTensor() = default;
    HeadTensor(std::size_t heads, std::size_t rows, std::size_t dim)
        : m_heads(heads), m_rows(rows), m_dim(dim), m_data(heads * rows * dim, 0.0f) {}

    std::size_t heads() const { return m_heads; }
    std::size_t rows() const { return m_rows; }
    std::size_t dim() const { return m_dim; }
    bool empty() const { return m_rows == 0; }

    std::span<float> row(std::size_t h, std::size_t r) { return {m_data.data() + (h * m_rows + r) * m_dim, m_dim}; }
    std::span<const float> row(std::size_t h, std::size_t r) const {
        return {m_data.data() + (h * m_rows + r) * m_dim, m_dim};
    }

    // All rows of one head, contiguous (rows x dim).
    std::span<float> head(std::size_t h) { return {m_data.data() + h * m_rows * m_dim, m_rows * m_dim}; }
    std::span<const float> head(std::size_t h) const { return {m_data.data() + h * m_rows * m_dim, m_rows * m_dim}; }

    const std::vector<float>& data() const { return m_data; }
    std::vector<float>& data() { return m_data; }

    HeadTensor slice_rows(std::size_t begin, std::size_t end) const;

    bool operator==(const HeadTensor&) const = default;

private:
    std::size_t m_heads = 0;
    std::size_t m_rows = 0;
    std::size_t m_dim = 0;
    std::vector<float> m_data;
};

// Rows of `a` followed by rows of `b`, head by head. Either side may be empty
// (zero rows, or default-constructed).
HeadTensor concat_rows(const HeadTensor& a, const HeadTensor& b);

} // namespace ilre
