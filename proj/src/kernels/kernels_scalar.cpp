// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "ilre/kernels.hpp"

namespace ilre::kernels::detail {
namespace {

void dot_rows(const float* q, const float* rows, std::size_t n_rows, std::size_t dim, float scale, float* out) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        const float* row = rows + r * dim;
        float acc = 0.0f;
        for (std::size_t j = 0; j < dim; ++j) {
            acc += q[j] * row[j];
        }
        out[r] = acc * scale;
    }
}

void weighted_row_sum(const float* weights, const float* rows, std::size_t n_rows, std::size_t dim, float* out) {
    std::fill(out, out + dim, 0.0f);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const float w = weights[r];
        const float* row = rows + r * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            out[j] += w * row[j];
        }
    }
}

float max_value(const float* x, std::size_t n) {
    float m = -std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        m = std::max(m, x[i]);
    }
    return m;
}

double exp_shift_sum(float* x, std::size_t n, float shift) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - shift);
        sum += x[i];
    }
    return sum;
}

void scale(float* x, std::size_t n, float factor) {
    for (std::size_t i = 0; i < n; ++i) {
        x[i] *= factor;
    }
}

double sum_squares(const float* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(x[i]) * x[i];
    }
    return acc;
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{dot_rows, weighted_row_sum, max_value, exp_shift_sum, scale, sum_squares};
    return t;
}

} // namespace ilre::kernels::detail
