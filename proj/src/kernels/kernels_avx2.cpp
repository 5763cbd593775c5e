// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma; only reached when CPUID reports both.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "ilre/kernels.hpp"

namespace ilre::kernels::detail {
namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d hi64 = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, hi64));
}

inline float hmax(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_max_ps(lo, hi);
    lo = _mm_max_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_max_ss(lo, _mm_movehdup_ps(lo));
    return _mm_cvtss_f32(lo);
}

// Cephes-style expf: range reduction by ln2 then a degree-6 polynomial.
constexpr float kExpHi = 88.3762626647949f;
constexpr float kExpLo = -88.3762626647949f;
constexpr float kUnderflow = -87.3365447504f; // below this the result is flushed to 0
constexpr float kLog2e = 1.44269504088896341f;
constexpr float kC1 = 0.693359375f;
constexpr float kC2 = -2.12194440e-4f;
constexpr float kP0 = 1.9875691500e-4f;
constexpr float kP1 = 1.3981999507e-3f;
constexpr float kP2 = 8.3334519073e-3f;
constexpr float kP3 = 4.1665795894e-2f;
constexpr float kP4 = 1.6666665459e-1f;
constexpr float kP5 = 5.0000001201e-1f;

inline __m256 exp256(__m256 x) {
    const __m256 under = _mm256_cmp_ps(x, _mm256_set1_ps(kUnderflow), _CMP_LT_OQ);
    x = _mm256_min_ps(x, _mm256_set1_ps(kExpHi));
    x = _mm256_max_ps(x, _mm256_set1_ps(kExpLo));

    __m256 fx = _mm256_fmadd_ps(x, _mm256_set1_ps(kLog2e), _mm256_set1_ps(0.5f));
    fx = _mm256_floor_ps(fx);
    x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(kC1), x);
    x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(kC2), x);

    const __m256 z = _mm256_mul_ps(x, x);
    __m256 y = _mm256_set1_ps(kP0);
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kP1));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kP2));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kP3));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kP4));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(kP5));
    y = _mm256_fmadd_ps(y, z, x);
    y = _mm256_add_ps(y, _mm256_set1_ps(1.0f));

    __m256i n = _mm256_cvttps_epi32(fx);
    n = _mm256_add_epi32(n, _mm256_set1_epi32(127));
    n = _mm256_slli_epi32(n, 23);
    y = _mm256_mul_ps(y, _mm256_castsi256_ps(n));
    return _mm256_andnot_ps(under, y);
}

// Same polynomial for the tail so a row never mixes two exp approximations.
inline float exp1(float x) {
    if (!(x >= kUnderflow)) {
        return 0.0f;
    }
    x = std::min(x, kExpHi);
    const float fx = std::floor(std::fma(x, kLog2e, 0.5f));
    x = std::fma(-fx, kC1, x);
    x = std::fma(-fx, kC2, x);
    const float z = x * x;
    float y = kP0;
    y = std::fma(y, x, kP1);
    y = std::fma(y, x, kP2);
    y = std::fma(y, x, kP3);
    y = std::fma(y, x, kP4);
    y = std::fma(y, x, kP5);
    y = std::fma(y, z, x);
    y += 1.0f;
    const int n = static_cast<int>(fx) + 127;
    std::uint32_t bits = static_cast<std::uint32_t>(n) << 23;
    float scale;
    std::memcpy(&scale, &bits, sizeof(scale));
    return y * scale;
}

void dot_rows(const float* q, const float* rows, std::size_t n_rows, std::size_t dim, float scale, float* out) {
    const std::size_t vec_end = dim & ~std::size_t{7};
    if (dim == 16) {
        const __m256 q0 = _mm256_loadu_ps(q);
        const __m256 q1 = _mm256_loadu_ps(q + 8);
        for (std::size_t r = 0; r < n_rows; ++r) {
            const float* row = rows + r * 16;
            __m256 acc = _mm256_mul_ps(q0, _mm256_loadu_ps(row));
            acc = _mm256_fmadd_ps(q1, _mm256_loadu_ps(row + 8), acc);
            out[r] = hsum(acc) * scale;
        }
        return;
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        const float* row = rows + r * dim;
        __m256 acc = _mm256_setzero_ps();
        for (std::size_t j = 0; j < vec_end; j += 8) {
            acc = _mm256_fmadd_ps(_mm256_loadu_ps(q + j), _mm256_loadu_ps(row + j), acc);
        }
        float s = hsum(acc);
        for (std::size_t j = vec_end; j < dim; ++j) {
            s += q[j] * row[j];
        }
        out[r] = s * scale;
    }
}

void weighted_row_sum(const float* weights, const float* rows, std::size_t n_rows, std::size_t dim, float* out) {
    std::size_t j = 0;
    for (; j + 32 <= dim; j += 32) {
        __m256 a0 = _mm256_setzero_ps();
        __m256 a1 = _mm256_setzero_ps();
        __m256 a2 = _mm256_setzero_ps();
        __m256 a3 = _mm256_setzero_ps();
        for (std::size_t r = 0; r < n_rows; ++r) {
            const __m256 w = _mm256_set1_ps(weights[r]);
            const float* row = rows + r * dim + j;
            a0 = _mm256_fmadd_ps(w, _mm256_loadu_ps(row), a0);
            a1 = _mm256_fmadd_ps(w, _mm256_loadu_ps(row + 8), a1);
            a2 = _mm256_fmadd_ps(w, _mm256_loadu_ps(row + 16), a2);
            a3 = _mm256_fmadd_ps(w, _mm256_loadu_ps(row + 24), a3);
        }
        _mm256_storeu_ps(out + j, a0);
        _mm256_storeu_ps(out + j + 8, a1);
        _mm256_storeu_ps(out + j + 16, a2);
        _mm256_storeu_ps(out + j + 24, a3);
    }
    for (; j + 16 <= dim; j += 16) {
        __m256 a0 = _mm256_setzero_ps();
        __m256 a1 = _mm256_setzero_ps();
        for (std::size_t r = 0; r < n_rows; ++r) {
            const __m256 w = _mm256_set1_ps(weights[r]);
            const float* row = rows + r * dim + j;
            a0 = _mm256_fmadd_ps(w, _mm256_loadu_ps(row), a0);
            a1 = _mm256_fmadd_ps(w, _mm256_loadu_ps(row + 8), a1);
        }
        _mm256_storeu_ps(out + j, a0);
        _mm256_storeu_ps(out + j + 8, a1);
    }
    for (; j + 8 <= dim; j += 8) {
        __m256 a0 = _mm256_setzero_ps();
        for (std::size_t r = 0; r < n_rows; ++r) {
            a0 = _mm256_fmadd_ps(_mm256_set1_ps(weights[r]), _mm256_loadu_ps(rows + r * dim + j), a0);
        }
        _mm256_storeu_ps(out + j, a0);
    }
    for (; j < dim; ++j) {
        float acc = 0.0f;
        for (std::size_t r = 0; r < n_rows; ++r) {
            acc = std::fma(weights[r], rows[r * dim + j], acc);
        }
        out[j] = acc;
    }
}

float max_value(const float* x, std::size_t n) {
    float m = -std::numeric_limits<float>::infinity();
    std::size_t i = 0;
    if (n >= 8) {
        __m256 acc = _mm256_loadu_ps(x);
        for (i = 8; i + 8 <= n; i += 8) {
            acc = _mm256_max_ps(acc, _mm256_loadu_ps(x + i));
        }
        m = hmax(acc);
    }
    for (; i < n; ++i) {
        m = std::max(m, x[i]);
    }
    return m;
}

double exp_shift_sum(float* x, std::size_t n, float shift) {
    const __m256 s = _mm256_set1_ps(shift);
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 e = exp256(_mm256_sub_ps(_mm256_loadu_ps(x + i), s));
        _mm256_storeu_ps(x + i, e);
        acc_lo = _mm256_add_pd(acc_lo, _mm256_cvtps_pd(_mm256_castps256_ps128(e)));
        acc_hi = _mm256_add_pd(acc_hi, _mm256_cvtps_pd(_mm256_extractf128_ps(e, 1)));
    }
    double sum = hsum(_mm256_add_pd(acc_lo, acc_hi));
    for (; i < n; ++i) {
        x[i] = exp1(x[i] - shift);
        sum += x[i];
    }
    return sum;
}

void scale(float* x, std::size_t n, float factor) {
    const __m256 f = _mm256_set1_ps(factor);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), f));
    }
    for (; i < n; ++i) {
        x[i] *= factor;
    }
}

double sum_squares(const float* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) {
        sum += static_cast<double>(x[i]) * x[i];
    }
    return sum;
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable t{dot_rows, weighted_row_sum, max_value, exp_shift_sum, scale, sum_squares};
    return t;
}

} // namespace ilre::kernels::detail
