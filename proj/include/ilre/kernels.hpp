// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by attention and the dense projections.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is picked once at startup from CPUID; setting
// ILRE_KERNELS=scalar in the environment forces the reference path.
// Each variant has a fixed reduction order, so results are deterministic for a
// given ISA, but the two ISAs are only equal up to rounding.

namespace ilre::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
    // out[r] = scale * dot(q, rows[r]) for r < n_rows; rows is n_rows x dim row-major.
    void (*dot_rows)(const float* q, const float* rows, std::size_t n_rows, std::size_t dim, float scale,
                     float* out);
    // out[j] = sum_r weights[r] * rows[r][j]; out is overwritten. Also serves as x * W.
    void (*weighted_row_sum)(const float* weights, const float* rows, std::size_t n_rows, std::size_t dim,
                             float* out);
    float (*max_value)(const float* x, std::size_t n);
    // x[i] = exp(x[i] - shift), returns the sum accumulated in double. -inf maps to exactly 0.
    double (*exp_shift_sum)(float* x, std::size_t n, float shift);
    void (*scale)(float* x, std::size_t n, float factor);
    double (*sum_squares)(const float* x, std::size_t n);
};

bool isa_available(Isa isa);

const KernelTable& table(Isa isa);

// Kernels selected for this process.
const KernelTable& active();
Isa active_isa();

// Overrides the selection; intended for tests and benchmarks. Not thread-safe
// with respect to kernels running concurrently.
void set_active_isa(Isa isa);

namespace detail {
const KernelTable& scalar_table();
#if defined(ILRE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
} // namespace detail

} // namespace ilre::kernels
