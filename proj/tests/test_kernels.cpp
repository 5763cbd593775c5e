// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "ilre/kernels.hpp"
#include "support/oracle.hpp"

namespace {

using ilre::kernels::Isa;
using ilre::kernels::KernelTable;

const std::vector<std::size_t> kSizes{0, 1, 3, 7, 8, 9, 15, 16, 17, 31, 32, 33, 63, 100, 257};
const std::vector<std::size_t> kDims{1, 2, 3, 8, 15, 16, 17, 32, 64};

class KernelPair : public ::testing::Test {
protected:
    void SetUp() override {
        if (!ilre::kernels::isa_available(Isa::avx2)) {
            GTEST_SKIP() << "no AVX2 on this host";
        }
    }
    const KernelTable& ref = ilre::kernels::table(Isa::scalar);
    const KernelTable& vec = ilre::kernels::table(Isa::avx2);
};

TEST_F(KernelPair, DotRowsAgree) {
    ilre_test::Gen g(11);
    for (std::size_t dim : kDims) {
        for (std::size_t n : kSizes) {
            const auto q = g.floats(dim);
            const auto rows = g.floats(n * dim);
            std::vector<float> a(n), b(n);
            ref.dot_rows(q.data(), rows.data(), n, dim, 0.25f, a.data());
            vec.dot_rows(q.data(), rows.data(), n, dim, 0.25f, b.data());
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_NEAR(a[i], b[i], 1e-5f * (1.0f + std::abs(a[i]))) << "dim " << dim << " n " << n;
            }
        }
    }
}

TEST_F(KernelPair, WeightedRowSumAgrees) {
    ilre_test::Gen g(12);
    for (std::size_t dim : {1, 7, 8, 16, 24, 32, 40, 64, 100, 256}) {
        for (std::size_t n : kSizes) {
            const auto w = g.floats(n, 0.0, 1.0);
            const auto rows = g.floats(n * dim);
            std::vector<float> a(dim, 5.0f), b(dim, -5.0f);
            ref.weighted_row_sum(w.data(), rows.data(), n, dim, a.data());
            vec.weighted_row_sum(w.data(), rows.data(), n, dim, b.data());
            for (std::size_t j = 0; j < dim; ++j) {
                EXPECT_NEAR(a[j], b[j], 1e-5f * (1.0f + std::abs(a[j]))) << "dim " << dim << " n " << n;
            }
        }
    }
}

TEST_F(KernelPair, MaxValueIsExact) {
    ilre_test::Gen g(13);
    for (std::size_t n : kSizes) {
        if (n == 0) {
            continue;
        }
        auto x = g.floats(n, -50.0, 50.0);
        x[g.below(n)] = -std::numeric_limits<float>::infinity();
        EXPECT_EQ(ref.max_value(x.data(), n), vec.max_value(x.data(), n)) << n;
    }
}

TEST_F(KernelPair, ExpShiftSumAgrees) {
    ilre_test::Gen g(14);
    for (std::size_t n : kSizes) {
        auto x = g.floats(n, -100.0, 10.0);
        if (n > 2) {
            x[1] = -std::numeric_limits<float>::infinity();
        }
        auto y = x;
        const double sa = ref.exp_shift_sum(x.data(), n, 3.0f);
        const double sb = vec.exp_shift_sum(y.data(), n, 3.0f);
        EXPECT_NEAR(sa, sb, 4e-7 * (1.0 + std::abs(sa))) << n;
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(x[i], y[i], 4e-7f * (std::abs(x[i]) + 1e-30f)) << "n " << n << " i " << i;
        }
        if (n > 2) {
            EXPECT_EQ(x[1], 0.0f);
            EXPECT_EQ(y[1], 0.0f);
        }
    }
}

TEST_F(KernelPair, ScaleAndSumSquaresAgree) {
    ilre_test::Gen g(15);
    for (std::size_t n : kSizes) {
        auto x = g.floats(n);
        auto y = x;
        ref.scale(x.data(), n, 0.37f);
        vec.scale(y.data(), n, 0.37f);
        EXPECT_EQ(x, y);
        const double a = ref.sum_squares(x.data(), n);
        const double b = vec.sum_squares(x.data(), n);
        EXPECT_NEAR(a, b, 1e-12 * (1.0 + a));
    }
}

TEST(KernelDispatch, OverrideSelectsTable) {
    const Isa before = ilre::kernels::active_isa();
    ilre::kernels::set_active_isa(Isa::scalar);
    EXPECT_EQ(ilre::kernels::active_isa(), Isa::scalar);
    EXPECT_EQ(&ilre::kernels::active(), &ilre::kernels::table(Isa::scalar));
    ilre::kernels::set_active_isa(before);
    EXPECT_EQ(ilre::kernels::active_isa(), before);
}

TEST(KernelScalar, ExpOfNegativeInfinityIsZero) {
    const auto& k = ilre::kernels::table(Isa::scalar);
    std::vector<float> x{0.0f, -std::numeric_limits<float>::infinity()};
    EXPECT_DOUBLE_EQ(k.exp_shift_sum(x.data(), 2, 0.0f), 1.0);
    EXPECT_EQ(x[1], 0.0f);
}

} // namespace
