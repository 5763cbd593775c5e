// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "ilre/error.hpp"
#include "ilre/scoring.hpp"
#include "support/oracle.hpp"

namespace {

using ilre::AttentionProbs;
using ilre::HeadTensor;
using ilre::PoolingConfig;
using ilre::ScoreVector;
using ilre::TokenSeq;
using ilre_test::Gen;

TokenSeq context_of(std::size_t n) {
    TokenSeq s;
    for (std::size_t i = 0; i < n; ++i) {
        s.ids.push_back(static_cast<ilre::TokenId>(100 + i));
    }
    return s;
}

ScoreVector scores_of(std::vector<double> v, std::size_t origin) {
    return ScoreVector{std::move(v), origin};
}

std::vector<double> random_scores(Gen& g, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = g.unit();
    }
    return v;
}

// Random kernel set; sometimes the defaults.
PoolingConfig random_pooling(Gen& g, std::size_t budget) {
    if (g.below(4) == 0) {
        return PoolingConfig::defaults(budget);
    }
    PoolingConfig c;
    c.budget = budget;
    c.max_kernels.clear();
    c.avg_kernels.clear();
    for (std::size_t i = 0, n = g.range(1, 4); i < n; ++i) {
        c.max_kernels.push_back(g.range(1, 10));
    }
    for (std::size_t i = 0, n = g.range(1, 8); i < n; ++i) {
        c.avg_kernels.push_back(g.range(1, 20));
    }
    return c;
}

// ---- query-context scores ----

TEST(QueryScores, SingleKeyIsCertain) {
    Gen g(1);
    const auto q = ilre_test::random_heads(g, 2, 3, 8);
    const auto k = ilre_test::random_heads(g, 2, 1, 8);
    const AttentionProbs p = ilre::query_context_scores(q, k);
    for (float v : p.values) {
        EXPECT_EQ(v, 1.0f);
    }
}

TEST(QueryScores, EqualLogitsAreUniform) {
    Gen g(2);
    const HeadTensor q(1, 2, 8); // zero queries give identical logits
    const auto k = ilre_test::random_heads(g, 1, 4, 8);
    for (float v : ilre::query_context_scores(q, k).values) {
        EXPECT_NEAR(v, 0.25f, 1e-6f);
    }
}

TEST(QueryScores, MatchesDenseOracleAndCounts) {
    Gen g(3);
    const auto q = ilre_test::random_heads(g, 2, 3, 8);
    const auto k = ilre_test::random_heads(g, 2, 37, 8);
    ilre::OpCounter counter;
    const AttentionProbs p = ilre::query_context_scores(q, k, &counter);
    std::vector<double> ref;
    std::vector<std::uint8_t> allow(3 * 37, 1);
    ilre_test::dense_attention(q, k, k, ilre::AttentionMask::dense(3, 37, allow), &ref);
    ASSERT_EQ(p.values.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_NEAR(p.values[i], ref[i], 1e-6);
    }
    EXPECT_EQ(counter.dot_products, 3u * 37u);
}

TEST(QueryScores, ShapeChecks) {
    Gen g(4);
    const auto q = ilre_test::random_heads(g, 2, 3, 8);
    EXPECT_THROW(ilre::query_context_scores(q, ilre_test::random_heads(g, 3, 5, 8)), ilre::Error);
    EXPECT_THROW(ilre::query_context_scores(q, HeadTensor(2, 0, 8)), ilre::Error);
}

// ---- reduction ----

TEST(Reduce, SingleRowIsIdentity) {
    AttentionProbs p{1, 1, 3, {0.2f, 0.5f, 0.3f}};
    const ScoreVector s = ilre::reduce_scores(p, 0);
    EXPECT_EQ(s.origin, 0u);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.values[1], 0.5f);
}

TEST(Reduce, MaxOverHeads) {
    AttentionProbs p{2, 1, 2, {0.1f, 0.9f, 0.8f, 0.2f}};
    const ScoreVector s = ilre::reduce_scores(p, 0);
    EXPECT_DOUBLE_EQ(s.values[0], 0.8f);
    EXPECT_DOUBLE_EQ(s.values[1], 0.9f);
}

TEST(Reduce, MatchesTripleLoop) {
    Gen g(5);
    AttentionProbs p{4, 4, 64, g.floats(4 * 4 * 64, 0.0, 1.0)};
    const ScoreVector s = ilre::reduce_scores(p, 4);
    ASSERT_EQ(s.size(), 60u);
    EXPECT_EQ(s.origin, 4u);
    for (std::size_t c = 0; c < 60; ++c) {
        float best = 0.0f;
        for (std::size_t h = 0; h < 4; ++h) {
            for (std::size_t q = 0; q < 4; ++q) {
                best = std::max(best, p.at(h, q, 4 + c));
            }
        }
        EXPECT_EQ(s.values[c], static_cast<double>(best));
    }
}

TEST(Reduce, NothingPastSinkIsDegenerate) {
    AttentionProbs p{1, 1, 4, {0.25f, 0.25f, 0.25f, 0.25f}};
    try {
        ilre::reduce_scores(p, 4);
        FAIL();
    } catch (const ilre::Error& e) {
        EXPECT_EQ(e.code(), ilre::Errc::DegenerateContext);
    }
}

// ---- pooling and ranking ----

TEST(Pooling, MaxPoolKeepsPartialWindow) {
    EXPECT_EQ(ilre::max_pool({0.1, 0.9, 0.2, 0.05, 0.7}, 2), (std::vector<double>{0.9, 0.2, 0.7}));
    EXPECT_THROW(ilre::max_pool({0.1}, 0), ilre::Error);
}

TEST(Pooling, WindowSumsClampToLength) {
    EXPECT_EQ(ilre::window_sums({1, 2, 3}, 2), (std::vector<double>{3, 5}));
    EXPECT_EQ(ilre::window_sums({1, 2, 3}, 9), (std::vector<double>{6}));
}

TEST(Ranking, PlainArgsort) {
    ilre::CandidateStream s(scores_of({0.1, 0.9, 0.2, 0.05}, 4), 1, 1);
    EXPECT_EQ(s.drain(), (std::vector<std::size_t>{5, 6, 4, 7}));
}

TEST(Ranking, PooledWindowsExpandAscending) {
    ilre::CandidateStream s(scores_of({0.1, 0.9, 0.2, 0.05}, 0), 2, 1);
    EXPECT_EQ(s.ranked_windows(), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(s.drain(), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Ranking, TiesGoToLowerPosition) {
    ilre::CandidateStream s(scores_of({0.5, 0.5, 0.7, 0.5}, 0), 1, 1);
    EXPECT_EQ(s.drain(), (std::vector<std::size_t>{2, 0, 1, 3}));
}

TEST(Ranking, OverlappingWindowsRepeatOffsets) {
    // pooled (m=1) windows of 2: sums 0.3, 0.5, 0.4 -> windows 1, 2, 0
    ilre::CandidateStream s(scores_of({0.1, 0.2, 0.3, 0.1}, 0), 1, 2);
    EXPECT_EQ(s.drain(), (std::vector<std::size_t>{1, 2, 2, 3, 0, 1}));
}

TEST(Ranking, WindowCapAndFormula) {
    EXPECT_EQ(ilre::top_window_cap(4096, 2), 2049u);
    EXPECT_EQ(ilre::top_window_cap(1024, 8), 129u);
    Gen g(6);
    ilre::CandidateStream s(scores_of(random_scores(g, 100), 0), 2, 3, 5);
    EXPECT_EQ(s.ranked_windows().size(), 5u);
    ilre::CandidateStream empty(scores_of({}, 0), 2, 3);
    EXPECT_TRUE(empty.drain().empty());
}

TEST(Ranking, CapKeepsTopOfFullRanking) {
    Gen g(7);
    for (int t = 0; t < 50; ++t) {
        const auto v = random_scores(g, g.range(1, 300));
        const std::size_t m = g.range(1, 8), n = g.range(1, 16), cap = g.range(1, 40);
        ilre::CandidateStream all(scores_of(v, 0), m, n);
        ilre::CandidateStream capped(scores_of(v, 0), m, n, cap);
        const auto& a = all.ranked_windows();
        const auto& b = capped.ranked_windows();
        ASSERT_EQ(b.size(), std::min(cap, a.size()));
        EXPECT_TRUE(std::equal(b.begin(), b.end(), a.begin()));
    }
}

// ---- allocation ----

TEST(Allocate, LargeBudgetKeepsEverything) {
    const TokenSeq ctx = context_of(20);
    const auto r = ilre::context_allocate(ScoreVector{}, PoolingConfig::defaults(16), ctx, 4);
    EXPECT_EQ(r.indices.size(), 20u);
    EXPECT_EQ(r.compressed, ctx);
}

TEST(Allocate, ZeroBudgetKeepsSink) {
    Gen g(8);
    const auto r = ilre::context_allocate(scores_of(random_scores(g, 60), 4), PoolingConfig::defaults(0),
                                          context_of(64), 4);
    EXPECT_EQ(r.indices, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(r.compressed.ids, (std::vector<ilre::TokenId>{100, 101, 102, 103}));
}

TEST(Allocate, RejectsMismatchedScores) {
    Gen g(9);
    EXPECT_THROW(ilre::context_allocate(scores_of(random_scores(g, 59), 4), PoolingConfig::defaults(8),
                                        context_of(64), 4),
                 ilre::Error);
    auto bad = random_scores(g, 60);
    bad[7] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(ilre::context_allocate(scores_of(bad, 4), PoolingConfig::defaults(8), context_of(64), 4),
                 ilre::Error);
    PoolingConfig empty = PoolingConfig::defaults(8);
    empty.avg_kernels.clear();
    EXPECT_THROW(ilre::context_allocate(scores_of(random_scores(g, 60), 4), empty, context_of(64), 4), ilre::Error);
}

TEST(Allocate, PresetsMatchAblationSets) {
    EXPECT_EQ(PoolingConfig::defaults(1024).combinations(), 48u);
    EXPECT_EQ(PoolingConfig::less_max_kernels(1).max_kernels, (std::vector<std::size_t>{4}));
    EXPECT_EQ(PoolingConfig::less_avg_kernels(1).avg_kernels.size(), 9u);
    EXPECT_EQ(PoolingConfig::one_max_avg(1).combinations(), 1u);
    EXPECT_EQ(PoolingConfig::snapkv(7).max_kernels, (std::vector<std::size_t>{1}));
}

TEST(Allocate, PlateauExampleMatchesNaive) {
    // Zero background: tied avg windows start left of the plateau, so wide
    // default windows spend budget on the zeros before reaching it.
    std::vector<double> v(64, 0.0);
    std::fill(v.begin() + 20, v.begin() + 48, 0.5);
    v[5] = 0.99;
    const TokenSeq ctx = context_of(68);
    auto plateau = [](const std::vector<std::size_t>& idx) {
        return std::count_if(idx.begin(), idx.end(), [](std::size_t i) { return i >= 24 && i < 52; });
    };
    for (const PoolingConfig& cfg : {PoolingConfig::defaults(32), PoolingConfig::one_max_avg(32)}) {
        const auto expect = ilre_test::naive_allocate(v, cfg.max_kernels, cfg.avg_kernels, 32, 68, 4);
        const auto r = ilre::context_allocate(scores_of(v, 4), cfg, ctx, 4);
        EXPECT_EQ(r.indices, expect);
        EXPECT_EQ(plateau(r.indices), plateau(expect));
    }
    EXPECT_EQ(plateau(ilre::context_allocate(scores_of(v, 4), PoolingConfig::defaults(32), ctx, 4).indices), 19);
    EXPECT_EQ(plateau(ilre::context_allocate(scores_of(v, 4), PoolingConfig::one_max_avg(32), ctx, 4).indices), 28);
}

TEST(Allocate, NoisyPlateauDefaultCoversAtLeastOneMaxAvg) {
    Gen g(21);
    for (int t = 0; t < 60; ++t) {
        const std::size_t span = 16 * g.range(1, 3), n = 256;
        std::vector<double> v(n);
        for (auto& x : v) {
            x = g.uniform(0.0, 0.3);
        }
        const std::size_t at = g.below(n - span + 1);
        std::fill(v.begin() + static_cast<std::ptrdiff_t>(at), v.begin() + static_cast<std::ptrdiff_t>(at + span), 0.5);
        auto covered = [&](const PoolingConfig& cfg) {
            const auto r = ilre::context_allocate(scores_of(v, 4), cfg, context_of(n + 4), 4);
            return std::count_if(r.indices.begin(), r.indices.end(),
                                 [&](std::size_t i) { return i >= 4 + at && i < 4 + at + span; });
        };
        EXPECT_GE(covered(PoolingConfig::defaults(span / 2)), covered(PoolingConfig::one_max_avg(span / 2)));
    }
}

TEST(Allocate, MatchesNaiveTranscription) {
    Gen g(10);
    for (int t = 0; t < 300; ++t) {
        const std::size_t S = g.range(0, 6);
        const std::size_t n = g.range(1, 600);
        const std::size_t B = g.range(0, n + 4);
        PoolingConfig cfg = random_pooling(g, B);
        auto v = random_scores(g, n);
        if (g.coin()) { // coarse values force ties
            for (auto& x : v) {
                x = std::floor(x * 4) / 4;
            }
        }
        const auto r = ilre::context_allocate(scores_of(v, S), cfg, context_of(n + S), S);
        ASSERT_EQ(r.indices, ilre_test::naive_allocate(v, cfg.max_kernels, cfg.avg_kernels, B, n + S, S))
            << "case " << t;
    }
}

TEST(Allocate, BudgetSplitsWithRemainderFirst) {
    // 4096 over 48 combinations is 85 each with 16 left over; every index is
    // distinct here, so the total must still be exact.
    Gen g(11);
    const auto v = random_scores(g, 20000);
    const auto r = ilre::context_allocate(scores_of(v, 4), PoolingConfig::defaults(4096), context_of(20004), 4);
    EXPECT_EQ(r.indices.size(), 4100u);
    EXPECT_EQ(r.indices, ilre_test::naive_allocate(v, {2, 4, 8}, PoolingConfig{}.avg_kernels, 4096, 20004, 4));
}

TEST(Allocate, InvariantsUnderFuzz) {
    Gen g(12);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t S = g.range(0, 8);
        const std::size_t L = g.range(8, 4096);
        const std::size_t n = L > S ? L - S : 0;
        const std::size_t B = g.range(0, L);
        const PoolingConfig cfg = random_pooling(g, B);
        const auto v = random_scores(g, n);
        const TokenSeq ctx = context_of(L);
        const auto r = ilre::context_allocate(scores_of(v, S), cfg, ctx, S);
        ASSERT_EQ(r.indices.size(), std::min(S + B, L));
        for (std::size_t i = 0; i < std::min(S, L); ++i) {
            ASSERT_EQ(r.indices[i], i);
        }
        for (std::size_t i = 1; i < r.indices.size(); ++i) {
            ASSERT_LT(r.indices[i - 1], r.indices[i]);
        }
        ASSERT_LT(r.indices.back(), L);
        ASSERT_EQ(r.compressed.size(), r.indices.size());
        for (std::size_t i = 0; i < r.indices.size(); ++i) {
            ASSERT_EQ(r.compressed.ids[i], ctx.ids[r.indices[i]]);
        }
        if (t % 10 == 0) {
            const auto again = ilre::context_allocate(scores_of(v, S), cfg, ctx, S);
            ASSERT_EQ(again.indices, r.indices);
        }
    }
}

TEST(Allocate, SnapKvEqualsTopK) {
    Gen g(13);
    for (int t = 0; t < 200; ++t) {
        const std::size_t S = g.range(0, 8);
        const std::size_t n = g.range(1, 2000);
        const std::size_t B = g.range(0, n);
        auto v = random_scores(g, n);
        if (g.coin()) {
            for (auto& x : v) {
                x = std::floor(x * 8) / 8;
            }
        }
        const auto r = ilre::context_allocate(scores_of(v, S), PoolingConfig::snapkv(B), context_of(n + S), S);
        ASSERT_EQ(r.indices, ilre_test::topk_reference(v, B, n + S, S));
        ASSERT_EQ(r.topped_up, 0u);
    }
}

TEST(Allocate, PositiveScalingLeavesSelectionUnchanged) {
    Gen g(14);
    for (int t = 0; t < 200; ++t) {
        const std::size_t S = g.range(0, 6);
        const std::size_t n = g.range(1, 800);
        const std::size_t B = g.range(0, n);
        const PoolingConfig cfg = random_pooling(g, B);
        const auto v = random_scores(g, n);
        // powers of two scale exactly; other factors rely on the absence of near-ties
        const double c = g.coin() ? std::ldexp(1.0, static_cast<int>(g.range(0, 20)) - 10) : g.uniform(0.01, 100.0);
        std::vector<double> scaled(v);
        for (auto& x : scaled) {
            x *= c;
        }
        const TokenSeq ctx = context_of(n + S);
        ASSERT_EQ(ilre::context_allocate(scores_of(v, S), cfg, ctx, S).indices,
                  ilre::context_allocate(scores_of(scaled, S), cfg, ctx, S).indices)
            << "case " << t << " c " << c;
    }
}

TEST(Allocate, EverySelectionComesFromACappedTopWindow) {
    Gen g(15);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        const std::size_t S = g.range(0, 6);
        const std::size_t n = g.range(1, 1500);
        const std::size_t B = g.range(0, n);
        const PoolingConfig cfg = random_pooling(g, B);
        const auto v = random_scores(g, n);
        const auto r = ilre::context_allocate(scores_of(v, S), cfg, context_of(n + S), S);
        if (r.topped_up != 0 || S + B >= n + S) {
            continue;
        }
        ++checked;
        std::set<std::size_t> reachable;
        for (std::size_t m : cfg.max_kernels) {
            for (std::size_t a : cfg.avg_kernels) {
                ilre::CandidateStream s(scores_of(v, S), m, a, ilre::top_window_cap(B, m));
                for (std::size_t i : s.drain()) {
                    reachable.insert(i);
                }
            }
        }
        for (std::size_t i : r.indices) {
            if (i >= S) {
                ASSERT_TRUE(reachable.count(i)) << "index " << i << " case " << t;
            }
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(Allocate, LargeKernelsOnShortScoresStillFillBudget) {
    Gen g(16);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = g.range(2, 40);
        const std::size_t B = g.range(1, n - 1);
        PoolingConfig cfg{{g.range(4, 64), g.range(4, 64)}, {g.range(1, 32)}, B};
        const auto v = random_scores(g, n);
        const auto r = ilre::context_allocate(scores_of(v, 0), cfg, context_of(n), 0);
        ASSERT_EQ(r.indices.size(), B);
        ASSERT_EQ(r.indices, ilre_test::naive_allocate(v, cfg.max_kernels, cfg.avg_kernels, B, n, 0));
    }
}

} // namespace
