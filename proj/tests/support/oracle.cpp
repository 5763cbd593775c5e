// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace ilre_test {

using ilre::HeadTensor;

HeadTensor random_heads(Gen& g, std::size_t heads, std::size_t rows, std::size_t dim) {
    HeadTensor t(heads, rows, dim);
    for (auto& x : t.data()) {
        x = static_cast<float>(g.uniform(-1.0, 1.0));
    }
    return t;
}

ilre::TokenSeq random_tokens(Gen& g, std::size_t n, ilre::TokenId vocab) {
    ilre::TokenSeq s;
    for (std::size_t i = 0; i < n; ++i) {
        s.ids.push_back(static_cast<ilre::TokenId>(4 + g.below(static_cast<std::size_t>(vocab) - 4)));
    }
    return s;
}

std::vector<double> dense_attention(const HeadTensor& q, const HeadTensor& k, const HeadTensor& v,
                                    const ilre::AttentionMask& mask, std::vector<double>* probs) {
    const std::size_t H = q.heads(), Tq = q.rows(), Tk = k.rows(), D = q.dim();
    std::vector<double> out(H * Tq * D, 0.0);
    if (probs != nullptr) {
        probs->assign(H * Tq * Tk, 0.0);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(D));
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t r = 0; r < Tq; ++r) {
            std::vector<double> logit(Tk, -std::numeric_limits<double>::infinity());
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < Tk; ++c) {
                if (!mask.allowed(r, c)) {
                    continue;
                }
                double s = 0.0;
                for (std::size_t d = 0; d < D; ++d) {
                    s += static_cast<double>(q.row(h, r)[d]) * k.row(h, c)[d];
                }
                logit[c] = s * scale;
                peak = std::max(peak, logit[c]);
            }
            double z = 0.0;
            for (std::size_t c = 0; c < Tk; ++c) {
                logit[c] = mask.allowed(r, c) ? std::exp(logit[c] - peak) : 0.0;
                z += logit[c];
            }
            for (std::size_t c = 0; c < Tk; ++c) {
                const double p = logit[c] / z;
                if (probs != nullptr) {
                    (*probs)[(h * Tq + r) * Tk + c] = p;
                }
                for (std::size_t d = 0; d < D; ++d) {
                    out[(h * Tq + r) * D + d] += p * v.row(h, c)[d];
                }
            }
        }
    }
    return out;
}

MonolithicRun monolithic_pipeline(const ilre::Weights& w, std::size_t retrieval_layer, const ilre::TokenSeq& context,
                                  const ilre::TokenSeq& query, std::size_t sink) {
    const std::size_t L = context.size();
    const std::size_t Lq = query.size();
    const std::size_t N = L + Lq;
    std::vector<ilre::TokenId> ids = context.ids;
    ids.insert(ids.end(), query.ids.begin(), query.ids.end());
    std::vector<std::size_t> pos(N);
    std::iota(pos.begin(), pos.end(), std::size_t{0});

    ilre::Matrix x = ilre::embed(w, ids);
    const HeadTensor none(w.spec.n_heads, 0, w.spec.head_dim());
    for (std::size_t l = 1; l < retrieval_layer; ++l) {
        x = ilre::layer_forward(w, l, x, none, none, pos, ilre::AttentionMask::causal(N, N)).hidden;
    }
    MonolithicRun run;
    const std::span<const std::size_t> all(pos);
    run.keys = ilre::layer_keys(w, retrieval_layer, x.slice_rows(0, L), all.subspan(0, L));
    run.queries = ilre::layer_queries(w, retrieval_layer, x.slice_rows(L, N), all.subspan(L, Lq));

    const std::size_t H = w.spec.n_heads;
    std::vector<std::uint8_t> allow(Lq * L, 1);
    dense_attention(run.queries, run.keys, run.keys, ilre::AttentionMask::dense(Lq, L, allow), &run.probs);
    run.scores.assign(L > sink ? L - sink : 0, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t q = 0; q < Lq; ++q) {
            for (std::size_t c = sink; c < L; ++c) {
                run.scores[c - sink] = std::max(run.scores[c - sink], run.probs[(h * Lq + q) * L + c]);
            }
        }
    }
    return run;
}

namespace {

// Ranked positions of `values`, highest first, lower position first on ties.
std::vector<std::size_t> ranked(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

} // namespace

std::vector<std::size_t> naive_allocate(const std::vector<double>& scores, const std::vector<std::size_t>& max_kernels,
                                        const std::vector<std::size_t>& avg_kernels, std::size_t budget,
                                        std::size_t length, std::size_t sink) {
    const std::size_t s = std::min(sink, length);
    std::set<std::size_t> I;
    if (s + budget >= length) {
        for (std::size_t i = 0; i < length; ++i) {
            I.insert(i);
        }
        return {I.begin(), I.end()};
    }
    for (std::size_t i = 0; i < s; ++i) {
        I.insert(i);
    }
    const std::size_t n_scores = scores.size();
    const std::size_t combos = max_kernels.size() * avg_kernels.size();
    std::size_t k = 0;
    for (std::size_t m : max_kernels) {
        std::vector<double> pooled;
        for (std::size_t p = 0; p * m < n_scores; ++p) {
            double best = scores[p * m];
            for (std::size_t c = p * m; c < std::min((p + 1) * m, n_scores); ++c) {
                best = std::max(best, scores[c]);
            }
            pooled.push_back(best);
        }
        for (std::size_t n : avg_kernels) {
            const std::size_t quota = budget / combos + (k < budget % combos ? 1 : 0);
            ++k;
            const std::size_t span = std::min(n, pooled.size());
            std::vector<double> avg;
            for (std::size_t a = 0; a + span <= pooled.size(); ++a) {
                double t = 0.0;
                for (std::size_t j = 0; j < span; ++j) {
                    t += pooled[a + j];
                }
                avg.push_back(t / static_cast<double>(span));
            }
            std::vector<std::size_t> order = ranked(avg);
            order.resize(std::min(order.size(), budget / m + 1));
            std::size_t got = 0;
            for (std::size_t a : order) {
                for (std::size_t off = a * m; off < std::min((a + span) * m, n_scores) && got < quota; ++off) {
                    if (I.insert(sink + off).second) {
                        ++got;
                    }
                }
                if (got == quota) {
                    break;
                }
            }
        }
    }
    for (std::size_t off : ranked(scores)) {
        if (I.size() >= s + budget) {
            break;
        }
        I.insert(sink + off);
    }
    return {I.begin(), I.end()};
}

std::vector<std::size_t> topk_reference(const std::vector<double>& scores, std::size_t budget, std::size_t length,
                                        std::size_t sink) {
    const std::size_t s = std::min(sink, length);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s; ++i) {
        out.push_back(i);
    }
    if (s + budget >= length) {
        for (std::size_t i = s; i < length; ++i) {
            out.push_back(i);
        }
        return out;
    }
    std::vector<std::size_t> order = ranked(scores);
    order.resize(budget);
    for (std::size_t off : order) {
        out.push_back(sink + off);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace ilre_test
