// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilre/model.hpp"
#include "ilre/prefill.hpp"
#include "ilre/scoring.hpp"
#include "ilre/text_codec.hpp"

namespace ilre {

struct JobConfig {
    ModelSpec model;
    std::string weights_path; // overrides `model` when set
    StreamConfig stream;
    PoolingConfig pooling;
    std::string context_path;
    std::string query_path;
    std::string out_path;

    void validate() const;
};

struct CacheCells {
    std::size_t low = 0; // key + value rows per head below the retrieval layer
    std::size_t lr = 0;  // key rows per head at the retrieval layer

    bool operator==(const CacheCells&) const = default;
};

struct CostReport {
    std::uint64_t dot_products = 0;
    CacheCells cache_cells;
    double wall_seconds = 0.0;
};

struct CompressResult {
    AllocationResult allocation;
    TokenSeq output; // selected context ids followed by the query ids
    ScoreVector scores;
    CostReport cost;
    bool bypassed = false;
};

// Full pipeline for one request. Errors are rethrown with the failing stage
// name prefixed to the message.
CompressResult compress(const Weights& w, const StreamConfig& stream, const PoolingConfig& pooling,
                        const TokenSeq& context, const TokenSeq& query);

// Cache footprint per head at the end of prefill: (2 (S + W) (l_R - 1), L).
CacheCells count_cache_cells(std::size_t length, std::size_t sink, std::size_t window, std::size_t retrieval_layer);

// Exact dot products the instrumented pipeline performs: Lambda-masked
// attention in layers 1 .. l_R - 1 for context and query rows, plus Lq x L
// query-context scores.
std::uint64_t count_dot_products(std::size_t length, std::size_t query_length, std::size_t sink,
                                 std::size_t window, std::size_t chunk, std::size_t retrieval_layer);

// (S + W + chunk) (l_R - 1) L + Lq L
std::uint64_t dot_product_bound(std::size_t length, std::size_t query_length, std::size_t sink,
                                std::size_t window, std::size_t chunk, std::size_t retrieval_layer);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares of y on x. Needs two or more points with distinct x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct BenchTemplate {
    const Weights* weights = nullptr;
    StreamConfig stream;
    PoolingConfig pooling;
    std::size_t repeats = 3; // wall time is the median over repeats
};

struct BenchRow {
    std::size_t length = 0;
    std::uint64_t dot_products = 0;
    CacheCells cache_cells;
    double wall_ms = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    LinearFit wall_fit;
    LinearFit dot_fit;
};

// Filler context of exactly `length` tokens and a fixed question.
TokenSeq synthetic_context(std::size_t length);
TokenSeq synthetic_query();

// Throws Errc::InsufficientPoints for fewer than 4 lengths and
// Errc::InvalidArgument when they are not strictly ascending.
BenchResult bench_scaling(const std::vector<std::size_t>& lengths, const BenchTemplate& tmpl);

void write_bench_csv(std::ostream& os, const BenchResult& result);

nlohmann::json compress_to_json(const CompressResult& result, const StreamConfig& stream,
                                const PoolingConfig& pooling);
nlohmann::json fit_to_json(const LinearFit& fit);

// Reads a TokenSeq JSON document or, failing that, encodes the file as text.
TokenSeq load_token_input(const std::string& path, const Vocab& vocab = {});

} // namespace ilre
