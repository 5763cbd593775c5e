// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ilre/model.hpp"
#include "ilre/prefill.hpp"
#include "ilre/scoring.hpp"
#include "ilre/text_codec.hpp"

namespace ilre {

inline constexpr std::size_t kNeedleDepths = 20;
inline constexpr std::string_view kNeedleLabel = "needle";

// Deterministic 64-bit generator with portable bounded draws (the standard
// distributions are implementation-defined).
class NeedleRng {
public:
    explicit NeedleRng(std::uint64_t seed) : m_state(seed) {}

    std::uint64_t next();
    // Uniform in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t m_state;
};

struct NeedleTaskSpec {
    std::size_t length = 4096; // context tokens
    std::vector<std::size_t> key_digits{6, 12, 24};
    std::uint64_t seed = 0;
    std::string filler; // empty selects the bundled corpus
    std::size_t budget = 1024;

    void validate() const;
};

struct NeedleInstance {
    TokenSeq context; // carries a span labelled "needle"
    TokenSeq query;
    std::string key_id;
    std::string passkey;
    std::string needle_phrase;
    TokenMemo needle_memo; // pieces of the needle phrase only
    std::size_t depth = 0;
    bool filler_cycled = false; // the corpus was shorter than the context and repeated

    const Span& needle_span() const;
};

std::string_view default_filler_corpus();

// Fixed common-word set used for key ids.
const std::vector<std::string_view>& key_words();

std::string pad_passkey(std::string_view digits, std::size_t width);
std::string make_needle_phrase(std::string_view key_id, std::string_view passkey);
std::string make_query_text(std::string_view key_id);

// Token index where segment `depth` (of 20 equal segments) starts.
std::size_t segment_start(std::size_t length, std::size_t depth);

NeedleInstance generate_needle_instance(const NeedleTaskSpec& spec, std::size_t depth, std::size_t key_digits,
                                        NeedleRng& rng);

// Instance for one grid cell, seeded from (spec.seed, depth, key digits) so
// every candidate layer sees the same task.
NeedleInstance generate_grid_instance(const NeedleTaskSpec& spec, std::size_t depth, std::size_t key_digits);

// Fraction of span positions present in the (ascending) index set.
double span_recall(const std::vector<std::size_t>& indices, const Span& span);

// Runs prefill, scoring and allocation for one instance at config.retrieval_layer.
double evaluate_recall(const Weights& w, const StreamConfig& config, const NeedleInstance& instance,
                       const PoolingConfig& pooling);

struct RecallCell {
    std::size_t depth = 0;
    std::size_t key_digits = 0;
    double recall = 0.0;
};

struct LayerRecall {
    double mean = 0.0;
    std::vector<RecallCell> cells;
};

struct RecallReport {
    std::map<std::size_t, LayerRecall> layers;
};

// Smallest layer whose mean recall is within tie_epsilon of the best mean.
std::size_t pick_retrieval_layer(const RecallReport& report, double tie_epsilon = 1e-9);

struct LayerSelection {
    std::size_t layer = 0;
    RecallReport report;
};

// Evaluates every candidate layer over 20 depths x spec.key_digits and picks
// the layer. `stream` supplies sink/window/chunk; its retrieval layer is ignored.
LayerSelection select_retrieval_layer(const Weights& w, const NeedleTaskSpec& spec,
                                      const std::vector<std::size_t>& candidate_layers, const PoolingConfig& pooling,
                                      const StreamConfig& stream = {});

nlohmann::json instance_to_json(const NeedleInstance& instance);
nlohmann::json report_to_json(const LayerSelection& selection, const NeedleTaskSpec& spec);

} // namespace ilre
