// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/needle.hpp"

#include <algorithm>
#include <cmath>

#include "ilre/error.hpp"

namespace ilre {
namespace {

constexpr std::string_view kCycleMarker = "* * *";

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t pow10(std::size_t k) {
    std::uint64_t v = 1;
    for (std::size_t i = 0; i < k; ++i) {
        v *= 10;
    }
    return v;
}

std::string random_passkey(std::size_t digits, NeedleRng& rng) {
    std::string out;
    std::size_t remaining = digits;
    while (remaining > 0) {
        const std::size_t chunk = std::min<std::size_t>(remaining, 9);
        out += pad_passkey(std::to_string(rng.below(pow10(chunk))), chunk);
        remaining -= chunk;
    }
    return out;
}

std::string random_key_id(NeedleRng& rng) {
    const auto& words = key_words();
    std::vector<std::size_t> picked;
    while (picked.size() < 3) {
        const auto i = static_cast<std::size_t>(rng.below(words.size()));
        if (std::find(picked.begin(), picked.end(), i) == picked.end()) {
            picked.push_back(i);
        }
    }
    std::string id;
    for (std::size_t i : picked) {
        id += words[i];
        id += '-';
    }
    id += std::to_string(10 + rng.below(90));
    return id;
}

// Filler ids of exactly `count` tokens, repeating the corpus behind a marker
// when it runs out.
std::vector<TokenId> filler_tokens(std::string_view corpus, const Vocab& vocab, std::size_t count, bool& cycled) {
    const TokenSeq base = encode(corpus, vocab);
    if (base.empty()) {
        raise(Errc::InvalidArgument, "filler corpus produced no tokens");
    }
    const TokenSeq marker = encode(kCycleMarker, vocab);
    std::vector<TokenId> out;
    out.reserve(count);
    cycled = false;
    while (out.size() < count) {
        if (!out.empty()) {
            cycled = true;
            out.insert(out.end(), marker.ids.begin(), marker.ids.end());
        }
        out.insert(out.end(), base.ids.begin(), base.ids.end());
    }
    out.resize(count);
    return out;
}

} // namespace

std::uint64_t NeedleRng::next() {
    m_state += 0x9E3779B97F4A7C15ull;
    return mix64(m_state);
}

std::uint64_t NeedleRng::below(std::uint64_t bound) {
    if (bound == 0) {
        raise(Errc::InvalidArgument, "rng bound must be positive");
    }
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        const std::uint64_t r = next();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

void NeedleTaskSpec::validate() const {
    if (length == 0) {
        raise(Errc::InvalidArgument, "needle task length must be positive");
    }
    if (budget == 0) {
        raise(Errc::InvalidArgument, "needle task budget must be positive");
    }
    if (key_digits.empty()) {
        raise(Errc::InvalidArgument, "needle task needs at least one key length");
    }
    for (std::size_t k : key_digits) {
        if (k < 1) {
            raise(Errc::InvalidArgument, "key digits must be >= 1");
        }
    }
}

const Span& NeedleInstance::needle_span() const {
    const Span* s = context.find_span(kNeedleLabel);
    if (s == nullptr) {
        raise(Errc::InvalidArgument, "instance has no needle span");
    }
    return *s;
}

const std::vector<std::string_view>& key_words() {
    static const std::vector<std::string_view> words{
        "dog",   "cat",   "yellow", "red",    "blue",   "green",  "cup",    "tree",
        "river", "stone", "apple",  "lamp",   "house",  "bird",   "cloud",  "paper",
        "silver", "orange", "horse", "window", "garden", "moon",  "candle", "bread",
        "purple", "chair", "ocean",  "tiger",  "violin", "forest", "coffee", "rabbit",
    };
    return words;
}

std::string pad_passkey(std::string_view digits, std::size_t width) {
    if (digits.size() > width) {
        raise(Errc::InvalidArgument, "passkey has more digits than the key length");
    }
    return std::string(width - digits.size(), '0') + std::string(digits);
}

std::string make_needle_phrase(std::string_view key_id, std::string_view passkey) {
    return "\nThe " + std::string(key_id) + " magic passkey is " + std::string(passkey) + ".\n";
}

std::string make_query_text(std::string_view key_id) {
    return "\n\n# What's the " + std::string(key_id) + " magic passkey?\nThe " + std::string(key_id) +
           " magic passkey is ";
}

std::size_t segment_start(std::size_t length, std::size_t depth) {
    if (depth >= kNeedleDepths) {
        raise(Errc::InvalidArgument, "depth index must be in 0..19");
    }
    return depth * length / kNeedleDepths;
}

NeedleInstance generate_needle_instance(const NeedleTaskSpec& spec, std::size_t depth, std::size_t key_digits,
                                        NeedleRng& rng) {
    spec.validate();
    if (key_digits < 1) {
        raise(Errc::InvalidArgument, "key digits must be >= 1");
    }
    const Vocab vocab{};
    NeedleInstance inst;
    inst.depth = depth;
    inst.passkey = random_passkey(key_digits, rng);
    inst.key_id = random_key_id(rng);
    inst.needle_phrase = make_needle_phrase(inst.key_id, inst.passkey);

    const TokenSeq needle = encode(inst.needle_phrase, vocab, &inst.needle_memo);
    if (needle.size() > spec.length) {
        raise(Errc::InvalidArgument, "context too short to hold the needle phrase");
    }
    const std::size_t start = std::min(segment_start(spec.length, depth), spec.length - needle.size());
    const std::string_view corpus = spec.filler.empty() ? default_filler_corpus() : std::string_view(spec.filler);
    const std::vector<TokenId> filler = filler_tokens(corpus, vocab, spec.length - needle.size(), inst.filler_cycled);

    auto& ids = inst.context.ids;
    ids.reserve(spec.length);
    ids.insert(ids.end(), filler.begin(), filler.begin() + static_cast<std::ptrdiff_t>(start));
    ids.insert(ids.end(), needle.ids.begin(), needle.ids.end());
    ids.insert(ids.end(), filler.begin() + static_cast<std::ptrdiff_t>(start), filler.end());
    inst.context.spans.push_back({std::string(kNeedleLabel), start, start + needle.size()});

    // The query is tokenized piecewise so its boundaries match the template.
    inst.query = concat(concat(encode("\n\n# What's the", vocab), encode(inst.key_id, vocab)),
                        concat(encode(" magic passkey?\nThe", vocab),
                               concat(encode(inst.key_id, vocab), encode(" magic passkey is ", vocab))));
    return inst;
}

NeedleInstance generate_grid_instance(const NeedleTaskSpec& spec, std::size_t depth, std::size_t key_digits) {
    NeedleRng rng(mix64(spec.seed ^ mix64((static_cast<std::uint64_t>(depth) << 32) ^ key_digits)));
    return generate_needle_instance(spec, depth, key_digits, rng);
}

double span_recall(const std::vector<std::size_t>& indices, const Span& span) {
    if (span.length() == 0) {
        raise(Errc::InvalidArgument, "recall over an empty span");
    }
    const auto first = std::lower_bound(indices.begin(), indices.end(), span.start);
    const auto last = std::lower_bound(first, indices.end(), span.end);
    return static_cast<double>(last - first) / static_cast<double>(span.length());
}

double evaluate_recall(const Weights& w, const StreamConfig& config, const NeedleInstance& instance,
                       const PoolingConfig& pooling) {
    const Span& span = instance.needle_span();
    const std::size_t length = instance.context.size();
    if (std::min(config.sink, length) + pooling.budget >= length) {
        return 1.0;
    }
    const StreamCache cache = stream_prefill_context(w, config, instance.context);
    const HeadTensor q = prefill_query_part(w, cache, instance.query);
    const AttentionProbs probs = query_context_scores(q, cache.full_keys);
    const ScoreVector scores = reduce_scores(probs, config.sink);
    const AllocationResult alloc = context_allocate(scores, pooling, instance.context, config.sink);
    return span_recall(alloc.indices, span);
}

std::size_t pick_retrieval_layer(const RecallReport& report, double tie_epsilon) {
    if (report.layers.empty()) {
        raise(Errc::InvalidArgument, "recall report has no layers");
    }
    double best = -1.0;
    for (const auto& [layer, rec] : report.layers) {
        best = std::max(best, rec.mean);
    }
    for (const auto& [layer, rec] : report.layers) { // ascending layer order
        if (rec.mean >= best - tie_epsilon) {
            return layer;
        }
    }
    return report.layers.begin()->first;
}

LayerSelection select_retrieval_layer(const Weights& w, const NeedleTaskSpec& spec,
                                      const std::vector<std::size_t>& candidate_layers, const PoolingConfig& pooling,
                                      const StreamConfig& stream) {
    spec.validate();
    if (candidate_layers.empty()) {
        raise(Errc::InvalidArgument, "no candidate layers");
    }
    for (std::size_t l : candidate_layers) {
        if (l < 1 || l > w.spec.n_layers) {
            raise(Errc::InvalidArgument, "candidate layer " + std::to_string(l) + " outside 1.." +
                                             std::to_string(w.spec.n_layers));
        }
    }
    PoolingConfig pool = pooling;
    pool.budget = spec.budget;

    std::vector<NeedleInstance> instances;
    for (std::size_t depth = 0; depth < kNeedleDepths; ++depth) {
        for (std::size_t digits : spec.key_digits) {
            instances.push_back(generate_grid_instance(spec, depth, digits));
        }
    }

    LayerSelection sel;
    for (std::size_t layer : candidate_layers) {
        StreamConfig cfg = stream;
        cfg.retrieval_layer = layer;
        LayerRecall rec;
        double total = 0.0;
        std::size_t i = 0;
        for (std::size_t depth = 0; depth < kNeedleDepths; ++depth) {
            for (std::size_t digits : spec.key_digits) {
                const double r = evaluate_recall(w, cfg, instances[i++], pool);
                rec.cells.push_back({depth, digits, r});
                total += r;
            }
        }
        rec.mean = total / static_cast<double>(rec.cells.size());
        sel.report.layers[layer] = std::move(rec);
    }
    sel.layer = pick_retrieval_layer(sel.report);
    return sel;
}

nlohmann::json instance_to_json(const NeedleInstance& instance) {
    return {
        {"context", instance.context},
        {"query", instance.query},
        {"key_id", instance.key_id},
        {"passkey", instance.passkey},
        {"needle", instance.needle_phrase},
        {"depth", instance.depth},
        {"filler_cycled", instance.filler_cycled},
    };
}

nlohmann::json report_to_json(const LayerSelection& selection, const NeedleTaskSpec& spec) {
    nlohmann::json layers = nlohmann::json::object();
    for (const auto& [layer, rec] : selection.report.layers) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& c : rec.cells) {
            cells.push_back({{"depth", c.depth}, {"key_digits", c.key_digits}, {"recall", c.recall}});
        }
        layers[std::to_string(layer)] = {{"mean", rec.mean}, {"cells", std::move(cells)}};
    }
    return {
        {"layers", std::move(layers)},
        {"selected", selection.layer},
        {"spec",
         {{"length", spec.length},
          {"key_digits", spec.key_digits},
          {"depths", kNeedleDepths},
          {"seed", spec.seed},
          {"budget", spec.budget}}},
    };
}

} // namespace ilre
