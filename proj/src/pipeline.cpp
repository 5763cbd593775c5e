// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>

#include "ilre/error.hpp"
#include "ilre/needle.hpp"

namespace ilre {
namespace {

template <typename Fn>
auto run_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(name) + ": " + e.what());
    }
}

std::uint64_t tri(std::uint64_t n) { return n * (n + 1) / 2; }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

void JobConfig::validate() const {
    if (context_path.empty() || query_path.empty()) {
        raise(Errc::InvalidArgument, "job needs a context and a query input");
    }
    for (const std::string* p : {&context_path, &query_path, &weights_path}) {
        if (!p->empty() && !std::filesystem::exists(*p)) {
            raise(Errc::FileNotFound, "no such file: " + *p);
        }
    }
    if (weights_path.empty()) {
        model.validate();
        stream.validate(model.n_layers);
    }
    pooling.validate();
}

CompressResult compress(const Weights& w, const StreamConfig& stream, const PoolingConfig& pooling,
                        const TokenSeq& context, const TokenSeq& query) {
    if (context.empty()) {
        raise(Errc::InvalidArgument, "context is empty");
    }
    if (query.empty()) {
        raise(Errc::EmptyQuery, "query is empty");
    }
    stream.validate(w.spec.n_layers);
    pooling.validate();

    const auto t0 = std::chrono::steady_clock::now();
    CompressResult res;
    const std::size_t length = context.size();
    if (length <= pooling.budget + stream.sink) {
        res.bypassed = true;
        res.allocation.indices.resize(length);
        std::iota(res.allocation.indices.begin(), res.allocation.indices.end(), std::size_t{0});
        res.allocation.compressed = context;
        res.output = concat(context, query);
    } else {
        OpCounter counter;
        const StreamCache cache =
            run_stage("prefill", [&] { return stream_prefill_context(w, stream, context, &counter); });
        const HeadTensor q = run_stage("query", [&] { return prefill_query_part(w, cache, query, &counter); });
        res.scores = run_stage("scoring", [&] {
            return reduce_scores(query_context_scores(q, cache.full_keys, &counter), stream.sink);
        });
        res.allocation =
            run_stage("allocation", [&] { return context_allocate(res.scores, pooling, context, stream.sink); });
        res.output = concat(res.allocation.compressed, query);
        res.cost.dot_products = counter.dot_products;
        res.cost.cache_cells = {cache.lower_layer_cells(), cache.retrieval_key_cells()};
    }
    res.cost.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

CacheCells count_cache_cells(std::size_t length, std::size_t sink, std::size_t window, std::size_t retrieval_layer) {
    if (retrieval_layer < 1) {
        raise(Errc::InvalidArgument, "retrieval layer must be >= 1");
    }
    return {2 * (sink + window) * (retrieval_layer - 1), length};
}

std::uint64_t count_dot_products(std::size_t length, std::size_t query_length, std::size_t sink,
                                 std::size_t window, std::size_t chunk, std::size_t retrieval_layer) {
    if (retrieval_layer < 1 || chunk < 1) {
        raise(Errc::InvalidArgument, "retrieval layer and chunk must be >= 1");
    }
    auto resident = [&](std::uint64_t p) {
        const std::uint64_t s = std::min<std::uint64_t>(p, sink);
        return s + std::min<std::uint64_t>(p - s, window);
    };
    std::uint64_t per_layer = 0;
    std::uint64_t seen = 0;
    for (const std::size_t c : chunk_schedule(length, sink, chunk)) {
        per_layer += c * resident(seen) + tri(c);
        seen += c;
    }
    per_layer += query_length * resident(seen) + tri(query_length);
    return per_layer * (retrieval_layer - 1) + static_cast<std::uint64_t>(query_length) * length;
}

std::uint64_t dot_product_bound(std::size_t length, std::size_t query_length, std::size_t sink,
                                std::size_t window, std::size_t chunk, std::size_t retrieval_layer) {
    const std::uint64_t lower = retrieval_layer > 0 ? retrieval_layer - 1 : 0;
    return static_cast<std::uint64_t>(sink + window + chunk) * lower * length +
           static_cast<std::uint64_t>(query_length) * length;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        raise(Errc::DimensionMismatch, "fit needs as many y values as x values");
    }
    if (x.size() < 2) {
        raise(Errc::InsufficientPoints, "fit needs at least two points");
    }
    const auto n = static_cast<long double>(x.size());
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    long double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double dx = x[i] - mx;
        const long double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0) {
        raise(Errc::InsufficientPoints, "fit needs at least two distinct x values");
    }
    const long double slope = sxy / sxx;
    const long double intercept = my - slope * mx;
    long double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double r = y[i] - (intercept + slope * x[i]);
        sse += r * r;
    }
    LinearFit fit;
    fit.slope = static_cast<double>(slope);
    fit.intercept = static_cast<double>(intercept);
    fit.r2 = syy == 0 ? (sse == 0 ? 1.0 : 0.0) : static_cast<double>(1 - sse / syy);
    return fit;
}

TokenSeq synthetic_context(std::size_t length) {
    static const TokenSeq base = encode(default_filler_corpus());
    TokenSeq out;
    out.ids.reserve(length);
    while (out.ids.size() < length) {
        const std::size_t take = std::min(base.size(), length - out.ids.size());
        out.ids.insert(out.ids.end(), base.ids.begin(), base.ids.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return out;
}

TokenSeq synthetic_query() {
    return encode(make_query_text("blue-cup-red-33"));
}

BenchResult bench_scaling(const std::vector<std::size_t>& lengths, const BenchTemplate& tmpl) {
    if (lengths.size() < 4) {
        raise(Errc::InsufficientPoints, "bench needs at least 4 lengths, got " + std::to_string(lengths.size()));
    }
    for (std::size_t i = 1; i < lengths.size(); ++i) {
        if (lengths[i] <= lengths[i - 1]) {
            raise(Errc::InvalidArgument, "bench lengths must be strictly ascending");
        }
    }
    if (tmpl.weights == nullptr) {
        raise(Errc::InvalidArgument, "bench template has no model");
    }
    if (tmpl.repeats < 1) {
        raise(Errc::InvalidArgument, "bench repeats must be >= 1");
    }
    const TokenSeq query = synthetic_query();
    BenchResult out;
    std::vector<double> xs, wall, dots;
    for (const std::size_t length : lengths) {
        const TokenSeq context = synthetic_context(length);
        BenchRow row;
        row.length = length;
        std::vector<double> times;
        for (std::size_t r = 0; r < tmpl.repeats; ++r) {
            const CompressResult res = compress(*tmpl.weights, tmpl.stream, tmpl.pooling, context, query);
            times.push_back(res.cost.wall_seconds * 1e3);
            row.dot_products = res.cost.dot_products;
            row.cache_cells = res.cost.cache_cells;
        }
        row.wall_ms = median(times);
        out.rows.push_back(row);
        xs.push_back(static_cast<double>(length));
        wall.push_back(row.wall_ms);
        dots.push_back(static_cast<double>(row.dot_products));
    }
    out.wall_fit = fit_line(xs, wall);
    out.dot_fit = fit_line(xs, dots);
    return out;
}

void write_bench_csv(std::ostream& os, const BenchResult& result) {
    os << "length,dot_products,cache_cells_low,cache_cells_lr,wall_ms\n";
    for (const auto& r : result.rows) {
        os << r.length << ',' << r.dot_products << ',' << r.cache_cells.low << ',' << r.cache_cells.lr << ','
           << r.wall_ms << '\n';
    }
}

nlohmann::json fit_to_json(const LinearFit& fit) {
    return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
}

nlohmann::json compress_to_json(const CompressResult& result, const StreamConfig& stream,
                                const PoolingConfig& pooling) {
    return {
        {"indices", result.allocation.indices},
        {"ids", result.output.ids},
        {"budget", pooling.budget},
        {"bypassed", result.bypassed},
        {"topped_up", result.allocation.topped_up},
        {"config",
         {{"sink", stream.sink},
          {"window", stream.window},
          {"chunk", stream.chunk},
          {"layer", stream.retrieval_layer},
          {"max_kernels", pooling.max_kernels},
          {"avg_kernels", pooling.avg_kernels}}},
        {"cost",
         {{"dot_products", result.cost.dot_products},
          {"cache_cells_low", result.cost.cache_cells.low},
          {"cache_cells_lr", result.cost.cache_cells.lr},
          {"wall_seconds", result.cost.wall_seconds}}},
    };
}

TokenSeq load_token_input(const std::string& path, const Vocab& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(Errc::FileNotFound, "cannot open " + path);
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.is_object() && doc.contains("ids")) {
        try {
            return doc.get<TokenSeq>();
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::FileFormat, path + ": " + e.what());
        }
    }
    return encode(text, vocab);
}

} // namespace ilre
