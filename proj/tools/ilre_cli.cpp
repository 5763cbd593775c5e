// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ilre/error.hpp"
#include "ilre/needle.hpp"
#include "ilre/pipeline.hpp"
#include "ilre/weights_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// "2,4,8", "1:16" or a mix such as "1:4,8".
std::vector<std::size_t> parse_index_list(const std::string& text, const char* flag) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    auto number = [&](const std::string& s) -> std::size_t {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size() || s[0] == '-') {
            ilre::raise(ilre::Errc::InvalidArgument, std::string(flag) + ": bad number '" + s + "'");
        }
        return static_cast<std::size_t>(v);
    };
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) {
            out.push_back(number(item));
        } else {
            const std::size_t lo = number(item.substr(0, colon));
            const std::size_t hi = number(item.substr(colon + 1));
            if (hi < lo) {
                ilre::raise(ilre::Errc::InvalidArgument, std::string(flag) + ": empty range '" + item + "'");
            }
            for (std::size_t v = lo; v <= hi; ++v) {
                out.push_back(v);
            }
        }
        pos = comma + 1;
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        ilre::raise(ilre::Errc::FileNotFound, "cannot open " + path + " for writing");
    }
    out << text;
}

struct ModelFlags {
    std::uint64_t seed = 0;
    std::string weights;
    std::size_t d_model = 64;
    std::size_t heads = 4;
    std::size_t layers = 4;

    void attach(CLI::App* app) {
        auto* s = app->add_option("--model-seed", seed, "Seed of the random toy model");
        auto* w = app->add_option("--weights", weights, "Weight file written by export-weights");
        s->excludes(w);
        app->add_option("--d-model", d_model, "Model width")->capture_default_str();
        app->add_option("--heads", heads, "Attention heads")->capture_default_str();
        app->add_option("--n-layers", layers, "Decoder layers")->capture_default_str();
    }

    ilre::Weights build() const {
        if (!weights.empty()) {
            return ilre::load_weights(weights);
        }
        ilre::ModelSpec spec;
        spec.seed = seed;
        spec.d_model = d_model;
        spec.n_heads = heads;
        spec.n_layers = layers;
        return ilre::build_model(spec);
    }
};

struct StreamFlags {
    std::size_t sink = 4;
    std::size_t window = 512;
    std::size_t chunk = 1024;
    std::size_t layer = 2;

    void attach(CLI::App* app) {
        app->add_option("--layer", layer, "Retrieval layer (1-based)")->capture_default_str();
        app->add_option("--sink", sink, "Sink tokens")->capture_default_str();
        app->add_option("--window", window, "Sliding window rows")->capture_default_str();
        app->add_option("--chunk", chunk, "Prefill chunk size")->capture_default_str();
    }

    ilre::StreamConfig config() const { return {sink, window, chunk, layer}; }
};

struct PoolFlags {
    std::size_t budget = 1024;
    std::string max_kernels = "2,4,8";
    std::string avg_kernels = "1:16";

    void attach(CLI::App* app) {
        app->add_option("--budget", budget, "Token budget B")->capture_default_str();
        app->add_option("--max-kernels", max_kernels, "Max pooling kernel sizes")->capture_default_str();
        app->add_option("--avg-kernels", avg_kernels, "Avg pooling kernel sizes")->capture_default_str();
    }

    ilre::PoolingConfig config() const {
        return {parse_index_list(max_kernels, "--max-kernels"), parse_index_list(avg_kernels, "--avg-kernels"),
                budget};
    }
};

int run_compress(const ModelFlags& mf, const StreamFlags& sf, const PoolFlags& pf, const std::string& context_path,
                 const std::string& query_path, const std::string& out_path) {
    ilre::JobConfig job;
    job.weights_path = mf.weights;
    job.model.seed = mf.seed;
    job.model.d_model = mf.d_model;
    job.model.n_heads = mf.heads;
    job.model.n_layers = mf.layers;
    job.stream = sf.config();
    job.pooling = pf.config();
    job.context_path = context_path;
    job.query_path = query_path;
    job.out_path = out_path;
    job.validate();

    const ilre::Weights w = mf.build();
    const ilre::Vocab vocab{w.spec.vocab};
    const ilre::TokenSeq context = ilre::load_token_input(context_path, vocab);
    const ilre::TokenSeq query = ilre::load_token_input(query_path, vocab);
    const ilre::CompressResult res = ilre::compress(w, job.stream, job.pooling, context, query);
    write_text(out_path, ilre::compress_to_json(res, job.stream, job.pooling).dump() + "\n");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intermediate-layer retrieval context compression"};
    app.require_subcommand(1);

    ModelFlags model;
    StreamFlags stream;
    PoolFlags pool;

    auto* compress = app.add_subcommand("compress", "Compress a context against a query");
    std::string context_path, query_path, out_path;
    model.attach(compress);
    stream.attach(compress);
    pool.attach(compress);
    compress->add_option("--context", context_path, "Context file (TokenSeq JSON or text)")->required();
    compress->add_option("--query", query_path, "Query file (TokenSeq JSON or text)")->required();
    compress->add_option("--out", out_path, "Output JSON (default stdout)");

    auto* select = app.add_subcommand("select-layer", "Pick the retrieval layer by needle recall");
    ModelFlags sel_model;
    ilre::NeedleTaskSpec task;
    std::string key_digits = "6,12,24";
    std::string layers;
    std::string sel_out;
    StreamFlags sel_stream;
    sel_model.attach(select);
    select->add_option("--length", task.length, "Context length")->capture_default_str();
    select->add_option("--key-digits", key_digits, "Passkey lengths")->capture_default_str();
    select->add_option("--budget", task.budget, "Token budget B")->capture_default_str();
    select->add_option("--seed", task.seed, "Task seed")->capture_default_str();
    select->add_option("--layers", layers, "Candidate layers (default 1:N_L)");
    select->add_option("--sink", sel_stream.sink, "Sink tokens")->capture_default_str();
    select->add_option("--window", sel_stream.window, "Sliding window rows")->capture_default_str();
    select->add_option("--chunk", sel_stream.chunk, "Prefill chunk size")->capture_default_str();
    select->add_option("--out", sel_out, "Report JSON (default stdout)");

    auto* gen = app.add_subcommand("needle-gen", "Generate one needle retrieval instance");
    ilre::NeedleTaskSpec gen_task;
    std::size_t depth = 0;
    std::size_t digits = 6;
    std::string gen_out;
    std::string filler_path;
    gen->add_option("--length", gen_task.length, "Context length")->capture_default_str();
    gen->add_option("--depth", depth, "Depth index 0..19")->capture_default_str();
    gen->add_option("--key-digits", digits, "Passkey length")->capture_default_str();
    gen->add_option("--seed", gen_task.seed, "Seed")->capture_default_str();
    gen->add_option("--filler", filler_path, "Filler text file (default bundled essays)");
    gen->add_option("--out", gen_out, "Task JSON (default stdout)");

    auto* bench = app.add_subcommand("bench", "Time compression over increasing context lengths");
    ModelFlags bench_model;
    StreamFlags bench_stream;
    PoolFlags bench_pool;
    std::string lengths = "8192,16384,32768,65536";
    std::string bench_out;
    std::size_t repeats = 3;
    bench_model.attach(bench);
    bench_stream.attach(bench);
    bench_pool.attach(bench);
    bench->add_option("--lengths", lengths, "Context lengths, ascending")->capture_default_str();
    bench->add_option("--repeats", repeats, "Runs per length (median)")->capture_default_str();
    bench->add_option("--out", bench_out, "CSV output (default stdout)");

    auto* exportw = app.add_subcommand("export-weights", "Write a toy model to a weight file");
    ModelFlags exp_model;
    std::string exp_out;
    exp_model.attach(exportw);
    exportw->add_option("--out", exp_out, "Weight file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*compress) {
            return run_compress(model, stream, pool, context_path, query_path, out_path);
        }
        if (*select) {
            task.key_digits = parse_index_list(key_digits, "--key-digits");
            task.validate();
            const ilre::Weights w = sel_model.build();
            std::vector<std::size_t> candidates = layers.empty()
                                                      ? parse_index_list("1:" + std::to_string(w.spec.n_layers), "")
                                                      : parse_index_list(layers, "--layers");
            const auto sel = ilre::select_retrieval_layer(w, task, candidates, ilre::PoolingConfig{},
                                                          sel_stream.config());
            write_text(sel_out, ilre::report_to_json(sel, task).dump(2) + "\n");
            return kExitOk;
        }
        if (*gen) {
            if (!filler_path.empty()) {
                std::ifstream in(filler_path, std::ios::binary);
                if (!in) {
                    ilre::raise(ilre::Errc::FileNotFound, "cannot open " + filler_path);
                }
                gen_task.filler.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
            }
            gen_task.key_digits = {digits};
            ilre::NeedleInstance inst = ilre::generate_grid_instance(gen_task, depth, digits);
            if (inst.filler_cycled) {
                std::cerr << "warning: filler shorter than the context; it was repeated\n";
            }
            write_text(gen_out, ilre::instance_to_json(inst).dump() + "\n");
            return kExitOk;
        }
        if (*bench) {
            const ilre::Weights w = bench_model.build();
            ilre::BenchTemplate tmpl;
            tmpl.weights = &w;
            tmpl.stream = bench_stream.config();
            tmpl.pooling = bench_pool.config();
            tmpl.repeats = repeats;
            const auto result = ilre::bench_scaling(parse_index_list(lengths, "--lengths"), tmpl);
            std::ostringstream csv;
            ilre::write_bench_csv(csv, result);
            write_text(bench_out, csv.str());
            const nlohmann::json fits{{"wall_ms", ilre::fit_to_json(result.wall_fit)},
                                      {"dot_products", ilre::fit_to_json(result.dot_fit)}};
            std::cerr << fits.dump() << "\n";
            return kExitOk;
        }
        if (*exportw) {
            ilre::save_weights(exp_out, exp_model.build());
            return kExitOk;
        }
    } catch (const ilre::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ilre::is_config_error(e.code()) ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
