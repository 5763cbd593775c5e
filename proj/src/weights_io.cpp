// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/weights_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ilre/error.hpp"

namespace ilre {
namespace {

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : m_out(path, std::ios::binary) {
        if (!m_out) {
            raise(Errc::FileNotFound, "cannot open " + path.string() + " for writing");
        }
    }

    void bytes(const char* p, std::size_t n) { m_out.write(p, static_cast<std::streamsize>(n)); }

    template <typename U>
    void uint(U v) {
        std::array<char, sizeof(U)> buf{};
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        }
        bytes(buf.data(), buf.size());
    }

    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

    void f32s(std::span<const float> values) {
        std::vector<char> buf(values.size() * 4);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto bits = std::bit_cast<std::uint32_t>(values[i]);
            for (std::size_t b = 0; b < 4; ++b) {
                buf[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
            }
        }
        bytes(buf.data(), buf.size());
    }

    void finish(const std::filesystem::path& path) {
        m_out.flush();
        if (!m_out) {
            raise(Errc::FileFormat, "write failed for " + path.string());
        }
    }

private:
    std::ofstream m_out;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            raise(Errc::FileNotFound, "cannot open " + path.string());
        }
        m_buf.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    void expect_magic(const char (&magic)[5]) {
        need(4);
        if (std::memcmp(m_buf.data() + m_pos, magic, 4) != 0) {
            raise(Errc::FileFormat, std::string("bad magic, expected ") + magic);
        }
        m_pos += 4;
    }

    template <typename U>
    U uint() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            v |= static_cast<U>(static_cast<unsigned char>(m_buf[m_pos + i])) << (8 * i);
        }
        m_pos += sizeof(U);
        return v;
    }

    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

    void f32s(std::span<float> out) {
        for (float& v : out) {
            v = std::bit_cast<float>(uint<std::uint32_t>());
        }
    }

    void expect_end() const {
        if (m_pos != m_buf.size()) {
            raise(Errc::FileFormat, "trailing bytes after payload");
        }
    }

private:
    void need(std::size_t n) const {
        if (m_pos + n > m_buf.size()) {
            raise(Errc::FileFormat, "file truncated");
        }
    }

    std::vector<char> m_buf;
    std::size_t m_pos = 0;
};

} // namespace

void save_weights(const std::filesystem::path& path, const Weights& w) {
    const auto& s = w.spec;
    Writer out(path);
    out.bytes("ILRW", 4);
    out.uint<std::uint16_t>(kWeightFileVersion);
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(s.vocab));
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(s.d_model));
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(s.n_heads));
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(s.n_layers));
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(s.ffn_dim));
    out.uint<std::uint64_t>(s.seed);
    out.f64(s.rope_base);
    out.f32s(w.embedding.data());
    for (const auto& lw : w.layers) {
        out.f32s(lw.attn_norm);
        out.f32s(lw.wq.data());
        out.f32s(lw.wk.data());
        out.f32s(lw.wv.data());
        out.f32s(lw.wo.data());
        out.f32s(lw.ffn_norm);
        out.f32s(lw.w_up.data());
        out.f32s(lw.w_down.data());
    }
    out.finish(path);
}

Weights load_weights(const std::filesystem::path& path) {
    Reader in(path);
    in.expect_magic("ILRW");
    const auto version = in.uint<std::uint16_t>();
    if (version != kWeightFileVersion) {
        raise(Errc::FileFormat, "unsupported weight file version " + std::to_string(version));
    }
    ModelSpec s;
    s.vocab = static_cast<TokenId>(in.uint<std::uint32_t>());
    s.d_model = in.uint<std::uint32_t>();
    s.n_heads = in.uint<std::uint32_t>();
    s.n_layers = in.uint<std::uint32_t>();
    s.ffn_dim = in.uint<std::uint32_t>();
    s.seed = in.uint<std::uint64_t>();
    s.rope_base = in.f64();
    s.validate();

    const std::size_t d = s.d_model;
    const std::size_t f = s.ffn();
    Weights w;
    w.spec = s;
    w.embedding = Matrix(static_cast<std::size_t>(s.vocab), d);
    in.f32s(w.embedding.data());
    w.layers.resize(s.n_layers);
    for (auto& lw : w.layers) {
        lw.attn_norm.resize(d);
        in.f32s(lw.attn_norm);
        for (Matrix* m : {&lw.wq, &lw.wk, &lw.wv, &lw.wo}) {
            *m = Matrix(d, d);
            in.f32s(m->data());
        }
        lw.ffn_norm.resize(d);
        in.f32s(lw.ffn_norm);
        lw.w_up = Matrix(d, f);
        in.f32s(lw.w_up.data());
        lw.w_down = Matrix(f, d);
        in.f32s(lw.w_down.data());
    }
    in.expect_end();
    return w;
}

void save_key_dump(const std::filesystem::path& path, const HeadTensor& keys) {
    Writer out(path);
    out.bytes("ILRK", 4);
    out.uint<std::uint16_t>(kWeightFileVersion);
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(keys.heads()));
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(keys.rows()));
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(keys.dim()));
    out.f32s(keys.data());
    out.finish(path);
}

HeadTensor load_key_dump(const std::filesystem::path& path) {
    Reader in(path);
    in.expect_magic("ILRK");
    const auto version = in.uint<std::uint16_t>();
    if (version != kWeightFileVersion) {
        raise(Errc::FileFormat, "unsupported key dump version " + std::to_string(version));
    }
    const std::size_t heads = in.uint<std::uint32_t>();
    const std::size_t rows = in.uint<std::uint32_t>();
    const std::size_t dim = in.uint<std::uint32_t>();
    HeadTensor keys(heads, rows, dim);
    in.f32s(keys.data());
    in.expect_end();
    return keys;
}

} // namespace ilre
