// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/text_codec.hpp"

#include "ilre/error.hpp"

namespace ilre {
namespace {

constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

bool is_punct(unsigned char c) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

} // namespace

void Vocab::validate() const {
    if (size <= reserved) {
        raise(Errc::InvalidArgument, "vocab size must exceed the reserved id count");
    }
}

TokenId Vocab::id_for(std::string_view piece) const {
    const auto span = static_cast<std::uint64_t>(size - reserved);
    return reserved + static_cast<TokenId>(fnv1a64(piece) % span);
}

const Span* TokenSeq::find_span(std::string_view label) const {
    for (const auto& s : spans) {
        if (s.label == label) {
            return &s;
        }
    }
    return nullptr;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffsetBasis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::vector<std::string> split_pieces(std::string_view text) {
    std::vector<std::string> pieces;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            pieces.push_back(std::move(word));
            word.clear();
        }
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_space(c)) {
            flush();
        } else if (is_punct(c)) {
            flush();
            pieces.emplace_back(1, ch);
        } else {
            word.push_back(ch);
        }
    }
    flush();
    return pieces;
}

TokenSeq encode(std::string_view text, const Vocab& vocab, TokenMemo* memo) {
    vocab.validate();
    TokenSeq seq;
    for (auto& piece : split_pieces(text)) {
        const TokenId id = vocab.id_for(piece);
        seq.ids.push_back(id);
        if (memo != nullptr) {
            memo->try_emplace(id, std::move(piece));
        }
    }
    return seq;
}

std::string decode(std::span<const TokenId> ids, const TokenMemo& memo) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = memo.find(ids[i]);
        if (it == memo.end()) {
            raise(Errc::UnknownId, "no memo entry for token id " + std::to_string(ids[i]));
        }
        if (i != 0) {
            out.push_back(' ');
        }
        out += it->second;
    }
    return out;
}

std::string decode(const TokenSeq& seq, const TokenMemo& memo) {
    return decode(std::span<const TokenId>(seq.ids), memo);
}

TokenSeq concat(const TokenSeq& a, const TokenSeq& b) {
    TokenSeq out = a;
    out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
    for (const auto& s : b.spans) {
        out.spans.push_back({s.label, s.start + a.size(), s.end + a.size()});
    }
    return out;
}

TokenSeq gather(const TokenSeq& seq, std::span<const std::size_t> indices) {
    TokenSeq out;
    out.ids.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= seq.size()) {
            raise(Errc::InvalidArgument, "gather index out of range");
        }
        out.ids.push_back(seq.ids[i]);
    }
    return out;
}

void to_json(nlohmann::json& j, const Span& span) {
    j = nlohmann::json{{"label", span.label}, {"start", span.start}, {"end", span.end}};
}

void from_json(const nlohmann::json& j, Span& span) {
    j.at("label").get_to(span.label);
    j.at("start").get_to(span.start);
    j.at("end").get_to(span.end);
}

void to_json(nlohmann::json& j, const TokenSeq& seq) {
    j = nlohmann::json{{"ids", seq.ids}, {"spans", seq.spans}};
}

void from_json(const nlohmann::json& j, TokenSeq& seq) {
    j.at("ids").get_to(seq.ids);
    seq.spans.clear();
    if (j.contains("spans")) {
        j.at("spans").get_to(seq.spans);
    }
    for (const auto& s : seq.spans) {
        if (s.start > s.end || s.end > seq.ids.size()) {
            raise(Errc::FileFormat, "span '" + s.label + "' out of bounds");
        }
    }
}

} // namespace ilre
