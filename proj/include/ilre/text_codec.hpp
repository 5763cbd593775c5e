// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace ilre {

using TokenId = std::int32_t;

// Hashing vocabulary. Ids below `reserved` are never produced by encode().
struct Vocab {
    static constexpr TokenId pad = 0;
    static constexpr TokenId bos = 1;
    static constexpr TokenId eos = 2;
    static constexpr TokenId unk = 3;
    static constexpr TokenId reserved = 4;

    TokenId size = 32768;

    void validate() const;
    TokenId id_for(std::string_view piece) const;
};

struct Span {
    std::string label;
    std::size_t start = 0;
    std::size_t end = 0; // exclusive

    std::size_t length() const { return end - start; }
    bool contains(std::size_t i) const { return i >= start && i < end; }
    bool operator==(const Span&) const = default;
};

struct TokenSeq {
    std::vector<TokenId> ids;
    std::vector<Span> spans;

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }

    // First span with this label, or nullptr.
    const Span* find_span(std::string_view label) const;

    bool operator==(const TokenSeq&) const = default;
};

// id -> piece, recorded while encoding a document.
using TokenMemo = std::unordered_map<TokenId, std::string>;

// 64-bit FNV-1a with the standard offset basis.
std::uint64_t fnv1a64(std::string_view bytes);

// Maximal non-whitespace runs, with every ASCII punctuation character split
// out as its own piece.
std::vector<std::string> split_pieces(std::string_view text);

TokenSeq encode(std::string_view text, const Vocab& vocab = {}, TokenMemo* memo = nullptr);

// Pieces joined by single spaces. Throws Errc::UnknownId for ids missing from memo.
std::string decode(std::span<const TokenId> ids, const TokenMemo& memo);
std::string decode(const TokenSeq& seq, const TokenMemo& memo);

// `b` appended to `a`; spans of `b` are shifted by a.size().
TokenSeq concat(const TokenSeq& a, const TokenSeq& b);

// Ids at the given (in-range) indices, in the given order. Spans are dropped.
TokenSeq gather(const TokenSeq& seq, std::span<const std::size_t> indices);

void to_json(nlohmann::json& j, const Span& span);
void from_json(const nlohmann::json& j, Span& span);
void to_json(nlohmann::json& j, const TokenSeq& seq);
void from_json(const nlohmann::json& j, TokenSeq& seq);

} // namespace ilre
