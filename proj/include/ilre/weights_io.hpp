// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "ilre/model.hpp"

namespace ilre {

// Weight file, little-endian:
//   "ILRW" | u16 version | u32 vocab | u32 d_model | u32 heads | u32 layers |
//   u32 ffn_dim | u64 seed | f64 rope_base | f32 blocks
// Blocks follow declaration order: embedding, then per layer attn_norm, wq, wk,
// wv, wo, ffn_norm, w_up, w_down.
inline constexpr std::uint16_t kWeightFileVersion = 1;

void save_weights(const std::filesystem::path& path, const Weights& w);
Weights load_weights(const std::filesystem::path& path);

// Debug dump of a key store: "ILRK" | u16 version | u32 heads | u32 rows |
// u32 dim | f32 data in [head][row][dim] order.
void save_key_dump(const std::filesystem::path& path, const HeadTensor& keys);
HeadTensor load_key_dump(const std::filesystem::path& path);

} // namespace ilre
