// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "ilre/attention.hpp"
#include "ilre/error.hpp"

namespace ilre {
namespace {

void rotate_pairs(std::span<float> vec, std::span<const double> cos_t, std::span<const double> sin_t) {
    for (std::size_t i = 0; i < cos_t.size(); ++i) {
        const double x0 = vec[2 * i];
        const double x1 = vec[2 * i + 1];
        vec[2 * i] = static_cast<float>(x0 * cos_t[i] - x1 * sin_t[i]);
        vec[2 * i + 1] = static_cast<float>(x0 * sin_t[i] + x1 * cos_t[i]);
    }
}

std::vector<double> inverse_frequencies(std::size_t dim, double base) {
    std::vector<double> inv(dim / 2);
    for (std::size_t i = 0; i < inv.size(); ++i) {
        inv[i] = std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
    }
    return inv;
}

void fill_angles(std::size_t position, std::span<const double> inv_freq, std::vector<double>& cos_t,
                 std::vector<double>& sin_t) {
    cos_t.resize(inv_freq.size());
    sin_t.resize(inv_freq.size());
    for (std::size_t i = 0; i < inv_freq.size(); ++i) {
        const double angle = static_cast<double>(position) * inv_freq[i];
        cos_t[i] = std::cos(angle);
        sin_t[i] = std::sin(angle);
    }
}

} // namespace

void apply_position_encoding(std::span<float> vec, std::size_t position, double base) {
    if (vec.size() % 2 != 0) {
        raise(Errc::DimensionMismatch, "rotary encoding needs an even head dim");
    }
    std::vector<double> cos_t, sin_t;
    fill_angles(position, inverse_frequencies(vec.size(), base), cos_t, sin_t);
    rotate_pairs(vec, cos_t, sin_t);
}

void apply_position_encoding(HeadTensor& vecs, std::span<const std::size_t> positions, double base) {
    if (positions.size() != vecs.rows()) {
        raise(Errc::DimensionMismatch, "positions length must equal row count");
    }
    if (vecs.dim() % 2 != 0) {
        raise(Errc::DimensionMismatch, "rotary encoding needs an even head dim");
    }
    const auto inv_freq = inverse_frequencies(vecs.dim(), base);
    std::vector<double> cos_t, sin_t;
    for (std::size_t t = 0; t < vecs.rows(); ++t) {
        fill_angles(positions[t], inv_freq, cos_t, sin_t);
        for (std::size_t h = 0; h < vecs.heads(); ++h) {
            rotate_pairs(vecs.row(h, t), cos_t, sin_t);
        }
    }
}

} // namespace ilre
