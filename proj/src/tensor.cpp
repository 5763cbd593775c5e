// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/tensor.hpp"

#include <algorithm>

#include "ilre/error.hpp"

namespace ilre {

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > m_rows) {
        raise(Errc::InvalidArgument, "matrix row slice out of range");
    }
    Matrix out(end - begin, m_cols);
    std::copy(m_data.begin() + static_cast<std::ptrdiff_t>(begin * m_cols),
              m_data.begin() + static_cast<std::ptrdiff_t>(end * m_cols), out.m_data.begin());
    return out;
}

HeadTensor HeadTensor::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > m_rows) {
        raise(Errc::InvalidArgument, "head tensor row slice out of range");
    }
    HeadTensor out(m_heads, end - begin, m_dim);
    for (std::size_t h = 0; h < m_heads; ++h) {
        auto src = head(h).subspan(begin * m_dim, (end - begin) * m_dim);
        std::copy(src.begin(), src.end(), out.head(h).begin());
    }
    return out;
}

HeadTensor concat_rows(const HeadTensor& a, const HeadTensor& b) {
    if (a.empty()) {
        return (b.heads() != 0 || a.heads() == 0) ? b : a;
    }
    if (b.empty()) {
        return a;
    }
    if (a.heads() != b.heads() || a.dim() != b.dim()) {
        raise(Errc::DimensionMismatch, "concat_rows: head count or head dim differ");
    }
    HeadTensor out(a.heads(), a.rows() + b.rows(), a.dim());
    for (std::size_t h = 0; h < a.heads(); ++h) {
        auto dst = out.head(h);
        auto ha = a.head(h);
        auto hb = b.head(h);
        std::copy(ha.begin(), ha.end(), dst.begin());
        std::copy(hb.begin(), hb.end(), dst.begin() + static_cast<std::ptrdiff_t>(ha.size()));
    }
    return out;
}

} // namespace ilre
