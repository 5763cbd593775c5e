// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/error.hpp"

namespace ilre {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnknownId: return "UnknownId";
    case Errc::EmptyRow: return "EmptyRow";
    case Errc::EmptyQuery: return "EmptyQuery";
    case Errc::DegenerateContext: return "DegenerateContext";
    case Errc::InsufficientPoints: return "InsufficientPoints";
    case Errc::FileFormat: return "FileFormat";
    case Errc::FileNotFound: return "FileNotFound";
    }
    return "Unknown";
}

bool is_config_error(Errc code) {
    switch (code) {
    case Errc::InvalidArgument:
    case Errc::DimensionMismatch:
    case Errc::InsufficientPoints:
    case Errc::FileFormat:
    case Errc::FileNotFound:
    case Errc::EmptyQuery:
        return true;
    default:
        return false;
    }
}

void raise(Errc code, const std::string& what) {
    throw Error(code, std::string(errc_name(code)) + ": " + what);
}

} // namespace ilre
