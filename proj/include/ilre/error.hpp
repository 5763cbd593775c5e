// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ilre {

enum class Errc {
    InvalidArgument,
    DimensionMismatch,
    UnknownId,
    EmptyRow,
    EmptyQuery,
    DegenerateContext,
    InsufficientPoints,
    FileFormat,
    FileNotFound,
};

std::string_view errc_name(Errc code);

// True for errors caused by bad configuration or inputs (CLI exit code 2).
bool is_config_error(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), m_code(code) {}

    Errc code() const noexcept { return m_code; }

private:
    Errc m_code;
};

[[noreturn]] void raise(Errc code, const std::string& what);

} // namespace ilre
