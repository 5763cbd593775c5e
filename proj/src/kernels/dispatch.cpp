// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "ilre/error.hpp"
#include "ilre/kernels.hpp"

namespace ilre::kernels {
namespace {

Isa detect() {
    if (const char* env = std::getenv("ILRE_KERNELS"); env != nullptr && std::string_view(env) == "scalar") {
        return Isa::scalar;
    }
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

struct Selection {
    std::atomic<Isa> isa;
    std::atomic<const KernelTable*> kernels;
};

Selection& selected() {
    static Selection s{detect(), nullptr};
    static const bool init = [] {
        s.kernels.store(&table(s.isa.load()));
        return true;
    }();
    (void)init;
    return s;
}

} // namespace

std::string_view isa_name(Isa isa) {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool isa_available(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return true;
    case Isa::avx2:
#if defined(ILRE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!isa_available(isa)) {
        raise(Errc::InvalidArgument, std::string("kernel ISA not available: ") + std::string(isa_name(isa)));
    }
#if defined(ILRE_HAVE_AVX2)
    if (isa == Isa::avx2) {
        return detail::avx2_table();
    }
#endif
    return detail::scalar_table();
}

const KernelTable& active() {
    return *selected().kernels.load(std::memory_order_acquire);
}

Isa active_isa() {
    return selected().isa.load(std::memory_order_relaxed);
}

void set_active_isa(Isa isa) {
    if (!isa_available(isa)) {
        raise(Errc::InvalidArgument, std::string("kernel ISA not available: ") + std::string(isa_name(isa)));
    }
    Selection& s = selected();
    s.isa.store(isa, std::memory_order_relaxed);
    s.kernels.store(&table(isa), std::memory_order_release);
}

} // namespace ilre::kernels
