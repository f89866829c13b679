#include "qphase/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace qphase::kernels {
namespace {

const Table* resolve() {
    const char* env = std::getenv("QPHASE_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_table();
    if (avx2_available()) return &avx2_table();
    return &scalar_table();
}

std::atomic<const Table*>& slot() {
    static std::atomic<const Table*> s{resolve()};
    return s;
}

} // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table& active() { return *slot().load(std::memory_order_acquire); }

void select(Isa isa) {
    if (isa == Isa::avx2 && avx2_available())
        slot().store(&avx2_table(), std::memory_order_release);
    else
        slot().store(&scalar_table(), std::memory_order_release);
}

const char* name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#if defined(__SSE2__)
FlushDenormals::FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
FlushDenormals::~FlushDenormals() { _mm_setcsr(saved_); }
#else
FlushDenormals::FlushDenormals() = default;
FlushDenormals::~FlushDenormals() = default;
#endif

} // namespace qphase::kernels
