#pragma once

#include <cstdint>
#include <stdexcept>

namespace trajk {

// Q16.16: 16 integer bits, 16 fractional bits; 1.0 == raw 65536.
inline constexpr std::uint32_t kQ16One = 1u << 16;

/// One contribution in Q16.16, the word width the streaming segment counter
/// consumes per increment.
struct Q16Weight {
    std::uint32_t raw = 0;

    double to_double() const { return raw / 65536.0; }
};

/// Accumulator with the same 16 fractional bits widened to 64-bit storage.
/// Addition never rounds and never saturates at realistic contribution
/// counts, so accumulation is associative and order-independent — the
/// property that permits partitioned parallel counting.
struct Q16Accum {
    std::uint64_t raw = 0;

    double to_double() const { return raw / 65536.0; }
};

inline bool operator==(const Q16Accum& a, const Q16Accum& b) { return a.raw == b.raw; }

/// Weight of one full (unweighted) traversal: exactly 1.0.
inline Q16Weight unit_weight() { return Q16Weight{kQ16One}; }

/// 1/h truncated toward zero: floor(2^16 / h). The truncation shortfall is
/// deliberate: h equal contributions sum to at most 1.0, never above, so
/// rounding can only err toward suppression.
inline Q16Weight reciprocal_weight(std::uint64_t h) {
    if (h == 0) {
        throw std::domain_error("reciprocal_weight: h must be >= 1");
    }
    return Q16Weight{static_cast<std::uint32_t>(static_cast<std::uint64_t>(kQ16One) / h)};
}

inline void accum_add(Q16Accum& accum, Q16Weight w) {
    const std::uint64_t sum = accum.raw + w.raw;
    if (sum < accum.raw) {
        throw std::overflow_error("Q16Accum: accumulator overflow");
    }
    accum.raw = sum;
}

/// accum >= k, compared exactly in raw integer space: no tolerance.
inline bool meets_threshold(const Q16Accum& accum, std::uint32_t k) {
    if (k == 0) {
        throw std::domain_error("meets_threshold: k must be >= 1");
    }
    return accum.raw >= (static_cast<std::uint64_t>(k) << 16);
}

}  // namespace trajk
