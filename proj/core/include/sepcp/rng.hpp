#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace sepcp {

/// Philox4x32-10 counter-based generator.
///
/// The output is a pure function of (key, stream, position), so independent
/// streams can be handed to parallel workers without any shared state. Keys
/// are derived from a user seed and an operation tag with `make_stream`.
class PhiloxStream {
public:
    using result_type = std::uint64_t;

    PhiloxStream(std::uint64_t key, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on {0, ..., bound - 1}; bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound) noexcept;
    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    void refill() noexcept;

    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// 64-bit key for (seed, tag); distinct tags give unrelated keys.
std::uint64_t derive_key(std::uint64_t seed, std::string_view tag) noexcept;

/// Independent stream number `index` of the operation named `tag`.
inline PhiloxStream make_stream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    return PhiloxStream(derive_key(seed, tag), index);
}

}  // namespace sepcp
