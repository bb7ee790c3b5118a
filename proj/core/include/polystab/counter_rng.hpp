#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace polystab {

/// Philox4x32-10 block function (Salmon et al., SC'11).
///
/// Output is a pure function of (key, counter): there is no state to share
/// between threads, so any evaluation order gives the same numbers.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

namespace detail {

constexpr Philox4x32::Key key_from_seed(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

constexpr Philox4x32::Counter counter_from(std::uint64_t stream, std::uint64_t index) noexcept {
    return {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
            static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

// 53 random bits mapped to (0, 1].
constexpr double open_closed_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// Uniform deviate in (0, 1] keyed on (seed, stream, index).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    const auto out = Philox4x32::block(detail::counter_from(stream, index), detail::key_from_seed(seed));
    return detail::open_closed_unit(out[0], out[1]);
}

/// Standard normal deviate keyed on (seed, stream, index), via Box-Muller on
/// one Philox block.
inline double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    const auto out = Philox4x32::block(detail::counter_from(stream, index), detail::key_from_seed(seed));
    const double u1 = detail::open_closed_unit(out[0], out[1]);
    const double u2 = detail::open_closed_unit(out[2], out[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace polystab
