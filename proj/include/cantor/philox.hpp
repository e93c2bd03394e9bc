#pragma once

// Philox4x32-10 counter-based pseudorandom function (Salmon et al., SC'11).
// Every random draw in the library is a pure function of (key, counter).

#include <array>
#include <cstdint>

namespace cantor {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) {
        ctr = round(ctr, key);
        for (int i = 1; i < 10; ++i) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
            ctr = round(ctr, key);
        }
        return ctr;
    }

    static constexpr Key key_from_seed(std::uint64_t seed) {
        return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

// Sequential 32-bit draws from consecutive counters starting at `base`.
class PhiloxStream {
public:
    PhiloxStream(Philox4x32::Key key, Philox4x32::Counter base) : key_(key), ctr_(base) {}

    std::uint32_t next() {
        if (pos_ == 4) {
            block_ = Philox4x32::apply(ctr_, key_);
            // 128-bit little-endian increment
            for (auto& w : ctr_) {
                if (++w != 0) break;
            }
            pos_ = 0;
        }
        return block_[pos_++];
    }

    // Unbiased draw from [0, bound) by multiply-and-reject.
    std::uint32_t uniform_below(std::uint32_t bound) {
        std::uint64_t product = static_cast<std::uint64_t>(next()) * bound;
        auto low = static_cast<std::uint32_t>(product);
        if (low < bound) {
            const std::uint32_t threshold = (0u - bound) % bound;
            while (low < threshold) {
                product = static_cast<std::uint64_t>(next()) * bound;
                low = static_cast<std::uint32_t>(product);
            }
        }
        return static_cast<std::uint32_t>(product >> 32);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        const std::uint64_t hi = next() >> 5;
        const std::uint64_t lo = next() >> 6;
        return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
    }

private:
    Philox4x32::Key key_;
    Philox4x32::Counter ctr_;
    Philox4x32::Counter block_{};
    int pos_ = 4;
};

// Seed of trial `index` under `base_seed`; independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    const auto out = Philox4x32::apply(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x74726961u, 0u},
        Philox4x32::key_from_seed(base_seed));
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace cantor
