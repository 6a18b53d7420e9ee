#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace multilink {

// Mixes a 64-bit value into a well-distributed 64-bit hash (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Maps 64 random bits to a double in [0, 1).
inline double bits_to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Seeded random source used by every sampling routine in the library.
// std::mt19937_64 has a fully specified output sequence, and the bounded /
// real draws below avoid std::uniform_*_distribution (whose mappings differ
// between standard libraries), so a seed produces the same stream on every
// platform and compiler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Unbiased integer in [0, bound) by rejection. bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % bound;
    }

    double unit() { return bits_to_unit(eng_()); }

    // Fisher-Yates; a full shuffle is partial_shuffle(v, v.size()).
    template <typename T>
    void partial_shuffle(std::vector<T>& v, std::size_t k) {
        const std::size_t n = v.size();
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(v[i], v[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (!v.empty()) partial_shuffle(v, v.size() - 1);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace multilink
