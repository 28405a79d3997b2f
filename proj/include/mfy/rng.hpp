#pragma once
// Reproducible seeded randomness.
//
// Generator: xoshiro256** (Blackman & Vigna), state expanded from a 64-bit
// seed with splitmix64. Both algorithms are fully specified, so streams are
// identical across platforms and standard libraries (std distributions are
// not, which is why bounded draws are implemented here).
//
// Substreams: derive(master, tags...) folds integer tags through splitmix64
// steps, giving independent deterministic streams per frame / stage /
// replication. Draws for frame 3 do not depend on whether frame 2 drew first.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace mfy {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl_(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl_(s_[3], 45);
        return result;
    }

    // Uniform in [0, bound), unbiased via rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal (Box-Muller on demand).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t rotl_(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4]{};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Deterministic substream key from a master seed and a list of tags.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t st = master;
    (void)splitmix64_next(st);
    for (std::uint64_t tag : tags) {
        st ^= splitmix64_next(st) ^ (tag + 0x9e3779b97f4a7c15ULL);
        (void)splitmix64_next(st);
    }
    return splitmix64_next(st);
}

// srswor: k distinct indices from [0, n), uniform over k-subsets, returned
// sorted. Sparse partial Fisher-Yates, O(k) memory regardless of n.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

} // namespace mfy
