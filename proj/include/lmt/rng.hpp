#pragma once

#include <cstdint>
#include <vector>

namespace lmt {

// Deterministic 64-bit generator (splitmix64). We avoid std::uniform_*
// distributions on purpose: their output is implementation-defined, and the
// simulator promises bit-identical traces for a fixed seed regardless of the
// standard library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n) by rejection, bias-free.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Pick an index into a non-empty container.
    template <typename Container>
    std::size_t pick_index(const Container& c) {
        return static_cast<std::size_t>(below(c.size()));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Purposes for derived streams. One master seed feeds independent streams so
// changing how one stage consumes randomness does not perturb the others.
enum class RngPurpose : std::uint64_t {
    deployment = 0x01,
    source_pick = 0x02,
    sink_pick = 0x03,
    energy = 0x04,
    data_jitter = 0x05,
};

inline Rng derive_rng(std::uint64_t master_seed, RngPurpose purpose) {
    // Mix the purpose tag through one splitmix round so streams with nearby
    // seeds do not correlate.
    Rng mixer(master_seed ^ (static_cast<std::uint64_t>(purpose) * 0xd6e8feb86659fd93ULL));
    return Rng(mixer.next_u64());
}

} // namespace lmt
