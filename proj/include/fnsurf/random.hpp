#pragma once

#include <cstdint>
#include <random>

namespace fnsurf {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based split: child streams depend only on (parent, index).
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

template <class G>
double uniform01(G& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Cheap generator for one-off keyed draws (tree edge weights): the splitmix64
// sequence started at the key.
struct KeyedStream {
    using result_type = std::uint64_t;
    std::uint64_t state;
    explicit KeyedStream(std::uint64_t key) : state(key) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return UINT64_MAX; }
    result_type operator()() {
        state += 0x9e3779b97f4a7c15ULL;
        return splitmix64(state);
    }
};

// Uniform integer in [0, n).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Named sub-streams used across the library.
enum class StreamTag : std::uint64_t { pairing = 1, weights = 2, roots = 3, trials = 4, tree = 5 };

inline std::uint64_t stream_seed(std::uint64_t seed, StreamTag tag) {
    return derive_seed(seed, static_cast<std::uint64_t>(tag));
}

}  // namespace fnsurf
