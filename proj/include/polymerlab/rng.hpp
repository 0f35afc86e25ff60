#ifndef POLYMERLAB_RNG_HPP
#define POLYMERLAB_RNG_HPP

#include <array>
#include <cstdint>

namespace polymerlab {

// Counter-based stream: every variate is a pure function of (seed, counter
// words).  No sequential state, so field sites can be generated in any order
// and replicas can share a lattice without coordination.

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_key(uint64_t seed, uint64_t k1, uint64_t k2) {
    uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ k1);
    h = mix64(h ^ k2);
    return h;
}

// Uniform in the open interval (0,1); 52 significant bits.
inline double u01_from_bits(uint64_t h) {
    return (static_cast<double>(h >> 12) + 0.5) * 0x1.0p-52;
}

// Pack lattice coordinates into a 64-bit word, 16 bits per coordinate.
template <typename Coord>
inline uint64_t pack_coords(const Coord& x, int dim) {
    uint64_t p = 0;
    for (int j = 0; j < dim; ++j)
        p |= static_cast<uint64_t>(static_cast<uint16_t>(static_cast<int>(x[j]) + 0x8000))
             << (16 * j);
    return p;
}

// Uniform for lattice site (t, x) under a given field seed.
inline double site_uniform(uint64_t seed, int t, uint64_t packed_x) {
    return u01_from_bits(hash_key(seed, static_cast<uint64_t>(t), packed_x));
}

// Replica-derived seed; keeps replica streams disjoint from field streams.
inline uint64_t replica_seed(uint64_t seed, uint64_t replica) {
    return hash_key(seed, 0x5ca1ab1eULL, replica);
}

// Small sequential generator for the Monte Carlo labs (not for fields),
// seeded from the counter scheme so everything stays reproducible.
struct Sequence {
    uint64_t state;
    explicit Sequence(uint64_t seed) : state(mix64(seed ^ 0x6c62272e07bb0142ULL)) {}
    uint64_t next_bits() {
        state += 0x9e3779b97f4a7c15ULL;
        return mix64(state);
    }
    double next_u01() { return u01_from_bits(next_bits()); }
};

}  // namespace polymerlab

#endif
