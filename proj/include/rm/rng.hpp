#pragma once
#include <cstdint>
#include <random>

namespace rm {

/** Deterministic stream derivation for parallel simulation.
 *
 * Every simulated object (train, replication, bootstrap draw, ...) gets its
 * own engine seeded from a root seed and a small tuple of stream keys, so
 * results do not depend on scheduling or evaluation order.
 */
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t k1,
                                 std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ k1);
    h = splitmix64(h ^ k2);
    h = splitmix64(h ^ k3);
    return h;
}

inline std::mt19937_64 make_engine(std::uint64_t root, std::uint64_t k1,
                                   std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    return std::mt19937_64(derive_seed(root, k1, k2, k3));
}

} // namespace rm
