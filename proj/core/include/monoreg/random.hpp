#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace monoreg {

/// SplitMix64 finaliser; a bijection on 64-bit words with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a parent seed and a sequence of labels
/// (draw index, dataset index, cell id, ...). Pure function of its arguments.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> labels) noexcept {
    std::uint64_t h = mix64(parent);
    for (auto v : labels) {
        h = mix64(h ^ mix64(v + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// Stable 64-bit FNV-1a hash for string labels used in seed derivation.
constexpr std::uint64_t label_hash(const char* s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s != '\0'; ++s) {
        h ^= static_cast<unsigned char>(*s);
        h *= 0x100000001b3ULL;
    }
    return h;
}

using Rng = std::mt19937_64;

}  // namespace monoreg
