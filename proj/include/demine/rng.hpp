#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace demine {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t v) {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Child seed = mix(master, tag, indices...). Every RNG stream in the library
// is derived through this so that streams never overlap by accident and any
// trial, fold or cell can be rerun on its own.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::initializer_list<std::uint64_t> indices = {}) {
    std::uint64_t h = mix64(master ^ mix64(hash_tag(tag)));
    for (std::uint64_t i : indices) h = mix64(h ^ mix64(i + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t master, std::string_view tag,
                    std::initializer_list<std::uint64_t> indices = {}) {
    return Rng(derive_seed(master, tag, indices));
}

} // namespace demine
