#pragma once

#include <cstdint>
#include <string_view>

namespace dbgorilla {

// splitmix64. Used instead of <random> distributions, whose output is
// implementation-defined, so generated files are identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    bool coin() { return (next() >> 63) != 0; }

    template <typename Container>
    const auto& pick(const Container& c) {
        return c[static_cast<std::size_t>(below(c.size()))];
    }

private:
    std::uint64_t state_;
};

constexpr std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    for (char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::string_view a, std::uint64_t b = 0) {
    std::uint64_t h = fnv1a(a, 0xcbf29ce484222325ULL ^ seed);
    h ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace dbgorilla
