#pragma once
// Deterministic RNG with platform-independent draws.
//
// std::uniform_int_distribution is not guaranteed to produce the same
// sequence across standard-library implementations, so bounded draws and
// shuffles are implemented here directly on top of xoshiro256**.

#include <cstdint>
#include <string>
#include <vector>

namespace difbench {

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // seed expansion via splitmix64
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, bound), bound > 0; rejection sampling, no modulo bias
    std::uint64_t bounded(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // uniform integer in the inclusive range [lo, hi]
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    // first `count` elements of a Fisher-Yates pass: a uniform random
    // subset of v, without replacement, in random order
    template <typename T>
    std::vector<T> sample(std::vector<T> v, std::size_t count) {
        if (count > v.size()) count = v.size();
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t j = i + static_cast<std::size_t>(bounded(v.size() - i));
            using std::swap;
            swap(v[i], v[j]);
        }
        v.resize(count);
        return v;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4] = {};
};

// FNV-1a, used for stable seed fan-out and content addressing
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a_str(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

}  // namespace difbench
