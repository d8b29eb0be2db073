#ifndef CRNGNET_RNG_HPP
#define CRNGNET_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace crngnet {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Named random stream.  The state depends only on (seed, path), so a stream
// like {trial, purpose} is identical no matter which thread draws it or in
// which order streams are created.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = splitmix64(seed);
        for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
        eng_.seed(h);
    }

    std::uint64_t next() { return eng_(); }

    // uniform integer in [0, n), n >= 1
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    // uniform double in [0, 1)
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // index drawn proportionally to nonnegative weights; total must be > 0
    template <class Vec>
    std::size_t weighted(const Vec& weights, double total) {
        double u = uniform01() * total;
        std::size_t last = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0) continue;
            last = i;
            u -= weights[i];
            if (u < 0) return i;
        }
        return last;  // fp slack lands on the last positive weight
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace crngnet

#endif  // CRNGNET_RNG_HPP
