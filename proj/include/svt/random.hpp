#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace svt {

// Seeded generator whose derived draws are identical on every platform.
// std::mt19937_64 output is fixed by the standard; the distribution
// adaptors in <random> are not, so the ones we need live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::size_t index(std::size_t n);

    // Marsaglia polar method; one spare value is cached.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Deterministic child seed for a named sub-stream (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

}  // namespace svt
