#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lbd {

// Deterministic per-replica random stream. Streams derived from the same
// master seed and distinct ids are independent for all practical purposes;
// sampling primitives are implemented here (not via std distributions) so
// that a given stream yields the same draws on any standard library.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::seed_seq seq{master_seed, stream_id,
                          static_cast<std::uint64_t>(0x9e3779b97f4a7c15ULL)};
        eng_.seed(seq);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential(double rate) {
        // -log(1 - U); 1 - U > 0 since U < 1.
        return -std::log1p(-uniform01()) / rate;
    }

    // Product-of-uniforms method; exact for any mean, O(mean) draws.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        while (true) {
            p *= uniform01();
            if (p <= limit) return k;
            ++k;
        }
    }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace lbd
