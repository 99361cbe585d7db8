#ifndef SHIPPERF_RNG_HPP
#define SHIPPERF_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace shipperf {

/// Deterministic pseudo-random stream (splitmix64 core).
///
/// Distribution sampling is implemented here rather than with <random> so
/// that generated datasets are byte-identical across standard libraries.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (cosine branch only).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Exponential with the given mean, truncated at `cap` (inverse CDF of the
    /// truncated distribution, single draw).
    double truncated_exponential(double mean, double cap) {
        const double u = uniform();
        const double tail = 1.0 - std::exp(-cap / mean);
        return -mean * std::log(1.0 - u * tail);
    }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    /// Derives a component seed from a root seed and a component name, so that
    /// independent pipeline stages consume independent streams.
    static std::uint64_t derive(std::uint64_t root, std::string_view component) {
        std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
        for (char c : component) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 0x100000001b3ULL;
        }
        SplitRng mix(root ^ h);
        return mix.next_u64();
    }

private:
    std::uint64_t state_;
};

} // namespace shipperf

#endif
