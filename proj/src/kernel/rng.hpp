#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace hare {

// Platform-stable random stream. std::mt19937_64 is fully specified by the
// standard; the distributions below are written out by hand because the
// std:: distributions are implementation-defined.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double standard_normal();
    double normal(double mean, double stddev) { return mean + stddev * standard_normal(); }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

// Stream ids. Each agent gets its own stream so instrumentation draws never
// perturb agent behaviour.
namespace streams {
inline constexpr std::uint64_t kSetup = 0;
inline constexpr std::uint64_t kContention = 1;
inline constexpr std::uint64_t kPolicy = 2;
inline constexpr std::uint64_t kAgentBase = 1000;
}  // namespace streams

}  // namespace hare
