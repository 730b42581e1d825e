#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace xbadp {

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Child seed for a keyed sub-stream, e.g. derive_seed(root, {path}) or derive_seed(root, {j, t}).
/// Each key is folded in with a SplitMix64 step, so distinct key tuples give unrelated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept;

/// mt19937_64 seeded from a 64-bit seed. uniform() = (x >> 11) * 2^-53.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 eng_;
};

}  // namespace xbadp
