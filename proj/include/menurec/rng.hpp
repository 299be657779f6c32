#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace menurec {

/// Seedable, splittable random stream. Every stochastic operation in the
/// library takes one of these explicitly so runs are replayable from config.
///
/// split("label") derives an independent stream from the parent seed and the
/// label, so parallel replicas can share a master seed without sharing state.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    Rng split(std::string_view label) const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a over seed bytes + label
        auto mix = [&h](std::uint64_t byte) {
            h ^= byte;
            h *= 1099511628211ull;
        };
        for (int i = 0; i < 8; ++i) mix((seed_ >> (8 * i)) & 0xff);
        for (char c : label) mix(static_cast<std::uint8_t>(c));
        return Rng(h);
    }

    Rng split(std::string_view label, std::uint64_t index) const {
        return split(std::string(label) + "#" + std::to_string(index));
    }

    std::uint64_t seed() const { return seed_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace menurec
