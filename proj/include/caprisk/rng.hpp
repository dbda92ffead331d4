#pragma once

#include <cstddef>
#include <cstdint>

namespace caprisk {

// splitmix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stateless counter-keyed generator. Every draw is a pure function of
// (seed, stream, counter), so draws may be taken in any order from any
// thread and results do not depend on scheduling. A normal draw with
// index i consumes uniform counters [i*64, (i+1)*64); the ziggurat
// rejection loop never comes close to exhausting that budget.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix64((seed + 0x9E3779B97F4A7C15ull) ^ mix64(stream + 0xD1B54A32D192ED03ull))) {}

    std::uint64_t bits(std::uint64_t counter) const noexcept {
        return mix64(key_ + counter * 0x9E3779B97F4A7C15ull);
    }

    // Uniform in the open interval (0, 1); never returns 0 or 1.
    double u01(std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the ziggurat method, indexed by draw number.
    double normal(std::uint64_t index) const noexcept;

private:
    std::uint64_t key_;
};

// Stateful convenience wrapper for sequential use (sampling, shuffles).
class SequentialRng {
public:
    explicit SequentialRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : rng_(seed, stream) {}

    std::uint64_t next_bits() noexcept { return rng_.bits(counter_++); }

    double next_u01() noexcept { return rng_.u01(counter_++); }

    double next_normal() noexcept { return rng_.normal(normal_index_++); }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::size_t uniform_index(std::size_t bound) noexcept;

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
    std::uint64_t normal_index_ = 1ull << 32; // keep uniform/normal counter spaces apart
};

} // namespace caprisk
