#pragma once

#include <cstdint>
#include <random>

namespace gcsg {

/// SplitMix64 finalizer. Used to derive independent per-sample seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of the substream owned by sample `index` under `master_seed`.
[[nodiscard]] constexpr std::uint64_t derive_sample_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Deterministic single-owner random stream.
///
/// Backed by std::mt19937_64, whose output sequence the standard fixes. The
/// uniform and normal transforms are implemented here rather than through
/// <random> distributions so that streams are identical across standard
/// libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    static RandomStream for_sample(std::uint64_t master_seed, std::uint64_t index) {
        return RandomStream(derive_sample_seed(master_seed, index));
    }

    RandomStream(const RandomStream&) = delete;
    RandomStream& operator=(const RandomStream&) = delete;
    RandomStream(RandomStream&&) = default;
    RandomStream& operator=(RandomStream&&) = default;

    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method.
    double normal();

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gcsg
