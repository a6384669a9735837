#pragma once

#include <string_view>

#include "gcsg/physics.hpp"
#include "gcsg/random.hpp"

namespace gcsg {

enum class NoiseMode {
    Off,
    /// Gaussian noise, clip to [0, 1], A = 1 - R - T, then energy_normalize.
    ClipThenRenormalize,
    /// Gaussian noise, clip to [0, 1 - A_raw], then energy_normalize against
    /// A_raw. Keeps A >= 0.
    SafeBounded,
};

struct NoiseConfig {
    /// Standard deviation as a fraction of each channel's maximum.
    double relative_sigma = 0.01;
    NoiseMode mode = NoiseMode::ClipThenRenormalize;

    friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

void validate_noise(const NoiseConfig& cfg);

[[nodiscard]] std::string_view to_string(NoiseMode mode);
[[nodiscard]] NoiseMode parse_noise_mode(std::string_view text);

/// Draws 100 reflectance deviates followed by 100 transmittance deviates
/// from rng. Absorbance of `s` is taken as the raw (pre-noise) absorbance.
[[nodiscard]] SpectrumTriple add_noise(const SpectrumTriple& s, const NoiseConfig& cfg, RandomStream& rng);

/// Noise and clip to [0, 1] only; absorbance is left as given.
[[nodiscard]] SpectrumTriple add_clipped_noise(const SpectrumTriple& s, double relative_sigma, RandomStream& rng);

}  // namespace gcsg
