#include "gcsg/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace gcsg {

namespace {

double channel_sigma(const Spectrum& channel, double relative_sigma) {
    return relative_sigma * *std::max_element(channel.begin(), channel.end());
}

// Reflectance deviates first, then transmittance; the order is part of the
// reproducibility contract.
void perturb(SpectrumTriple& s, double relative_sigma, RandomStream& rng) {
    const double sigma_r = channel_sigma(s.reflectance, relative_sigma);
    const double sigma_t = channel_sigma(s.transmittance, relative_sigma);
    for (double& r : s.reflectance) {
        r += sigma_r * rng.normal();
    }
    for (double& t : s.transmittance) {
        t += sigma_t * rng.normal();
    }
}

}  // namespace

void validate_noise(const NoiseConfig& cfg) {
    if (!std::isfinite(cfg.relative_sigma) || cfg.relative_sigma < 0.0) {
        throw DomainError(fmt::format("relative_sigma must be finite and >= 0, got {}", cfg.relative_sigma));
    }
}

std::string_view to_string(NoiseMode mode) {
    switch (mode) {
        case NoiseMode::Off:
            return "off";
        case NoiseMode::ClipThenRenormalize:
            return "clip-then-renormalize";
        case NoiseMode::SafeBounded:
            return "safe-bounded";
    }
    return "unknown";
}

NoiseMode parse_noise_mode(std::string_view text) {
    if (text == "off") return NoiseMode::Off;
    if (text == "clip-then-renormalize" || text == "clip") return NoiseMode::ClipThenRenormalize;
    if (text == "safe-bounded" || text == "safe") return NoiseMode::SafeBounded;
    throw DomainError(fmt::format("unknown noise mode '{}'", text));
}

SpectrumTriple add_clipped_noise(const SpectrumTriple& s, double relative_sigma, RandomStream& rng) {
    SpectrumTriple out = s;
    perturb(out, relative_sigma, rng);
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        out.reflectance[i] = std::clamp(out.reflectance[i], 0.0, 1.0);
        out.transmittance[i] = std::clamp(out.transmittance[i], 0.0, 1.0);
    }
    return out;
}

SpectrumTriple add_noise(const SpectrumTriple& s, const NoiseConfig& cfg, RandomStream& rng) {
    validate_noise(cfg);
    switch (cfg.mode) {
        case NoiseMode::Off:
            return s;

        case NoiseMode::ClipThenRenormalize: {
            SpectrumTriple noisy = add_clipped_noise(s, cfg.relative_sigma, rng);
            for (std::size_t i = 0; i < kGridPoints; ++i) {
                noisy.absorbance[i] = 1.0 - noisy.reflectance[i] - noisy.transmittance[i];
            }
            return energy_normalize(noisy);
        }

        case NoiseMode::SafeBounded: {
            SpectrumTriple noisy = s;
            perturb(noisy, cfg.relative_sigma, rng);
            for (std::size_t i = 0; i < kGridPoints; ++i) {
                const double ceiling = 1.0 - s.absorbance[i];
                noisy.reflectance[i] = std::clamp(noisy.reflectance[i], 0.0, ceiling);
                noisy.transmittance[i] = std::clamp(noisy.transmittance[i], 0.0, ceiling);
            }
            return energy_normalize(noisy);
        }
    }
    throw InvariantError("unhandled noise mode");
}

}  // namespace gcsg
