#include "gcsg/physics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace gcsg {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw DomainError(fmt::format("{} must be finite", name));
    }
}

void require_in(const ParamRange& r, double v, const char* name) {
    require_finite(v, name);
    if (!r.contains(v)) {
        throw DomainError(fmt::format("{} = {} outside [{}, {}]", name, v, r.min, r.max));
    }
}

}  // namespace

void validate_geometry(const GeometryParams& g) {
    require_in(kPeriodRange, g.period_nm, "period_nm");
    require_in(kFillFactorRange, g.fill_factor, "fill_factor");
    require_in(kEtchDepthRange, g.etch_depth_nm, "etch_depth_nm");
    require_in(kSiThicknessRange, g.si_thickness_nm, "si_thickness_nm");
    require_in(kOxideThicknessRange, g.oxide_thickness_nm, "oxide_thickness_nm");
    if (g.etch_depth_nm > g.si_thickness_nm) {
        throw DomainError(fmt::format("etch_depth_nm = {} exceeds si_thickness_nm = {}", g.etch_depth_nm,
                                      g.si_thickness_nm));
    }
}

GeometryParams make_geometry(double period_nm, double fill_factor, double etch_depth_nm, double si_thickness_nm,
                             double oxide_thickness_nm) {
    GeometryParams g{period_nm, fill_factor, etch_depth_nm, si_thickness_nm, oxide_thickness_nm};
    validate_geometry(g);
    return g;
}

std::string describe(const GeometryParams& g) {
    return fmt::format("period={} nm, ff={}, etch={} nm, t_si={} nm, t_ox={} nm", g.period_nm, g.fill_factor,
                       g.etch_depth_nm, g.si_thickness_nm, g.oxide_thickness_nm);
}

WavelengthGrid::WavelengthGrid() {
    const double step = spacing();
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        points_[i] = kGridMinNm + step * double(i);
    }
    // pin the endpoint exactly rather than trusting the accumulated product
    points_.back() = kGridMaxNm;
}

const WavelengthGrid& WavelengthGrid::standard() {
    static const WavelengthGrid grid;
    return grid;
}

std::size_t WavelengthGrid::nearest_index(double wavelength_nm) const {
    std::size_t best = 0;
    double best_dist = std::abs(points_[0] - wavelength_nm);
    for (std::size_t i = 1; i < kGridPoints; ++i) {
        const double d = std::abs(points_[i] - wavelength_nm);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

double slab_index(double si_thickness_nm) {
    return kSiliconIndex * (1.0 - 0.2 * std::exp(-si_thickness_nm / 150.0));
}

double grating_index(double fill_factor) {
    return kSiliconIndex * fill_factor + kAirIndex * (1.0 - fill_factor);
}

double etch_factor(double etch_depth_nm, double si_thickness_nm) {
    return 1.0 - 0.5 * (etch_depth_nm / si_thickness_nm);
}

double oxide_factor(double oxide_thickness_nm) {
    return 1.0 - 0.3 * std::exp(-oxide_thickness_nm / 1000.0);
}

double resonance_linewidth(double fill_factor, double etch_depth_nm) {
    return 30.0 + 20.0 * (1.0 - fill_factor) + 10.0 * (etch_depth_nm / 100.0);
}

double silicon_absorption_coefficient(double wavelength_nm) {
    // Not squared: grows without bound below 1200 nm, which the grid never reaches.
    return 2.0 + 10.0 * std::exp(-(wavelength_nm / 1000.0 - 1.2) / 0.1);
}

double lorentzian(double detuning_nm, double gamma_nm) {
    const double g2 = gamma_nm * gamma_nm;
    return g2 / (g2 + detuning_nm * detuning_nm);
}

double fabry_perot_ripple(double wavelength_nm, double round_trip_nm) {
    constexpr double kFundamental = 0.05;
    constexpr double kFirstOrder = 0.02;
    const double phase = 2.0 * std::numbers::pi * wavelength_nm / round_trip_nm;
    const double s1 = std::sin(phase);
    const double s2 = std::sin(2.0 * phase);
    return kFundamental * s1 * s1 + kFirstOrder * s2 * s2;
}

EffectiveIndexBreakdown effective_index(const GeometryParams& g) {
    require_finite(g.period_nm, "period_nm");
    require_finite(g.fill_factor, "fill_factor");
    require_finite(g.etch_depth_nm, "etch_depth_nm");
    require_finite(g.si_thickness_nm, "si_thickness_nm");
    require_finite(g.oxide_thickness_nm, "oxide_thickness_nm");
    if (g.si_thickness_nm <= 0.0) {
        throw DomainError("si_thickness_nm must be positive");
    }
    if (g.oxide_thickness_nm < 0.0) {
        throw DomainError("oxide_thickness_nm must be non-negative");
    }

    EffectiveIndexBreakdown b;
    b.n_slab = slab_index(g.si_thickness_nm);
    b.n_grating = grating_index(g.fill_factor);
    b.f_etch = etch_factor(g.etch_depth_nm, g.si_thickness_nm);
    b.n_combined = b.n_slab * b.f_etch + b.n_grating * (1.0 - b.f_etch);
    b.f_oxide = oxide_factor(g.oxide_thickness_nm);
    b.n_eff = b.n_combined * b.f_oxide;
    return b;
}

LorentzianResult lorentzian_transmission(const GeometryParams& g, double n_eff, const WavelengthGrid& grid,
                                         std::optional<double> gamma_override_nm) {
    require_finite(n_eff, "n_eff");
    if (n_eff <= 0.0) {
        throw DomainError("n_eff must be positive");
    }
    LorentzianResult out;
    out.center_wavelength_nm = g.period_nm * n_eff;
    out.gamma_nm = gamma_override_nm ? *gamma_override_nm : resonance_linewidth(g.fill_factor, g.etch_depth_nm);
    require_finite(out.gamma_nm, "gamma_nm");
    if (out.gamma_nm <= 0.0) {
        throw DomainError("linewidth must be positive");
    }

    for (std::size_t i = 0; i < kGridPoints; ++i) {
        out.base_transmission[i] = lorentzian(grid[i] - out.center_wavelength_nm, out.gamma_nm);
    }
    return out;
}

Spectrum fabry_perot(double n_eff, double si_thickness_nm, const WavelengthGrid& grid) {
    require_finite(n_eff, "n_eff");
    require_finite(si_thickness_nm, "si_thickness_nm");
    if (n_eff <= 0.0 || si_thickness_nm <= 0.0) {
        throw DomainError("fabry_perot needs positive n_eff and thickness");
    }
    const double round_trip = 2.0 * n_eff * si_thickness_nm;
    Spectrum t{};
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        t[i] = fabry_perot_ripple(grid[i], round_trip);
    }
    return t;
}

Spectrum absorption(const GeometryParams& g, const WavelengthGrid& grid) {
    const double scatter = 0.01 * (g.etch_depth_nm / 50.0);
    const double thickness_scale = 0.001 * (g.si_thickness_nm / 100.0);
    Spectrum a{};
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        a[i] = silicon_absorption_coefficient(grid[i]) * thickness_scale + scatter;
    }
    return a;
}

SpectrumTriple compose_raw(const Spectrum& base_transmission, const Spectrum& fabry_perot,
                           const Spectrum& raw_absorption, bool include_fabry_perot) {
    SpectrumTriple s;
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        const double combined = base_transmission[i] + (include_fabry_perot ? fabry_perot[i] : 0.0);
        const double t = std::min(combined, kTransmissionCap);
        const double a = raw_absorption[i];
        // T + A can exceed one near 1200 nm when the capped peak meets deep-etch
        // loss, leaving R slightly negative. Kept as computed.
        if (!std::isfinite(t) || !std::isfinite(a)) {
            throw InvariantError(fmt::format("non-finite T or A at grid index {}", i));
        }
        s.transmittance[i] = t;
        s.absorbance[i] = a;
        s.reflectance[i] = 1.0 - t - a;
    }
    return s;
}

SpectrumTriple energy_normalize(SpectrumTriple s) {
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        double& r = s.reflectance[i];
        double& t = s.transmittance[i];
        double& a = s.absorbance[i];
        const double sum = r + t + a;
        if (std::abs(sum - 1.0) > kNormalizationTolerance) {
            const double scale = (1.0 - a) / (r + t + kNormalizationEpsilon);
            r *= scale;
            t *= scale;
        }
        const double total = r + t + a;
        r /= total;
        t /= total;
        a = 1.0 - r - t;
    }
    return s;
}

double max_conservation_error(const SpectrumTriple& s) {
    double worst = 0.0;
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        worst = std::max(worst, std::abs(s.reflectance[i] + s.transmittance[i] + s.absorbance[i] - 1.0));
    }
    return worst;
}

}  // namespace gcsg
