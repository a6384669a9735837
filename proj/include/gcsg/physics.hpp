#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace gcsg {

inline constexpr std::size_t kGridPoints = 100;
inline constexpr double kGridMinNm = 1200.0;
inline constexpr double kGridMaxNm = 1600.0;

inline constexpr double kSiliconIndex = 3.48;
inline constexpr double kAirIndex = 1.0;

/// Cap applied to the combined resonance + interference transmission.
inline constexpr double kTransmissionCap = 0.95;

/// Pointwise |R+T+A-1| above which normalization rescales R and T first.
inline constexpr double kNormalizationTolerance = 1e-4;
inline constexpr double kNormalizationEpsilon = 1e-12;

using Spectrum = std::array<double, kGridPoints>;

/// Raised for non-finite or non-physical inputs to the closed-form models.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an internal identity the pipeline relies on is broken.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct ParamRange {
    double min;
    double max;
    [[nodiscard]] constexpr bool contains(double v) const { return v >= min && v <= max; }
};

inline constexpr ParamRange kPeriodRange{300.0, 700.0};
inline constexpr ParamRange kFillFactorRange{0.3, 0.7};
inline constexpr ParamRange kEtchDepthRange{50.0, 200.0};
inline constexpr ParamRange kSiThicknessRange{200.0, 300.0};
inline constexpr ParamRange kOxideThicknessRange{1000.0, 2000.0};

/// Grating geometry. Lengths in nanometers.
///
/// The aggregate itself accepts any values so the formulas can be probed
/// outside the manufacturable window; use make_geometry() or
/// validate_geometry() at public boundaries.
struct GeometryParams {
    double period_nm = 500.0;
    double fill_factor = 0.5;
    double etch_depth_nm = 125.0;
    double si_thickness_nm = 250.0;
    double oxide_thickness_nm = 1500.0;

    friend bool operator==(const GeometryParams&, const GeometryParams&) = default;
};

/// Throws DomainError if any field is outside its manufacturable range or
/// the etch is deeper than the silicon layer.
void validate_geometry(const GeometryParams& g);

[[nodiscard]] GeometryParams make_geometry(double period_nm, double fill_factor, double etch_depth_nm,
                                           double si_thickness_nm, double oxide_thickness_nm);

[[nodiscard]] std::string describe(const GeometryParams& g);

/// The fixed 100-point wavelength grid, endpoints inclusive.
class WavelengthGrid {
public:
    static const WavelengthGrid& standard();

    [[nodiscard]] std::span<const double, kGridPoints> points() const { return points_; }
    [[nodiscard]] double operator[](std::size_t i) const { return points_[i]; }
    [[nodiscard]] double spacing() const { return (kGridMaxNm - kGridMinNm) / double(kGridPoints - 1); }
    [[nodiscard]] static constexpr std::size_t size() { return kGridPoints; }

    /// Index of the grid point closest to wavelength_nm (lower index on ties).
    [[nodiscard]] std::size_t nearest_index(double wavelength_nm) const;

private:
    WavelengthGrid();
    Spectrum points_{};
};

struct EffectiveIndexBreakdown {
    double n_slab = 0.0;
    double n_grating = 0.0;
    double f_etch = 0.0;
    double n_combined = 0.0;
    double f_oxide = 0.0;
    double n_eff = 0.0;
};

/// Aligned reflectance / transmittance / absorbance on the standard grid.
struct SpectrumTriple {
    Spectrum reflectance{};
    Spectrum transmittance{};
    Spectrum absorbance{};
    double center_wavelength_nm = 0.0;
    double linewidth_nm = 0.0;
};

struct LorentzianResult {
    Spectrum base_transmission{};
    double center_wavelength_nm = 0.0;
    double gamma_nm = 0.0;
};

// Individual sub-models. Exposed separately for the monotonicity properties.
[[nodiscard]] double slab_index(double si_thickness_nm);
[[nodiscard]] double grating_index(double fill_factor);
[[nodiscard]] double etch_factor(double etch_depth_nm, double si_thickness_nm);
[[nodiscard]] double oxide_factor(double oxide_thickness_nm);
[[nodiscard]] double resonance_linewidth(double fill_factor, double etch_depth_nm);
[[nodiscard]] double silicon_absorption_coefficient(double wavelength_nm);

/// Γ² / (Γ² + Δλ²)
[[nodiscard]] double lorentzian(double detuning_nm, double gamma_nm);
/// 0.05 sin²(2πλ/L) + 0.02 sin²(2πλ/(L/2)) at a single wavelength.
[[nodiscard]] double fabry_perot_ripple(double wavelength_nm, double round_trip_nm);

/// Slab confinement, effective-medium grating index, etch mixing and oxide
/// leakage, chained into n_eff.
[[nodiscard]] EffectiveIndexBreakdown effective_index(const GeometryParams& g);

/// Bragg-centred Lorentzian. When gamma_override_nm is set it replaces the
/// geometry-derived linewidth.
[[nodiscard]] LorentzianResult lorentzian_transmission(const GeometryParams& g, double n_eff,
                                                       const WavelengthGrid& grid,
                                                       std::optional<double> gamma_override_nm = std::nullopt);

/// Two-mode sin^2 cavity ripple with round-trip length 2 * n_eff * t_Si.
/// Bounded by 0.05 + 0.02.
[[nodiscard]] Spectrum fabry_perot(double n_eff, double si_thickness_nm, const WavelengthGrid& grid);

/// Urbach-tail silicon absorption plus etch scattering loss.
[[nodiscard]] Spectrum absorption(const GeometryParams& g, const WavelengthGrid& grid);

/// T = min(T_base [+ T_fp], cap); R = 1 - T - A. Conserves by construction.
/// R is not clamped: a capped peak over strong absorption gives R < 0.
[[nodiscard]] SpectrumTriple compose_raw(const Spectrum& base_transmission, const Spectrum& fabry_perot,
                                         const Spectrum& raw_absorption, bool include_fabry_perot);

/// Pointwise proportional rescale (only when |S-1| exceeds the tolerance)
/// followed by exact renormalization with A recomputed as 1 - R - T.
///
/// Input that already closes to one passes through untouched, so an absorbance
/// of 1 - R - T with R + T > 1 stays negative.
[[nodiscard]] SpectrumTriple energy_normalize(SpectrumTriple s);

[[nodiscard]] double max_conservation_error(const SpectrumTriple& s);

}  // namespace gcsg
