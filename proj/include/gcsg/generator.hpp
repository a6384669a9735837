#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gcsg/noise.hpp"
#include "gcsg/physics.hpp"
#include "gcsg/random.hpp"

namespace gcsg {

enum class VariantId : std::uint32_t {
    Reference = 0,
    A_NoExplicitEnforcement = 1,
    B_NoFabryPerot = 2,
    C_FixedBandwidth = 3,
    D_NoNoise = 4,
};

inline constexpr std::array<VariantId, 5> kAllVariants{VariantId::Reference, VariantId::A_NoExplicitEnforcement,
                                                        VariantId::B_NoFabryPerot, VariantId::C_FixedBandwidth,
                                                        VariantId::D_NoNoise};

/// Short CLI / file name: reference, a, b, c, d.
[[nodiscard]] std::string_view to_string(VariantId id);
/// Human-readable label used in reports.
[[nodiscard]] std::string_view label(VariantId id);
[[nodiscard]] VariantId parse_variant(std::string_view text);

inline constexpr double kDefaultFixedGammaNm = 52.5;
inline constexpr std::uint64_t kDefaultMasterSeed = 42;

struct VariantConfig {
    VariantId variant_id = VariantId::Reference;
    double fixed_gamma_nm = kDefaultFixedGammaNm;
    NoiseConfig noise{};

    /// Defaults implied by the variant: D has noise off, every other variant
    /// gets clip-then-renormalize at 1%.
    static VariantConfig for_variant(VariantId id);

    friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

void validate_variant(const VariantConfig& cfg);

/// Stored (single-precision) spectrum of one sample.
struct StoredSpectrum {
    std::array<float, kGridPoints> reflectance{};
    std::array<float, kGridPoints> transmittance{};
    std::array<float, kGridPoints> absorbance{};
    float center_wavelength_nm = 0.0f;
    float linewidth_nm = 0.0f;

    friend bool operator==(const StoredSpectrum&, const StoredSpectrum&) = default;
};

[[nodiscard]] StoredSpectrum to_stored(const SpectrumTriple& s);

struct Sample {
    std::uint64_t index = 0;
    /// Float-representable values; these are exactly what the physics saw.
    GeometryParams params{};
    StoredSpectrum spectrum{};
    /// Seed of this sample's substream.
    std::uint64_t seed_material = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

inline constexpr std::uint16_t kFormatVersionMajor = 1;
inline constexpr std::uint16_t kFormatVersionMinor = 0;

struct GridSpec {
    double min_nm = kGridMinNm;
    double max_nm = kGridMaxNm;
    std::uint32_t points = kGridPoints;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct Manifest {
    std::uint16_t format_version_major = kFormatVersionMajor;
    std::uint16_t format_version_minor = kFormatVersionMinor;
    VariantConfig variant{};
    std::uint64_t master_seed = kDefaultMasterSeed;
    std::uint64_t sample_count = 0;
    GridSpec grid{};
    std::string created_utc;
    double throughput_samples_per_sec = 0.0;
    unsigned threads_used = 1;
    std::optional<nlohmann::json> report;
};

struct Dataset {
    Manifest manifest;
    std::vector<Sample> samples;
};

/// Raised when a batch cannot be produced (e.g. allocation failure). No
/// partial dataset is returned.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Independent uniform draws over the manufacturable ranges, in the order
/// period, fill factor, etch depth, Si thickness, oxide thickness.
[[nodiscard]] GeometryParams sample_parameters(RandomStream& rng);

/// Rounds each field to the nearest float so that what is stored on disk is
/// exactly what the physics consumed.
[[nodiscard]] GeometryParams quantize_to_storage(const GeometryParams& g);

/// Noiseless spectrum before any normalization (compose_raw output) for the
/// given variant's Γ and Fabry-Perot choices.
[[nodiscard]] SpectrumTriple raw_spectrum(const GeometryParams& params, const VariantConfig& cfg);

/// Full double-precision variant pipeline.
[[nodiscard]] SpectrumTriple simulate(const GeometryParams& params, const VariantConfig& cfg, RandomStream& rng);

/// simulate() then cast to single precision.
[[nodiscard]] Sample generate_spectrum(const GeometryParams& params, const VariantConfig& cfg, RandomStream& rng);

/// Sample `index` under `master_seed`: parameters are drawn from the
/// sample's own substream, then the same stream feeds the noise stage.
[[nodiscard]] Sample generate_sample(std::uint64_t index, const VariantConfig& cfg, std::uint64_t master_seed);

/// Deterministic batch. Output is identical for every `threads` value;
/// 0 means hardware concurrency.
[[nodiscard]] Dataset generate_dataset(std::uint64_t count, const VariantConfig& cfg, std::uint64_t master_seed,
                                       unsigned threads = 1);

[[nodiscard]] std::string utc_timestamp();

}  // namespace gcsg
