#include "gcsg/generator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fmt/format.h>
#include <functional>
#include <new>
#include <thread>

namespace gcsg {

std::string_view to_string(VariantId id) {
    switch (id) {
        case VariantId::Reference:
            return "reference";
        case VariantId::A_NoExplicitEnforcement:
            return "a";
        case VariantId::B_NoFabryPerot:
            return "b";
        case VariantId::C_FixedBandwidth:
            return "c";
        case VariantId::D_NoNoise:
            return "d";
    }
    return "unknown";
}

std::string_view label(VariantId id) {
    switch (id) {
        case VariantId::Reference:
            return "Reference";
        case VariantId::A_NoExplicitEnforcement:
            return "A (No Explicit Energy Enforcement)";
        case VariantId::B_NoFabryPerot:
            return "B (No Fabry-Perot)";
        case VariantId::C_FixedBandwidth:
            return "C (Fixed Bandwidth)";
        case VariantId::D_NoNoise:
            return "D (No Noise)";
    }
    return "unknown";
}

VariantId parse_variant(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (lower == "reference" || lower == "ref") return VariantId::Reference;
    if (lower == "a" || lower == "no-enforcement") return VariantId::A_NoExplicitEnforcement;
    if (lower == "b" || lower == "no-fabry-perot") return VariantId::B_NoFabryPerot;
    if (lower == "c" || lower == "fixed-bandwidth") return VariantId::C_FixedBandwidth;
    if (lower == "d" || lower == "no-noise") return VariantId::D_NoNoise;
    throw DomainError(fmt::format("unknown variant '{}'", text));
}

VariantConfig VariantConfig::for_variant(VariantId id) {
    VariantConfig cfg;
    cfg.variant_id = id;
    if (id == VariantId::D_NoNoise) {
        cfg.noise.mode = NoiseMode::Off;
    }
    return cfg;
}

void validate_variant(const VariantConfig& cfg) {
    validate_noise(cfg.noise);
    if (!std::isfinite(cfg.fixed_gamma_nm) || cfg.fixed_gamma_nm <= 0.0) {
        throw DomainError(fmt::format("fixed_gamma_nm must be positive, got {}", cfg.fixed_gamma_nm));
    }
}

StoredSpectrum to_stored(const SpectrumTriple& s) {
    StoredSpectrum out;
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        out.reflectance[i] = static_cast<float>(s.reflectance[i]);
        out.transmittance[i] = static_cast<float>(s.transmittance[i]);
        out.absorbance[i] = static_cast<float>(s.absorbance[i]);
    }
    out.center_wavelength_nm = static_cast<float>(s.center_wavelength_nm);
    out.linewidth_nm = static_cast<float>(s.linewidth_nm);
    return out;
}

GeometryParams sample_parameters(RandomStream& rng) {
    GeometryParams g;
    g.period_nm = rng.uniform(kPeriodRange.min, kPeriodRange.max);
    g.fill_factor = rng.uniform(kFillFactorRange.min, kFillFactorRange.max);
    g.etch_depth_nm = rng.uniform(kEtchDepthRange.min, kEtchDepthRange.max);
    g.si_thickness_nm = rng.uniform(kSiThicknessRange.min, kSiThicknessRange.max);
    g.oxide_thickness_nm = rng.uniform(kOxideThicknessRange.min, kOxideThicknessRange.max);
    return g;
}

GeometryParams quantize_to_storage(const GeometryParams& g) {
    auto q = [](double v, const ParamRange& r) {
        return std::clamp(double(static_cast<float>(v)), r.min, r.max);
    };
    return GeometryParams{q(g.period_nm, kPeriodRange), q(g.fill_factor, kFillFactorRange),
                          q(g.etch_depth_nm, kEtchDepthRange), q(g.si_thickness_nm, kSiThicknessRange),
                          q(g.oxide_thickness_nm, kOxideThicknessRange)};
}

SpectrumTriple raw_spectrum(const GeometryParams& params, const VariantConfig& cfg) {
    const auto& grid = WavelengthGrid::standard();
    const EffectiveIndexBreakdown index = effective_index(params);

    std::optional<double> gamma_override;
    if (cfg.variant_id == VariantId::C_FixedBandwidth) {
        gamma_override = cfg.fixed_gamma_nm;
    }
    const LorentzianResult resonance = lorentzian_transmission(params, index.n_eff, grid, gamma_override);

    const bool include_fp = cfg.variant_id != VariantId::B_NoFabryPerot;
    const Spectrum ripple = include_fp ? fabry_perot(index.n_eff, params.si_thickness_nm, grid) : Spectrum{};
    const Spectrum loss = absorption(params, grid);

    SpectrumTriple s = compose_raw(resonance.base_transmission, ripple, loss, include_fp);
    s.center_wavelength_nm = resonance.center_wavelength_nm;
    s.linewidth_nm = resonance.gamma_nm;
    return s;
}

SpectrumTriple simulate(const GeometryParams& params, const VariantConfig& cfg, RandomStream& rng) {
    const SpectrumTriple raw = raw_spectrum(params, cfg);

    if (cfg.variant_id == VariantId::A_NoExplicitEnforcement) {
        // Noise and clip, but never renormalize: absorbance stays A_raw.
        if (cfg.noise.mode == NoiseMode::Off) {
            return raw;
        }
        return add_clipped_noise(raw, cfg.noise.relative_sigma, rng);
    }

    if (cfg.noise.mode == NoiseMode::Off) {
        return energy_normalize(raw);
    }
    return add_noise(raw, cfg.noise, rng);
}

Sample generate_spectrum(const GeometryParams& params, const VariantConfig& cfg, RandomStream& rng) {
    validate_geometry(params);
    Sample s;
    s.params = params;
    s.seed_material = rng.seed();
    s.spectrum = to_stored(simulate(params, cfg, rng));
    return s;
}

Sample generate_sample(std::uint64_t index, const VariantConfig& cfg, std::uint64_t master_seed) {
    RandomStream rng = RandomStream::for_sample(master_seed, index);
    const GeometryParams params = quantize_to_storage(sample_parameters(rng));
    Sample s = generate_spectrum(params, cfg, rng);
    s.index = index;
    return s;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Dataset generate_dataset(std::uint64_t count, const VariantConfig& cfg, std::uint64_t master_seed, unsigned threads) {
    if (count == 0) {
        throw std::invalid_argument("dataset count must be at least 1");
    }
    validate_variant(cfg);
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));

    Dataset d;
    d.manifest.variant = cfg;
    d.manifest.master_seed = master_seed;
    d.manifest.sample_count = count;
    d.manifest.created_utc = utc_timestamp();
    d.manifest.threads_used = threads;

    const auto start = std::chrono::steady_clock::now();
    try {
        d.samples.resize(count);

        // Contiguous blocks per worker; every slot is written by exactly one
        // thread and depends only on its index.
        auto work = [&](std::uint64_t begin, std::uint64_t end, std::exception_ptr& err) {
            try {
                for (std::uint64_t i = begin; i < end; ++i) {
                    d.samples[i] = generate_sample(i, cfg, master_seed);
                }
            } catch (...) {
                err = std::current_exception();
            }
        };

        std::vector<std::exception_ptr> errors(threads);
        if (threads == 1) {
            work(0, count, errors[0]);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(threads);
            const std::uint64_t chunk = (count + threads - 1) / threads;
            for (unsigned t = 0; t < threads; ++t) {
                const std::uint64_t begin = std::min<std::uint64_t>(count, t * chunk);
                const std::uint64_t end = std::min<std::uint64_t>(count, begin + chunk);
                pool.emplace_back(work, begin, end, std::ref(errors[t]));
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    } catch (const std::bad_alloc&) {
        throw GenerationError(fmt::format("out of memory generating {} samples", count));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    d.manifest.throughput_samples_per_sec = seconds > 0.0 ? double(count) / seconds : 0.0;
    return d;
}

}  // namespace gcsg
