// Acceptance run: one PASS/FAIL line per criterion, 10,000 samples per
// variant at master seed 42. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "gcsg/dataset_io.hpp"
#include "gcsg/generator.hpp"
#include "gcsg/validation.hpp"

using namespace gcsg;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCount = 10000;
constexpr std::uint64_t kSeed = 42;

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++failures;
    fmt::print("{}  {:<28} {}\n", ok ? "PASS" : "FAIL", name, detail);
    std::fflush(stdout);
}

void info(const std::string& name, const std::string& detail) { fmt::print("INFO  {:<28} {}\n", name, detail); }

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

void conservation_redundancy() {
    const auto t0 = std::chrono::steady_clock::now();
    auto ref_cfg = VariantConfig::for_variant(VariantId::Reference);
    auto a_cfg = VariantConfig::for_variant(VariantId::A_NoExplicitEnforcement);
    ref_cfg.noise.mode = a_cfg.noise.mode = NoiseMode::Off;

    const Dataset ref = generate_dataset(kCount, ref_cfg, kSeed);
    const Dataset var_a = generate_dataset(kCount, a_cfg, kSeed);

    std::uint64_t identical = 0;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        const auto& x = ref.samples[i].spectrum;
        const auto& y = var_a.samples[i].spectrum;
        if (x == y) {
            ++identical;
            continue;
        }
        for (std::size_t j = 0; j < kGridPoints; ++j) {
            max_diff = std::max({max_diff, double(std::abs(x.reflectance[j] - y.reflectance[j])),
                                 double(std::abs(x.transmittance[j] - y.transmittance[j])),
                                 double(std::abs(x.absorbance[j] - y.absorbance[j]))});
        }
    }
    const double stored_ref = energy_metrics(ref).max_energy_error;
    const double stored_a = energy_metrics(var_a).max_energy_error;

    double double_max = 0.0;
    RandomStream unused(0);
    for (const auto& s : ref.samples) {
        double_max = std::max(double_max, max_conservation_error(simulate(s.params, ref_cfg, unused)));
        double_max = std::max(double_max, max_conservation_error(simulate(s.params, a_cfg, unused)));
    }
    const double elapsed = seconds_since(t0);

    const bool ok = identical == kCount && stored_ref <= 1e-6 && stored_a <= 1e-6 && double_max <= 1e-12 &&
                    elapsed < 120.0;
    verdict(ok, "conservation-redundancy",
            fmt::format("bit-identical {}/{} (max stored diff {:.1e}), stored max err ref {:.2e} a {:.2e} (<=1e-6), double max err {:.2e} "
                        "(<=1e-12), {:.1f}s (<120s)",
                        identical, kCount, max_diff, stored_ref, stored_a, double_max, elapsed));
}

}  // namespace

int main() {
    fmt::print("acceptance: {} samples per variant, master seed {}\n", kCount, kSeed);

    conservation_redundancy();

    std::map<VariantId, Dataset> data;
    std::map<VariantId, ValidationReport> reports;
    for (VariantId id : kAllVariants) {
        data.emplace(id, generate_dataset(kCount, VariantConfig::for_variant(id), kSeed));
        reports.emplace(id, validate(data.at(id)));
    }

    {
        bool ok = true;
        std::string detail;
        for (const auto& [id, r] : reports) {
            ok = ok && r.energy.valid_sample_fraction == 1.0;
            detail += fmt::format("{}={:.4f} ", to_string(id), r.energy.valid_sample_fraction);
        }
        verdict(ok, "valid-sample-rate", detail + "(each == 1.0)");
        const auto& a = reports.at(VariantId::A_NoExplicitEnforcement);
        info("variant-a-noiseless-valid",
             fmt::format("{:.4f} (noiseless re-synthesis of variant a)", a.noiseless_energy->valid_sample_fraction));
    }

    {
        auto safe_cfg = VariantConfig::for_variant(VariantId::Reference);
        safe_cfg.noise.mode = NoiseMode::SafeBounded;
        const double safe = negative_absorption_fraction(generate_dataset(kCount, safe_cfg, kSeed));
        const double f_ref = reports.at(VariantId::Reference).negative_absorption_fraction;
        const double f_b = reports.at(VariantId::B_NoFabryPerot).negative_absorption_fraction;
        const double f_c = reports.at(VariantId::C_FixedBandwidth).negative_absorption_fraction;
        const double f_a = reports.at(VariantId::A_NoExplicitEnforcement).negative_absorption_fraction;
        const double f_d = reports.at(VariantId::D_NoNoise).negative_absorption_fraction;
        const bool ok = in_band(f_ref, 0.003, 0.008) && in_band(f_b, 0.003, 0.008) && in_band(f_c, 0.003, 0.008) &&
                        f_a == 0.0 && f_d == 0.0 && safe == 0.0;
        verdict(ok, "negative-absorption",
                fmt::format("ref {:.4f}% b {:.4f}% c {:.4f}% (in [0.3%, 0.8%]); a {:.4f}% d {:.4f}% "
                            "ref-safe {:.4f}% (== 0)",
                            100 * f_ref, 100 * f_b, 100 * f_c, 100 * f_a, 100 * f_d, 100 * safe));
    }

    const ComparisonDocument doc = ablation_report(reports);
    {
        const auto& d = *doc.delta_for(VariantId::B_NoFabryPerot);
        const auto& ref = reports.at(VariantId::Reference).bandwidth;
        const auto& b = reports.at(VariantId::B_NoFabryPerot).bandwidth;
        const bool ok = in_band(d.halfmax_sigma_reduction, 0.60, 0.80) && in_band(d.moment_mean_reduction, 0.04, 0.15);
        verdict(ok, "fabry-perot-bandwidth",
                fmt::format("half-max sd {:.1f} -> {:.1f} nm, reduction {:.1f}% (in [60%, 80%]); moment mean "
                            "{:.1f} -> {:.1f} nm, reduction {:.1f}% (in [4%, 15%])",
                            ref.halfmax_sigma_nm, b.halfmax_sigma_nm, 100 * d.halfmax_sigma_reduction,
                            ref.moment_mean_nm, b.moment_mean_nm, 100 * d.moment_mean_reduction));
    }

    {
        bool ok = true;
        std::string detail, analytic;
        for (const auto& [id, r] : reports) {
            ok = ok && in_band(r.period_lambda_r, 0.96, 0.99);
            detail += fmt::format("{}={:.4f} ", to_string(id), r.period_lambda_r);
            analytic += fmt::format("{}={:.4f} ", to_string(id), r.period_lambda_analytic_r);
        }
        verdict(ok, "period-lambda-correlation", detail + "(argmax, each in [0.96, 0.99])");
        info("period-lambda-analytic", analytic + "(stored centre wavelength)");
    }

    {
        const double g_d = reports.at(VariantId::D_NoNoise).gradient_max_mean;
        const double g_ref = reports.at(VariantId::Reference).gradient_max_mean;
        const bool ok = in_band(g_d, 0.036, 0.056) && in_band(g_ref, 0.064, 0.094) && g_d < g_ref;
        verdict(ok, "gradient-smoothing",
                fmt::format("d {:.4f} (in [0.036, 0.056]), ref {:.4f} (in [0.064, 0.094]), d < ref: {}", g_d, g_ref,
                            g_d < g_ref));
    }

    {
        const auto cfg = VariantConfig::for_variant(VariantId::Reference);
        (void)generate_dataset(500, cfg, kSeed, 1);
        const Dataset single = generate_dataset(kCount, cfg, kSeed, 1);
        const double rate = single.manifest.throughput_samples_per_sec;

        std::random_device rd;
        const fs::path dir = fs::temp_directory_path() / fmt::format("gcsg_acceptance_{}", rd());
        fs::create_directories(dir);
        bool identical = true;
        write_dataset(single, dir / "t1.gcsg");
        const std::string base = slurp(dir / "t1.gcsg");
        std::string settings = "1";
        for (unsigned t : {2u, 4u, 8u, 0u}) {
            const auto path = dir / fmt::format("t{}.gcsg", t);
            write_dataset(generate_dataset(kCount, cfg, kSeed, t), path);
            identical = identical && slurp(path) == base;
            settings += fmt::format(",{}", t == 0 ? std::string("all") : std::to_string(t));
        }
        std::error_code ec;
        fs::remove_all(dir, ec);

        verdict(rate >= 200.0 && identical, "throughput",
                fmt::format("{:.0f} samples/sec single thread (>= 200); bytes identical across threads {}: {}", rate,
                            settings, identical));
    }

    {
        const GeometryParams mid{500.0, 0.5, 125.0, 250.0, 1500.0};
        const double n_eff = effective_index(mid).n_eff;
        const double gamma = resonance_linewidth(mid.fill_factor, mid.etch_depth_nm);
        const double a1200 = absorption(mid, WavelengthGrid::standard())[0];
        const double worst = std::max({rel_err(n_eff, 2.8658), rel_err(gamma, 52.5), rel_err(a1200, 0.055)});
        verdict(worst <= 1e-4, "formula-goldens",
                fmt::format("n_eff {:.6f} (2.8658), gamma {:.4f} (52.5), A_raw(1200) {:.6f} (0.055), worst rel "
                            "err {:.2e} (<= 1e-4)",
                            n_eff, gamma, a1200, worst));
    }

    fmt::print("\n{}", doc.to_text());
    fmt::print("\n{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
