#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gcsg/generator.hpp"
#include "test_support.hpp"

using namespace gcsg;
using gcsg::testing::GeometryGen;

namespace {

// Two-sided Kolmogorov-Smirnov p-value for a uniform sample on [lo, hi].
double ks_uniform_pvalue(std::vector<double> xs, double lo, double hi) {
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = (xs[i] - lo) / (hi - lo);
        d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j) {
        p += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("variant names round-trip") {
    for (auto id : kAllVariants) {
        CHECK(parse_variant(to_string(id)) == id);
    }
    CHECK(parse_variant("REF") == VariantId::Reference);
    CHECK_THROWS_AS((void)parse_variant("e"), DomainError);
}

TEST_CASE("variant defaults") {
    CHECK(VariantConfig::for_variant(VariantId::D_NoNoise).noise.mode == NoiseMode::Off);
    for (auto id : {VariantId::Reference, VariantId::A_NoExplicitEnforcement, VariantId::B_NoFabryPerot,
                    VariantId::C_FixedBandwidth}) {
        const auto cfg = VariantConfig::for_variant(id);
        CHECK(cfg.noise.mode == NoiseMode::ClipThenRenormalize);
        CHECK(cfg.noise.relative_sigma == 0.01);
    }
    auto bad = VariantConfig::for_variant(VariantId::C_FixedBandwidth);
    bad.fixed_gamma_nm = 0.0;
    CHECK_THROWS_AS(validate_variant(bad), DomainError);
}

TEST_CASE("parameter sampler covers each range uniformly") {
    constexpr int n = 100000;
    std::vector<std::vector<double>> cols(5, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        auto rng = RandomStream::for_sample(kDefaultMasterSeed, std::uint64_t(i));
        const auto g = sample_parameters(rng);
        cols[0][i] = g.period_nm;
        cols[1][i] = g.fill_factor;
        cols[2][i] = g.etch_depth_nm;
        cols[3][i] = g.si_thickness_nm;
        cols[4][i] = g.oxide_thickness_nm;
        REQUIRE_NOTHROW(validate_geometry(g));
    }
    const ParamRange ranges[] = {kPeriodRange, kFillFactorRange, kEtchDepthRange, kSiThicknessRange,
                                 kOxideThicknessRange};
    for (int c = 0; c < 5; ++c) {
        CAPTURE(c);
        CHECK(ks_uniform_pvalue(cols[c], ranges[c].min, ranges[c].max) > 0.01);
    }
}

TEST_CASE("storage quantization is idempotent and stays in range") {
    GeometryGen gen(31);
    for (int k = 0; k < 1000; ++k) {
        const auto q = quantize_to_storage(gen.next());
        CHECK(quantize_to_storage(q) == q);
        CHECK(double(float(q.fill_factor)) == q.fill_factor);
        CHECK_NOTHROW(validate_geometry(q));
    }
    for (const GeometryParams edge : {GeometryParams{700.0, 0.7, 200.0, 300.0, 2000.0},
                                      GeometryParams{300.0, 0.3, 50.0, 200.0, 1000.0}}) {
        const auto q = quantize_to_storage(edge);
        CHECK(double(float(q.fill_factor)) == q.fill_factor);
        CHECK(q.period_nm == edge.period_nm);
        CHECK_NOTHROW(validate_geometry(q));
    }
}

TEST_CASE("generate_sample is a pure function of index and seed") {
    const auto cfg = VariantConfig::for_variant(VariantId::Reference);
    const auto a = generate_sample(17, cfg, 42);
    const auto b = generate_sample(17, cfg, 42);
    CHECK(a == b);
    CHECK(a.index == 17);
    CHECK(a.seed_material == derive_sample_seed(42, 17));
    CHECK_FALSE(generate_sample(18, cfg, 42) == a);
    CHECK_FALSE(generate_sample(17, cfg, 43).params == a.params);
}

TEST_CASE("variant D closes the energy balance in double precision") {
    const auto cfg = VariantConfig::for_variant(VariantId::D_NoNoise);
    GeometryGen gen(32);
    for (int k = 0; k < 1000; ++k) {
        RandomStream rng(0);
        const auto s = simulate(gen.next(), cfg, rng);
        CHECK(max_conservation_error(s) < 1e-12);
        for (double a : s.absorbance) CHECK(a >= 0.0);
    }
}

TEST_CASE("variant B differs from Reference by exactly the ripple where the cap is inactive") {
    auto ref = VariantConfig::for_variant(VariantId::Reference);
    auto b = VariantConfig::for_variant(VariantId::B_NoFabryPerot);
    ref.noise.mode = b.noise.mode = NoiseMode::Off;
    const auto& grid = WavelengthGrid::standard();
    GeometryGen gen(33);
    for (int k = 0; k < 300; ++k) {
        const auto g = gen.next();
        RandomStream r1(0), r2(0);
        const auto sr = simulate(g, ref, r1);
        const auto sb = simulate(g, b, r2);
        const auto ripple = fabry_perot(effective_index(g).n_eff, g.si_thickness_nm, grid);
        for (std::size_t i = 0; i < kGridPoints; ++i) {
            if (sr.transmittance[i] < kTransmissionCap) {
                CHECK(sr.transmittance[i] - sb.transmittance[i] == doctest::Approx(ripple[i]).epsilon(1e-9).scale(1e-6));
            }
            CHECK(sr.absorbance[i] == doctest::Approx(sb.absorbance[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("variant C uses the fixed linewidth") {
    const auto cfg = VariantConfig::for_variant(VariantId::C_FixedBandwidth);
    for (std::uint64_t i = 0; i < 50; ++i) {
        CHECK(generate_sample(i, cfg, 42).spectrum.linewidth_nm == 52.5f);
    }
    const auto ref = generate_sample(0, VariantConfig::for_variant(VariantId::Reference), 42);
    CHECK(ref.spectrum.linewidth_nm != 52.5f);
}

TEST_CASE("variants A and Reference coincide without noise") {
    auto ref = VariantConfig::for_variant(VariantId::Reference);
    auto a = VariantConfig::for_variant(VariantId::A_NoExplicitEnforcement);
    ref.noise.mode = a.noise.mode = NoiseMode::Off;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto sr = generate_sample(i, ref, 42);
        const auto sa = generate_sample(i, a, 42);
        CHECK(sr.params == sa.params);
        for (std::size_t j = 0; j < kGridPoints; ++j) {
            CHECK(std::abs(sr.spectrum.reflectance[j] - sa.spectrum.reflectance[j]) <= 1e-6f);
            CHECK(std::abs(sr.spectrum.transmittance[j] - sa.spectrum.transmittance[j]) <= 1e-6f);
            CHECK(std::abs(sr.spectrum.absorbance[j] - sa.spectrum.absorbance[j]) <= 1e-6f);
        }
    }
}

TEST_CASE("variant A keeps the raw absorbance under noise") {
    const auto cfg = VariantConfig::for_variant(VariantId::A_NoExplicitEnforcement);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto s = generate_sample(i, cfg, 42);
        const auto raw = to_stored(raw_spectrum(s.params, cfg));
        CHECK(s.spectrum.absorbance == raw.absorbance);
    }
}

TEST_CASE("dataset output does not depend on thread count") {
    const auto cfg = VariantConfig::for_variant(VariantId::Reference);
    const auto one = generate_dataset(257, cfg, 42, 1);
    const auto many = generate_dataset(257, cfg, 42, 8);
    CHECK(one.samples == many.samples);
    CHECK(many.manifest.threads_used == 8);
    CHECK(one.manifest.sample_count == 257);
    for (std::size_t i = 0; i < one.samples.size(); ++i) CHECK(one.samples[i].index == i);
}

TEST_CASE("dataset edge cases") {
    const auto cfg = VariantConfig::for_variant(VariantId::D_NoNoise);
    CHECK_THROWS_AS((void)generate_dataset(0, cfg, 42), std::invalid_argument);
    const auto single = generate_dataset(1, cfg, 42, 4);
    CHECK(single.samples.size() == 1);
    CHECK(single.manifest.threads_used == 1);
    auto bad = cfg;
    bad.noise.relative_sigma = -1.0;
    CHECK_THROWS_AS((void)generate_dataset(10, bad, 42), DomainError);
}

TEST_CASE("out-of-range geometry is rejected before simulation") {
    RandomStream rng(0);
    GeometryParams g = gcsg::testing::midpoint_geometry();
    g.period_nm = 800.0;
    CHECK_THROWS_AS((void)generate_spectrum(g, VariantConfig{}, rng), DomainError);
}
