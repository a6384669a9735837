#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "gcsg/random.hpp"
#include "gcsg/validation.hpp"

using namespace gcsg;

TEST_CASE("splitmix64 reference values") {
    // First outputs of the reference SplitMix64 generator seeded with 0.
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
    CHECK(splitmix64(0x9E3779B97F4A7C15ULL) == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("mt19937_64 backing matches the standard's 10000th value") {
    RandomStream rng(5489);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = rng.next_u64();
    CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("sample substreams are deterministic and distinct") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        seeds.insert(derive_sample_seed(42, i));
    }
    CHECK(seeds.size() == 10000);
    CHECK(derive_sample_seed(42, 7) == derive_sample_seed(42, 7));
    CHECK(derive_sample_seed(42, 7) != derive_sample_seed(43, 7));

    auto a = RandomStream::for_sample(42, 3);
    auto b = RandomStream::for_sample(42, 3);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
}

TEST_CASE("uniform stays in range") {
    RandomStream rng(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = rng.uniform(300.0, 700.0);
        REQUIRE(v >= 300.0);
        REQUIRE(v < 700.0);
    }
}

TEST_CASE("normal deviates have unit moments") {
    RandomStream rng(2);
    std::vector<double> xs(200000);
    for (double& x : xs) x = rng.normal();
    const double m = mean(xs);
    const double s = stddev(xs);
    // 5 standard errors
    CHECK(std::abs(m) < 5.0 / std::sqrt(double(xs.size())));
    CHECK(std::abs(s - 1.0) < 5.0 / std::sqrt(2.0 * double(xs.size())));
    double fourth = 0;
    for (double x : xs) fourth += x * x * x * x;
    CHECK(fourth / double(xs.size()) == doctest::Approx(3.0).epsilon(0.05));
}
