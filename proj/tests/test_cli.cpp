#include <doctest.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsg/cli.hpp"
#include "gcsg/dataset_io.hpp"
#include "test_support.hpp"

using gcsg::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "gcsg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = gcsg::cli::run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generate is reproducible byte for byte") {
    TempDir tmp("cli_gen");
    const auto a = (tmp / "a.gcsg").string();
    const auto b = (tmp / "b.gcsg").string();
    REQUIRE(run({"generate", "--variant", "reference", "--count", "40", "--seed", "42", "--out", a}).code == 0);
    REQUIRE(run({"generate", "--variant", "reference", "--count", "40", "--seed", "42", "--out", b, "--threads",
                 "4"})
                .code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(fs::exists(gcsg::manifest_path(a)));
}

TEST_CASE("usage errors exit 2") {
    TempDir tmp("cli_usage");
    const auto out = (tmp / "x.gcsg").string();
    CHECK(run({"generate", "--count", "0", "--out", out}).code == gcsg::cli::kUsage);
    CHECK(run({"generate", "--count", "5"}).code == gcsg::cli::kUsage);
    CHECK(run({"generate", "--count", "5", "--out", out, "--variant", "zz"}).code == gcsg::cli::kUsage);
    CHECK(run({"generate", "--count", "5", "--out", out, "--noise-mode", "loud"}).code == gcsg::cli::kUsage);
    CHECK(run({"frobnicate"}).code == gcsg::cli::kUsage);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("validate") {
    TempDir tmp("cli_validate");
    const auto d = (tmp / "d.gcsg").string();
    const auto ref = (tmp / "ref.gcsg").string();
    REQUIRE(run({"generate", "--variant", "d", "--count", "30", "--out", d}).code == 0);
    REQUIRE(run({"generate", "--variant", "reference", "--count", "30", "--out", ref}).code == 0);

    SUBCASE("clean noiseless dataset") {
        const auto json = (tmp / "d.json").string();
        const auto r = run({"validate", "--in", d, "--verify", "--json", json});
        CHECK(r.code == 0);
        CHECK(r.out.find("valid samples") != std::string::npos);
        std::ifstream in(json);
        const auto j = nlohmann::json::parse(in);
        CHECK(j.at("energy").at("valid_sample_fraction").get<double>() == 1.0);
    }
    SUBCASE("reference dataset") {
        CHECK(run({"validate", "--in", ref}).code == 0);
    }
    SUBCASE("corrupt file exits 4") {
        auto bytes = slurp(d);
        bytes[0] = 'Z';
        std::ofstream(d, std::ios::binary | std::ios::trunc) << bytes;
        const auto r = run({"validate", "--in", d});
        CHECK(r.code == gcsg::cli::kFormat);
        CHECK(r.err.find("magic") != std::string::npos);
    }
    SUBCASE("missing file exits 3") {
        CHECK(run({"validate", "--in", (tmp / "none.gcsg").string()}).code == gcsg::cli::kIo);
    }
    SUBCASE("negative absorbance in a noiseless file is an invariant failure") {
        auto bytes = slurp(d);
        const float bad = -0.25f;
        std::memcpy(bytes.data() + gcsg::kHeaderSize + 4 * (5 + 200), &bad, sizeof bad);
        std::ofstream(d, std::ios::binary | std::ios::trunc) << bytes;
        CHECK(run({"validate", "--in", d}).code == gcsg::cli::kInvariant);
        CHECK(run({"validate", "--in", d, "--verify"}).code == gcsg::cli::kInvariant);
    }
}

TEST_CASE("ablate writes every variant and a comparison") {
    TempDir tmp("cli_ablate");
    const auto dir = (tmp / "abl").string();
    const auto r = run({"ablate", "--count", "25", "--out-dir", dir});
    REQUIRE(r.code == 0);
    for (const char* v : {"reference", "a", "b", "c", "d"}) {
        CHECK(fs::exists(fs::path(dir) / (std::string("variant_") + v + ".gcsg")));
    }
    std::ifstream in(fs::path(dir) / "comparison.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("variants").size() == 5);
    CHECK(j.at("deltas_vs_reference").size() == 4);
    CHECK(fs::exists(fs::path(dir) / "comparison.txt"));
}

TEST_CASE("bench reports throughput") {
    const auto r = run({"bench", "--count", "200", "--warmup", "20", "--repeats", "1", "--threads", "2",
                        "--min-rate", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("samples/s") != std::string::npos);
}

TEST_CASE("export writes the ML table") {
    TempDir tmp("cli_export");
    const auto data = (tmp / "c.gcsg").string();
    const auto csv = (tmp / "c.csv").string();
    REQUIRE(run({"generate", "--variant", "c", "--count", "12", "--out", data}).code == 0);
    REQUIRE(run({"export", "--in", data, "--out", csv, "--targets", "lambda_center", "sigma_lambda"}).code == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "period_nm,fill_factor,etch_depth_nm,si_thickness_nm,oxide_thickness_nm,lambda_center_nm,"
                    "sigma_lambda_nm");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 12);
    CHECK(run({"export", "--in", data, "--out", csv, "--targets", "nope"}).code == gcsg::cli::kUsage);
}
