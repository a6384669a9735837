#include "gcsg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gcsg/dataset_io.hpp"
#include "gcsg/generator.hpp"
#include "gcsg/validation.hpp"

namespace gcsg::cli {

namespace fs = std::filesystem;

namespace {

bool verbose() {
    const char* v = std::getenv("GCSG_VERBOSE");
    return v != nullptr && *v != '\0' && std::string(v) != "0";
}

struct NoiseOverrides {
    std::string mode;
    double sigma = -1.0;
};

struct GenerateArgs {
    std::string variant = "reference";
    std::uint64_t count = 0;
    std::uint64_t seed = kDefaultMasterSeed;
    bool seed_from_entropy = false;
    std::string out;
    NoiseOverrides noise;
    double fixed_gamma = kDefaultFixedGammaNm;
    unsigned threads = 1;
    bool embed_report = false;
};

struct ValidateArgs {
    std::string in;
    std::string json_out;
    bool verify = false;
    bool skip_noiseless = false;
};

struct AblateArgs {
    std::uint64_t count = 10000;
    std::uint64_t seed = kDefaultMasterSeed;
    std::string out_dir = "ablation";
    unsigned threads = 1;
};

struct BenchArgs {
    std::uint64_t count = 10000;
    std::uint64_t warmup = 1000;
    unsigned repeats = 3;
    unsigned threads = 0;
    std::vector<std::string> variants{"reference", "b"};
    std::uint64_t seed = kDefaultMasterSeed;
    double min_rate = 200.0;
};

struct ExportArgs {
    std::string in;
    std::string out;
    std::vector<std::string> targets;
};

VariantConfig build_variant(const std::string& variant, const NoiseOverrides& noise, double fixed_gamma) {
    VariantConfig cfg = VariantConfig::for_variant(parse_variant(variant));
    cfg.fixed_gamma_nm = fixed_gamma;
    if (!noise.mode.empty()) cfg.noise.mode = parse_noise_mode(noise.mode);
    if (noise.sigma >= 0.0) cfg.noise.relative_sigma = noise.sigma;
    validate_variant(cfg);
    return cfg;
}

void ensure_parent_dir(const fs::path& p) {
    if (p.has_parent_path() && !p.parent_path().empty()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError(fmt::format("cannot create '{}': {}", p.parent_path().string(), ec.message()));
    }
}

void write_text(const fs::path& p, const std::string& text) {
    ensure_parent_dir(p);
    std::ofstream f(p, std::ios::trunc);
    f << text;
    if (!f) throw IoError(fmt::format("cannot write '{}'", p.string()));
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const VariantConfig cfg = build_variant(a.variant, a.noise, a.fixed_gamma);
    std::uint64_t seed = a.seed;
    if (a.seed_from_entropy) {
        std::random_device rd;
        seed = (std::uint64_t(rd()) << 32) ^ rd();
    }
    const fs::path path(a.out);
    ensure_parent_dir(path);

    Dataset d = generate_dataset(a.count, cfg, seed, a.threads);
    if (a.embed_report) {
        d.manifest.report = to_json(validate(d));
    }
    write_dataset(d, path);
    out << fmt::format("wrote {} samples ({}) to {}\n", d.samples.size(), label(cfg.variant_id), path.string());
    out << fmt::format("seed {}  threads {}  throughput {:.1f} samples/sec\n", seed, d.manifest.threads_used,
                       d.manifest.throughput_samples_per_sec);
    return kOk;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
    ReadOptions ro;
    ro.verify = a.verify;
    const Dataset d = read_dataset(a.in, ro);
    ValidateOptions vo;
    vo.include_noiseless = !a.skip_noiseless;
    const ValidationReport report = validate(d, vo);

    out << to_text(report);
    if (d.manifest.variant.noise.mode == NoiseMode::ClipThenRenormalize &&
        d.manifest.variant.variant_id != VariantId::A_NoExplicitEnforcement) {
        out << "note: clip-then-renormalize noise produces some negative absorbance by construction\n";
    }
    if (!a.json_out.empty()) {
        nlohmann::json j = to_json(report);
        j["manifest"] = manifest_to_json(d.manifest);
        write_text(a.json_out, j.dump(2) + "\n");
    }

    const auto violations = contract_violations(report, d.manifest.variant);
    for (const auto& v : violations) err << "invariant failure: " << v << "\n";
    return violations.empty() ? kOk : kInvariant;
}

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    std::map<VariantId, ValidationReport> reports;
    std::map<VariantId, Dataset> datasets;
    for (VariantId id : kAllVariants) {
        const VariantConfig cfg = VariantConfig::for_variant(id);
        Dataset d = generate_dataset(a.count, cfg, a.seed, a.threads);
        ValidationReport r = validate(d);
        d.manifest.report = to_json(r);
        const fs::path path = dir / fmt::format("variant_{}.gcsg", to_string(id));
        write_dataset(d, path);
        if (verbose()) {
            out << fmt::format("{}: {:.1f} samples/sec -> {}\n", label(id), d.manifest.throughput_samples_per_sec,
                               path.string());
        }
        reports.emplace(id, std::move(r));
        datasets.emplace(id, std::move(d));
    }

    const ComparisonDocument doc = ablation_report(reports);

    // Reference and A differ only in normalization, which is a no-op on
    // noiseless spectra.
    const Dataset& ref = datasets.at(VariantId::Reference);
    const Dataset& var_a = datasets.at(VariantId::A_NoExplicitEnforcement);
    VariantConfig ref_quiet = VariantConfig::for_variant(VariantId::Reference);
    ref_quiet.noise.mode = NoiseMode::Off;
    VariantConfig a_quiet = VariantConfig::for_variant(VariantId::A_NoExplicitEnforcement);
    a_quiet.noise.mode = NoiseMode::Off;
    std::uint64_t identical = 0;
    RandomStream unused(0);
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        const StoredSpectrum x = to_stored(simulate(ref.samples[i].params, ref_quiet, unused));
        const StoredSpectrum y = to_stored(simulate(var_a.samples[i].params, a_quiet, unused));
        if (x == y) ++identical;
    }

    nlohmann::json j = doc.to_json();
    j["count"] = a.count;
    j["master_seed"] = a.seed;
    j["noiseless_reference_vs_a"] = {{"samples", ref.samples.size()}, {"bit_identical", identical}};

    std::string text = doc.to_text();
    text += fmt::format("\nNoiseless Reference vs A: {}/{} samples bit-identical\n", identical, ref.samples.size());

    write_text(dir / "comparison.json", j.dump(2) + "\n");
    write_text(dir / "comparison.txt", text);
    out << text;
    out << fmt::format("\nwrote 5 datasets and comparison report to {}\n", dir.string());
    return kOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned many = a.threads == 0 ? hw : a.threads;
    std::vector<unsigned> thread_counts{1};
    if (many > 1) thread_counts.push_back(many);

    out << fmt::format("bench: count {}  warmup {}  repeats {}  hardware threads {}\n", a.count, a.warmup, a.repeats,
                       hw);
    bool below_floor = false;
    for (const auto& name : a.variants) {
        const VariantConfig cfg = VariantConfig::for_variant(parse_variant(name));
        if (a.warmup > 0) (void)generate_dataset(a.warmup, cfg, a.seed, 1);
        std::map<unsigned, double> best;
        for (unsigned t : thread_counts) {
            std::vector<double> rates;
            for (unsigned rep = 0; rep < a.repeats; ++rep) {
                rates.push_back(generate_dataset(a.count, cfg, a.seed, t).manifest.throughput_samples_per_sec);
            }
            const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
            const double avg = mean(rates);
            best[t] = avg;
            out << fmt::format("{:<36} threads {:>2}: {:>12.1f} samples/sec (min {:.1f}, max {:.1f}, spread {:.1f}%)\n",
                               label(cfg.variant_id), t, avg, *lo, *hi, 100.0 * (*hi - *lo) / avg);
        }
        if (best[1] < a.min_rate) below_floor = true;
        if (thread_counts.size() > 1) {
            out << fmt::format("{:<36} scaling 1 -> {} threads: {:.2f}x\n", label(cfg.variant_id), many,
                               best[many] / best[1]);
        }
    }
    if (hw < 4) {
        out << "note: fewer than 4 hardware threads; multi-core scaling is not representative\n";
    }
    if (below_floor) {
        out << fmt::format("single-thread throughput below {:.0f} samples/sec\n", a.min_rate);
        return kInvariant;
    }
    return kOk;
}

int cmd_export(const ExportArgs& a, std::ostream& out) {
    const Dataset d = read_dataset(a.in);
    std::set<MlTarget> targets;
    if (a.targets.empty()) {
        targets = all_ml_targets();
    } else {
        for (const auto& t : a.targets) targets.insert(parse_ml_target(t));
    }
    const fs::path path(a.out);
    ensure_parent_dir(path);
    export_ml_table(d, path, targets);
    out << fmt::format("exported {} rows x {} columns to {}\n", d.samples.size(), 5 + targets.size(), path.string());
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Physics-constrained grating-coupler spectra generator"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a dataset for one variant");
    generate->add_option("--variant", gen.variant, "reference | a | b | c | d")->capture_default_str();
    generate->add_option("--count", gen.count, "Number of samples")->required()->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    generate->add_flag("--seed-from-entropy", gen.seed_from_entropy, "Draw the master seed from std::random_device");
    generate->add_option("--out", gen.out, "Output dataset path")->required();
    generate->add_option("--noise-mode", gen.noise.mode, "off | clip-then-renormalize | safe-bounded");
    generate->add_option("--noise-sigma", gen.noise.sigma, "Relative noise sigma")->check(CLI::NonNegativeNumber);
    generate->add_option("--fixed-gamma", gen.fixed_gamma, "Linewidth for variant c (nm)")->capture_default_str();
    generate->add_option("--threads", gen.threads, "Worker threads (0 = all cores)")->capture_default_str();
    generate->add_flag("--with-report", gen.embed_report, "Embed a validation report in the manifest");

    ValidateArgs val;
    auto* validate_cmd = app.add_subcommand("validate", "Compute validation metrics for a dataset");
    validate_cmd->add_option("--in", val.in, "Dataset path")->required();
    validate_cmd->add_option("--json", val.json_out, "Write the report as JSON");
    validate_cmd->add_flag("--verify", val.verify, "Re-check per-sample invariants while reading");
    validate_cmd->add_flag("--skip-noiseless", val.skip_noiseless, "Skip noiseless re-synthesis metrics");

    AblateArgs abl;
    auto* ablate = app.add_subcommand("ablate", "Generate and compare all five variants with matched seeds");
    ablate->add_option("--count", abl.count, "Samples per variant")->check(CLI::PositiveNumber)->capture_default_str();
    ablate->add_option("--seed", abl.seed, "Master seed")->capture_default_str();
    ablate->add_option("--out-dir", abl.out_dir, "Output directory")->capture_default_str();
    ablate->add_option("--threads", abl.threads, "Worker threads (0 = all cores)")->capture_default_str();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure generation throughput");
    bench_cmd->add_option("--count", bench.count, "Samples per timed run")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--warmup", bench.warmup, "Warm-up samples")->capture_default_str();
    bench_cmd->add_option("--repeats", bench.repeats, "Timed runs per setting")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--threads", bench.threads, "Multi-thread setting (0 = all cores)")->capture_default_str();
    bench_cmd->add_option("--variants", bench.variants, "Variants to time")->capture_default_str();
    bench_cmd->add_option("--min-rate", bench.min_rate, "Required single-thread samples/sec")->capture_default_str();

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export", "Export an ML-ready CSV table");
    export_cmd->add_option("--in", exp.in, "Dataset path")->required();
    export_cmd->add_option("--out", exp.out, "CSV path")->required();
    export_cmd->add_option("--targets", exp.targets, "lambda_center, sigma_lambda, halfmax");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (*generate) return cmd_generate(gen, out);
        if (*validate_cmd) return cmd_validate(val, out, err);
        if (*ablate) return cmd_ablate(abl, out);
        if (*bench_cmd) return cmd_bench(bench, out);
        if (*export_cmd) return cmd_export(exp, out);
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << "\n";
        return e.kind() == FormatErrorKind::InvariantViolation ? kInvariant : kFormat;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvariantError& e) {
        err << "invariant failure: " << e.what() << "\n";
        return kInvariant;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    }
    return kUsage;
}

}  // namespace gcsg::cli
