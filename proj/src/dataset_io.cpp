#include "gcsg/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <iterator>
#include <system_error>
#include <vector>

#include "gcsg/validation.hpp"

namespace gcsg {

namespace fs = std::filesystem;

namespace {

class ByteWriter {
public:
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

    [[nodiscard]] const std::vector<char>& bytes() const { return bytes_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    std::vector<char> bytes_;
};

class ByteReader {
public:
    ByteReader(const std::vector<char>& data, std::size_t offset) : data_(data), pos_(offset) {}

    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    float f32() { return std::bit_cast<float>(u32()); }
    [[nodiscard]] std::size_t position() const { return pos_; }

private:
    std::uint64_t get(int n) {
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= std::uint64_t(static_cast<unsigned char>(data_[pos_ + std::size_t(i)])) << (8 * i);
        }
        pos_ += std::size_t(n);
        return v;
    }
    const std::vector<char>& data_;
    std::size_t pos_;
};

fs::path temp_path(const fs::path& p) {
    fs::path t = p;
    t += ".partial";
    return t;
}

void write_file(const fs::path& path, const char* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(data, std::streamsize(size));
    out.flush();
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

void remove_quietly(const fs::path& p) {
    std::error_code ec;
    fs::remove(p, ec);
}

bool requires_nonnegative_absorbance(const VariantConfig& cfg) {
    return cfg.noise.mode == NoiseMode::Off || cfg.noise.mode == NoiseMode::SafeBounded ||
           cfg.variant_id == VariantId::A_NoExplicitEnforcement;
}

void verify_sample(const Sample& s, const VariantConfig& cfg, std::uint64_t offset) {
    auto fail = [&](const std::string& what) {
        throw FormatError(FormatErrorKind::InvariantViolation, offset,
                          fmt::format("record {} at byte {}: {}", s.index, offset, what));
    };
    try {
        validate_geometry(s.params);
    } catch (const DomainError& e) {
        fail(e.what());
    }
    const bool nonneg_a = requires_nonnegative_absorbance(cfg);
    const bool closed = cfg.variant_id != VariantId::A_NoExplicitEnforcement;
    // Only the noise stage clips R; noiseless spectra keep R = 1 - T - A.
    const bool clipped = cfg.noise.mode != NoiseMode::Off;
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        const float r = s.spectrum.reflectance[i];
        const float t = s.spectrum.transmittance[i];
        const float a = s.spectrum.absorbance[i];
        if (!(r <= 1.0f) || (clipped && r < 0.0f)) fail(fmt::format("R[{}] = {} outside [0, 1]", i, r));
        if (!(t >= 0.0f && t <= 1.0f)) fail(fmt::format("T[{}] = {} outside [0, 1]", i, t));
        if (!std::isfinite(a)) fail(fmt::format("A[{}] is not finite", i));
        if (nonneg_a && a < 0.0f) fail(fmt::format("A[{}] = {} is negative", i, a));
        if (closed) {
            const double err = std::abs(double(r) + double(t) + double(a) - 1.0);
            if (err > 1e-6) fail(fmt::format("|R+T+A-1| = {:.3e} at index {}", err, i));
        }
    }
}

std::string format_param(double v) { return fmt::format("{}", static_cast<float>(v)); }

}  // namespace

fs::path manifest_path(const fs::path& dataset_path) {
    fs::path p = dataset_path;
    p += ".manifest.json";
    return p;
}

nlohmann::json manifest_to_json(const Manifest& m) {
    nlohmann::json j = {
        {"format_version", {{"major", m.format_version_major}, {"minor", m.format_version_minor}}},
        {"variant", std::string(to_string(m.variant.variant_id))},
        {"variant_label", std::string(label(m.variant.variant_id))},
        {"fixed_gamma_nm", m.variant.fixed_gamma_nm},
        {"noise",
         {{"mode", std::string(to_string(m.variant.noise.mode))}, {"relative_sigma", m.variant.noise.relative_sigma}}},
        {"master_seed", m.master_seed},
        {"sample_count", m.sample_count},
        {"grid", {{"min_nm", m.grid.min_nm}, {"max_nm", m.grid.max_nm}, {"points", m.grid.points}}},
        {"record_layout",
         {{"header_bytes", kHeaderSize},
          {"record_bytes", kRecordSize},
          {"fields", {"period_nm", "fill_factor", "etch_depth_nm", "si_thickness_nm", "oxide_thickness_nm",
                      "reflectance[100]", "transmittance[100]", "absorbance[100]", "center_wavelength_nm",
                      "linewidth_nm"}}}},
        {"created_utc", m.created_utc},
        {"throughput_samples_per_sec", m.throughput_samples_per_sec},
        {"threads", m.threads_used},
    };
    if (m.report) j["report"] = *m.report;
    return j;
}

Manifest manifest_from_json(const nlohmann::json& j) {
    try {
        Manifest m;
        m.format_version_major = j.at("format_version").at("major").get<std::uint16_t>();
        m.format_version_minor = j.at("format_version").at("minor").get<std::uint16_t>();
        if (m.format_version_major != kFormatVersionMajor) {
            throw FormatError(FormatErrorKind::UnsupportedVersion, 0,
                              fmt::format("manifest format major version {} is not supported (expected {})",
                                          m.format_version_major, kFormatVersionMajor));
        }
        m.variant.variant_id = parse_variant(j.at("variant").get<std::string>());
        m.variant.fixed_gamma_nm = j.value("fixed_gamma_nm", kDefaultFixedGammaNm);
        m.variant.noise.mode = parse_noise_mode(j.at("noise").at("mode").get<std::string>());
        m.variant.noise.relative_sigma = j.at("noise").at("relative_sigma").get<double>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.sample_count = j.at("sample_count").get<std::uint64_t>();
        m.grid.min_nm = j.at("grid").at("min_nm").get<double>();
        m.grid.max_nm = j.at("grid").at("max_nm").get<double>();
        m.grid.points = j.at("grid").at("points").get<std::uint32_t>();
        m.created_utc = j.value("created_utc", "");
        m.throughput_samples_per_sec = j.value("throughput_samples_per_sec", 0.0);
        m.threads_used = j.value("threads", 1u);
        if (j.contains("report")) m.report = j.at("report");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatErrorKind::CorruptHeader, 0, fmt::format("malformed manifest: {}", e.what()));
    } catch (const DomainError& e) {
        throw FormatError(FormatErrorKind::CorruptHeader, 0, fmt::format("malformed manifest: {}", e.what()));
    }
}

void write_dataset(const Dataset& d, const fs::path& path) {
    ByteWriter w;
    w.raw(kMagic, sizeof kMagic);
    w.u16(kFormatVersionMajor);
    w.u16(kFormatVersionMinor);
    w.u32(kHeaderSize);
    w.u32(kRecordSize);
    w.u32(kGridPoints);
    w.u32(static_cast<std::uint32_t>(d.manifest.variant.variant_id));
    w.u64(d.manifest.master_seed);
    w.u64(d.samples.size());
    for (const auto& s : d.samples) {
        w.f32(static_cast<float>(s.params.period_nm));
        w.f32(static_cast<float>(s.params.fill_factor));
        w.f32(static_cast<float>(s.params.etch_depth_nm));
        w.f32(static_cast<float>(s.params.si_thickness_nm));
        w.f32(static_cast<float>(s.params.oxide_thickness_nm));
        for (float v : s.spectrum.reflectance) w.f32(v);
        for (float v : s.spectrum.transmittance) w.f32(v);
        for (float v : s.spectrum.absorbance) w.f32(v);
        w.f32(s.spectrum.center_wavelength_nm);
        w.f32(s.spectrum.linewidth_nm);
    }

    Manifest m = d.manifest;
    m.sample_count = d.samples.size();
    const std::string manifest_text = manifest_to_json(m).dump(2) + "\n";

    const fs::path tmp_data = temp_path(path);
    const fs::path final_manifest = manifest_path(path);
    const fs::path tmp_manifest = temp_path(final_manifest);
    try {
        write_file(tmp_data, w.bytes().data(), w.bytes().size());
        write_file(tmp_manifest, manifest_text.data(), manifest_text.size());
        fs::rename(tmp_data, path);
        fs::rename(tmp_manifest, final_manifest);
    } catch (const fs::filesystem_error& e) {
        remove_quietly(tmp_data);
        remove_quietly(tmp_manifest);
        remove_quietly(path);
        remove_quietly(final_manifest);
        throw IoError(e.what());
    } catch (...) {
        remove_quietly(tmp_data);
        remove_quietly(tmp_manifest);
        throw;
    }
}

Dataset read_dataset(const fs::path& path, const ReadOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw FormatError(FormatErrorKind::BadMagic, 0, "not a GCSG dataset (bad magic at byte 0)");
    }
    if (bytes.size() < kHeaderSize) {
        throw FormatError(FormatErrorKind::CorruptHeader, bytes.size(),
                          fmt::format("header truncated: {} of {} bytes", bytes.size(), kHeaderSize));
    }

    ByteReader r(bytes, sizeof kMagic);
    const std::uint16_t major = r.u16();
    const std::uint16_t minor = r.u16();
    if (major != kFormatVersionMajor) {
        throw FormatError(FormatErrorKind::UnsupportedVersion, 4,
                          fmt::format("format version {}.{} is not supported (expected major {})", major, minor,
                                      kFormatVersionMajor));
    }
    auto expect = [&](std::uint32_t expected, const char* name) {
        const std::size_t at = r.position();
        const std::uint32_t got = r.u32();
        if (got != expected) {
            throw FormatError(FormatErrorKind::CorruptHeader, at,
                              fmt::format("header field {} at byte {} is {}, expected {}", name, at, got, expected));
        }
    };
    expect(kHeaderSize, "header_size");
    expect(kRecordSize, "record_size");
    expect(kGridPoints, "grid_points");
    const std::size_t variant_at = r.position();
    const std::uint32_t variant_raw = r.u32();
    if (variant_raw >= kAllVariants.size()) {
        throw FormatError(FormatErrorKind::CorruptHeader, variant_at,
                          fmt::format("unknown variant id {} at byte {}", variant_raw, variant_at));
    }
    const std::uint64_t master_seed = r.u64();
    const std::uint64_t count = r.u64();

    const std::uint64_t payload = bytes.size() - kHeaderSize;
    const std::uint64_t whole_records = payload / kRecordSize;
    if (whole_records < count) {
        throw FormatError(FormatErrorKind::Truncated, kHeaderSize + whole_records * kRecordSize,
                          fmt::format("truncated: expected {} records, found {} complete ({} bytes, needed {})", count,
                                      whole_records, bytes.size(), kHeaderSize + count * kRecordSize));
    }
    if (payload != count * kRecordSize) {
        throw FormatError(FormatErrorKind::CorruptHeader, kHeaderSize + count * kRecordSize,
                          fmt::format("{} trailing bytes after {} records",
                                      payload - count * kRecordSize, count));
    }

    Dataset d;
    const VariantId variant = static_cast<VariantId>(variant_raw);
    const fs::path sidecar = manifest_path(path);
    if (fs::exists(sidecar)) {
        std::ifstream mf(sidecar);
        nlohmann::json j;
        try {
            mf >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(FormatErrorKind::CorruptHeader, 0, fmt::format("manifest is not valid JSON: {}", e.what()));
        }
        d.manifest = manifest_from_json(j);
    } else {
        d.manifest.variant = VariantConfig::for_variant(variant);
    }
    d.manifest.format_version_major = major;
    d.manifest.format_version_minor = minor;
    d.manifest.variant.variant_id = variant;
    d.manifest.master_seed = master_seed;
    d.manifest.sample_count = count;

    d.samples.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t offset = r.position();
        Sample& s = d.samples[i];
        s.index = i;
        s.seed_material = derive_sample_seed(master_seed, i);
        s.params.period_nm = r.f32();
        s.params.fill_factor = r.f32();
        s.params.etch_depth_nm = r.f32();
        s.params.si_thickness_nm = r.f32();
        s.params.oxide_thickness_nm = r.f32();
        for (float& v : s.spectrum.reflectance) v = r.f32();
        for (float& v : s.spectrum.transmittance) v = r.f32();
        for (float& v : s.spectrum.absorbance) v = r.f32();
        s.spectrum.center_wavelength_nm = r.f32();
        s.spectrum.linewidth_nm = r.f32();
        if (opts.verify) verify_sample(s, d.manifest.variant, offset);
    }
    return d;
}

std::set<MlTarget> all_ml_targets() {
    return {MlTarget::LambdaCenter, MlTarget::SigmaLambda, MlTarget::HalfmaxBandwidth};
}

MlTarget parse_ml_target(const std::string& text) {
    if (text == "lambda_center" || text == "lambda_center_nm") return MlTarget::LambdaCenter;
    if (text == "sigma_lambda" || text == "sigma_lambda_nm") return MlTarget::SigmaLambda;
    if (text == "halfmax" || text == "halfmax_bandwidth_nm") return MlTarget::HalfmaxBandwidth;
    throw std::invalid_argument(fmt::format("unknown ML target '{}'", text));
}

void export_ml_table(const Dataset& d, const fs::path& path, const std::set<MlTarget>& targets) {
    if (d.samples.empty()) throw std::invalid_argument("export_ml_table: dataset is empty");

    std::string text = "period_nm,fill_factor,etch_depth_nm,si_thickness_nm,oxide_thickness_nm";
    if (targets.contains(MlTarget::LambdaCenter)) text += ",lambda_center_nm";
    if (targets.contains(MlTarget::SigmaLambda)) text += ",sigma_lambda_nm";
    if (targets.contains(MlTarget::HalfmaxBandwidth)) text += ",halfmax_bandwidth_nm";
    text += '\n';

    for (const auto& s : d.samples) {
        text += fmt::format("{},{},{},{},{}", format_param(s.params.period_nm), format_param(s.params.fill_factor),
                            format_param(s.params.etch_depth_nm), format_param(s.params.si_thickness_nm),
                            format_param(s.params.oxide_thickness_nm));
        if (targets.contains(MlTarget::LambdaCenter)) text += fmt::format(",{}", s.spectrum.center_wavelength_nm);
        if (targets.contains(MlTarget::SigmaLambda)) text += fmt::format(",{}", bandwidth_moment(s.spectrum));
        if (targets.contains(MlTarget::HalfmaxBandwidth)) text += fmt::format(",{}", bandwidth_halfmax(s.spectrum));
        text += '\n';
    }

    const fs::path tmp = temp_path(path);
    try {
        write_file(tmp, text.data(), text.size());
        fs::rename(tmp, path);
    } catch (const fs::filesystem_error& e) {
        remove_quietly(tmp);
        throw IoError(e.what());
    } catch (...) {
        remove_quietly(tmp);
        throw;
    }
}

}  // namespace gcsg
