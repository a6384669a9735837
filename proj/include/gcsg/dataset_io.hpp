#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gcsg/generator.hpp"

namespace gcsg {

// Binary container layout (all integers and floats little-endian):
//
//   offset  size  field
//        0     4  magic "GCSG"
//        4     2  format_version_major
//        6     2  format_version_minor
//        8     4  header_size (bytes, = 40)
//       12     4  record_size (bytes, = 1228)
//       16     4  grid_points (= 100)
//       20     4  variant_id
//       24     8  master_seed
//       32     8  sample_count
//       40        records
//
// Each record: 5 float32 parameters (period, fill factor, etch depth,
// Si thickness, oxide thickness), 100 R, 100 T, 100 A, centre wavelength,
// linewidth. Records are in index order.
inline constexpr char kMagic[4] = {'G', 'C', 'S', 'G'};
inline constexpr std::uint32_t kHeaderSize = 40;
inline constexpr std::uint32_t kRecordFloats = 5 + 3 * kGridPoints + 2;
inline constexpr std::uint32_t kRecordSize = kRecordFloats * 4;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FormatErrorKind { BadMagic, UnsupportedVersion, CorruptHeader, Truncated, InvariantViolation };

class FormatError : public std::runtime_error {
public:
    FormatError(FormatErrorKind kind, std::uint64_t byte_offset, const std::string& what)
        : std::runtime_error(what), kind_(kind), byte_offset_(byte_offset) {}

    [[nodiscard]] FormatErrorKind kind() const { return kind_; }
    [[nodiscard]] std::uint64_t byte_offset() const { return byte_offset_; }

private:
    FormatErrorKind kind_;
    std::uint64_t byte_offset_;
};

/// "<dataset>.manifest.json"
[[nodiscard]] std::filesystem::path manifest_path(const std::filesystem::path& dataset_path);

[[nodiscard]] nlohmann::json manifest_to_json(const Manifest& m);
[[nodiscard]] Manifest manifest_from_json(const nlohmann::json& j);

/// Writes the container and its manifest sidecar. On failure neither file is
/// left behind.
void write_dataset(const Dataset& d, const std::filesystem::path& path);

struct ReadOptions {
    /// Re-check per-sample invariants (parameter ranges, R and T in [0, 1],
    /// A >= 0 for configurations that promise it, closure for normalized ones).
    bool verify = false;
};

/// Reads the container. The sidecar manifest, when present, supplies the
/// noise configuration and provenance; header fields take precedence for
/// variant, seed and count.
[[nodiscard]] Dataset read_dataset(const std::filesystem::path& path, const ReadOptions& opts = {});

enum class MlTarget { LambdaCenter, SigmaLambda, HalfmaxBandwidth };

[[nodiscard]] std::set<MlTarget> all_ml_targets();
[[nodiscard]] MlTarget parse_ml_target(const std::string& text);

/// CSV with a header row: the five parameters, then the requested targets
/// (analytic centre wavelength, moment bandwidth, half-max bandwidth).
void export_ml_table(const Dataset& d, const std::filesystem::path& path,
                     const std::set<MlTarget>& targets = all_ml_targets());

}  // namespace gcsg
