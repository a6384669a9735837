#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsg/generator.hpp"

namespace gcsg {

/// Per-sample mean |R+T+A-1| must be strictly below this to count as valid.
inline constexpr double kValidSampleThreshold = 1e-4;

/// Raised when a metric is undefined for its input (empty dataset, flat
/// spectrum, constant period).
class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EnergyReport {
    double mean_energy_error = 0.0;
    double max_energy_error = 0.0;
    std::uint64_t rt_violation_count = 0;
    double valid_sample_fraction = 0.0;
};

struct BandwidthReport {
    std::vector<double> halfmax_bandwidths_nm;
    double halfmax_mean_nm = 0.0;
    double halfmax_sigma_nm = 0.0;
    std::vector<double> moment_bandwidths_nm;
    double moment_mean_nm = 0.0;
    double moment_sigma_nm = 0.0;
};

struct ValidationReport {
    VariantId variant_id = VariantId::Reference;
    std::uint64_t sample_count = 0;
    EnergyReport energy;
    /// Same metrics over the spectra re-synthesized from stored parameters
    /// with noise disabled. Absent when not requested.
    std::optional<EnergyReport> noiseless_energy;
    double negative_absorption_fraction = 0.0;
    BandwidthReport bandwidth;
    /// Pearson(period, argmax-of-T wavelength).
    double period_lambda_r = 0.0;
    /// Pearson(period, stored analytic centre wavelength).
    double period_lambda_analytic_r = 0.0;
    double gradient_max_mean = 0.0;
};

/// Pairwise (cascade) summation; error grows as O(log n) instead of O(n).
[[nodiscard]] double pairwise_sum(std::span<const double> values);
[[nodiscard]] double mean(std::span<const double> values);
/// Population standard deviation.
[[nodiscard]] double stddev(std::span<const double> values);
[[nodiscard]] double pearson(std::span<const double> x, std::span<const double> y);

[[nodiscard]] EnergyReport energy_metrics(const Dataset& d);
[[nodiscard]] EnergyReport energy_metrics(std::span<const SpectrumTriple> spectra);

[[nodiscard]] double negative_absorption_fraction(const Dataset& d);

[[nodiscard]] double bandwidth_halfmax(std::span<const double> transmittance);
[[nodiscard]] double bandwidth_halfmax(const StoredSpectrum& s);
[[nodiscard]] double bandwidth_moment(std::span<const double> transmittance);
[[nodiscard]] double bandwidth_moment(const StoredSpectrum& s);

[[nodiscard]] BandwidthReport bandwidth_metrics(const Dataset& d);

/// Uses the grid wavelength at argmax T (lowest index on ties).
[[nodiscard]] double period_lambda_correlation(const Dataset& d);
[[nodiscard]] double period_lambda_correlation_analytic(const Dataset& d);

/// Mean over samples of max_i |T[i+1] - T[i]| (per grid step).
[[nodiscard]] double spectral_gradient_metric(const Dataset& d);

/// Energy metrics over noiseless re-synthesis of every stored sample.
[[nodiscard]] EnergyReport noiseless_energy_metrics(const Dataset& d);

struct ValidateOptions {
    bool include_noiseless = true;
};

[[nodiscard]] ValidationReport validate(const Dataset& d, const ValidateOptions& opts = {});

/// Contract breaches a dataset of this configuration must never show, e.g.
/// negative absorbance from a variant that should have none. Empty when clean.
[[nodiscard]] std::vector<std::string> contract_violations(const ValidationReport& report,
                                                           const VariantConfig& cfg);

[[nodiscard]] nlohmann::json to_json(const EnergyReport& e);
/// Per-sample bandwidth arrays are omitted unless include_arrays is set.
[[nodiscard]] nlohmann::json to_json(const ValidationReport& r, bool include_arrays = false);
[[nodiscard]] std::string to_text(const ValidationReport& r);

struct VariantDelta {
    VariantId variant_id{};
    double halfmax_sigma_reduction = 0.0;
    double moment_mean_reduction = 0.0;
    double gradient_reduction = 0.0;
    double negative_absorption_delta = 0.0;
};

struct ComparisonDocument {
    std::map<VariantId, ValidationReport> reports;
    std::vector<VariantDelta> deltas;

    [[nodiscard]] const VariantDelta* delta_for(VariantId id) const;
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::string to_text() const;
};

/// Relative changes of every non-Reference variant against Reference.
/// Throws MetricError when Reference is missing.
[[nodiscard]] ComparisonDocument ablation_report(const std::map<VariantId, ValidationReport>& reports);

}  // namespace gcsg
