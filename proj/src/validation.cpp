#include "gcsg/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace gcsg {

namespace {

constexpr std::size_t kPairwiseBlock = 64;

Spectrum widen(const std::array<float, kGridPoints>& a) {
    Spectrum out{};
    std::copy(a.begin(), a.end(), out.begin());
    return out;
}

void require_samples(const Dataset& d, const char* what) {
    if (d.samples.empty()) {
        throw MetricError(fmt::format("{}: dataset is empty", what));
    }
}

struct SampleEnergy {
    double mean_error = 0.0;
    double max_error = 0.0;
    std::uint64_t rt_violations = 0;
};

template <typename Channel>
SampleEnergy sample_energy(const Channel& r, const Channel& t, const Channel& a) {
    SampleEnergy e;
    std::array<double, kGridPoints> err{};
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        const double rt = double(r[i]) + double(t[i]);
        err[i] = std::abs(rt + double(a[i]) - 1.0);
        e.max_error = std::max(e.max_error, err[i]);
        if (rt > 1.0) ++e.rt_violations;
    }
    e.mean_error = mean(err);
    return e;
}

EnergyReport summarize(std::span<const SampleEnergy> per_sample) {
    EnergyReport report;
    std::vector<double> means;
    means.reserve(per_sample.size());
    std::uint64_t valid = 0;
    for (const auto& e : per_sample) {
        means.push_back(e.mean_error);
        report.max_energy_error = std::max(report.max_energy_error, e.max_error);
        report.rt_violation_count += e.rt_violations;
        if (e.mean_error < kValidSampleThreshold) ++valid;
    }
    report.mean_energy_error = mean(means);
    report.valid_sample_fraction = double(valid) / double(per_sample.size());
    return report;
}

std::vector<double> periods(const Dataset& d) {
    std::vector<double> out;
    out.reserve(d.samples.size());
    for (const auto& s : d.samples) out.push_back(s.params.period_nm);
    return out;
}

double reduction(double value, double reference) {
    return reference != 0.0 ? 1.0 - value / reference : 0.0;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= kPairwiseBlock) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
    if (values.empty()) throw MetricError("mean of empty range");
    return pairwise_sum(values) / double(values.size());
}

double stddev(std::span<const double> values) {
    const double mu = mean(values);
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(), [mu](double v) { return (v - mu) * (v - mu); });
    return std::sqrt(pairwise_sum(sq) / double(values.size()));
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw MetricError("pearson: length mismatch");
    if (x.size() < 3) throw MetricError("pearson: need at least 3 points");
    const double mx = mean(x);
    const double my = mean(y);
    std::vector<double> sxy(x.size()), sxx(x.size()), syy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy[i] = dx * dy;
        sxx[i] = dx * dx;
        syy[i] = dy * dy;
    }
    const double vx = pairwise_sum(sxx);
    const double vy = pairwise_sum(syy);
    if (vx == 0.0 || vy == 0.0) throw MetricError("pearson: constant input, correlation undefined");
    return std::clamp(pairwise_sum(sxy) / std::sqrt(vx * vy), -1.0, 1.0);
}

EnergyReport energy_metrics(const Dataset& d) {
    require_samples(d, "energy_metrics");
    std::vector<SampleEnergy> per_sample;
    per_sample.reserve(d.samples.size());
    for (const auto& s : d.samples) {
        per_sample.push_back(
            sample_energy(s.spectrum.reflectance, s.spectrum.transmittance, s.spectrum.absorbance));
    }
    return summarize(per_sample);
}

EnergyReport energy_metrics(std::span<const SpectrumTriple> spectra) {
    if (spectra.empty()) throw MetricError("energy_metrics: no spectra");
    std::vector<SampleEnergy> per_sample;
    per_sample.reserve(spectra.size());
    for (const auto& s : spectra) {
        per_sample.push_back(sample_energy(s.reflectance, s.transmittance, s.absorbance));
    }
    return summarize(per_sample);
}

double negative_absorption_fraction(const Dataset& d) {
    require_samples(d, "negative_absorption_fraction");
    std::uint64_t negative = 0;
    for (const auto& s : d.samples) {
        negative += std::count_if(s.spectrum.absorbance.begin(), s.spectrum.absorbance.end(),
                                  [](float a) { return a < 0.0f; });
    }
    return double(negative) / (double(kGridPoints) * double(d.samples.size()));
}

double bandwidth_halfmax(std::span<const double> transmittance) {
    if (transmittance.size() != kGridPoints) throw MetricError("bandwidth_halfmax: wrong spectrum length");
    const double peak = *std::max_element(transmittance.begin(), transmittance.end());
    if (!(peak > 0.0) || !std::isfinite(peak)) {
        throw MetricError("bandwidth_halfmax: transmittance has no positive peak");
    }
    const double threshold = peak / 2.0;
    std::size_t first = kGridPoints;
    std::size_t last = 0;
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        if (transmittance[i] >= threshold) {
            first = std::min(first, i);
            last = i;
        }
    }
    const auto& grid = WavelengthGrid::standard();
    return grid[last] - grid[first];
}

double bandwidth_halfmax(const StoredSpectrum& s) {
    const Spectrum t = widen(s.transmittance);
    return bandwidth_halfmax(t);
}

double bandwidth_moment(std::span<const double> transmittance) {
    if (transmittance.size() != kGridPoints) throw MetricError("bandwidth_moment: wrong spectrum length");
    const double total = pairwise_sum(transmittance);
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw MetricError("bandwidth_moment: transmittance sums to zero");
    }
    const auto& grid = WavelengthGrid::standard();
    Spectrum weighted{};
    for (std::size_t i = 0; i < kGridPoints; ++i) weighted[i] = transmittance[i] / total * grid[i];
    const double mu = pairwise_sum(weighted);
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        const double dl = grid[i] - mu;
        weighted[i] = transmittance[i] / total * dl * dl;
    }
    return std::sqrt(std::max(0.0, pairwise_sum(weighted)));
}

double bandwidth_moment(const StoredSpectrum& s) {
    const Spectrum t = widen(s.transmittance);
    return bandwidth_moment(t);
}

BandwidthReport bandwidth_metrics(const Dataset& d) {
    require_samples(d, "bandwidth_metrics");
    BandwidthReport b;
    b.halfmax_bandwidths_nm.reserve(d.samples.size());
    b.moment_bandwidths_nm.reserve(d.samples.size());
    for (const auto& s : d.samples) {
        b.halfmax_bandwidths_nm.push_back(bandwidth_halfmax(s.spectrum));
        b.moment_bandwidths_nm.push_back(bandwidth_moment(s.spectrum));
    }
    b.halfmax_mean_nm = mean(b.halfmax_bandwidths_nm);
    b.halfmax_sigma_nm = stddev(b.halfmax_bandwidths_nm);
    b.moment_mean_nm = mean(b.moment_bandwidths_nm);
    b.moment_sigma_nm = stddev(b.moment_bandwidths_nm);
    return b;
}

double period_lambda_correlation(const Dataset& d) {
    require_samples(d, "period_lambda_correlation");
    const auto& grid = WavelengthGrid::standard();
    std::vector<double> measured;
    measured.reserve(d.samples.size());
    for (const auto& s : d.samples) {
        const auto& t = s.spectrum.transmittance;
        // max_element returns the first maximum, i.e. ties go to the lower index
        const auto peak = std::max_element(t.begin(), t.end());
        measured.push_back(grid[std::size_t(peak - t.begin())]);
    }
    return pearson(periods(d), measured);
}

double period_lambda_correlation_analytic(const Dataset& d) {
    require_samples(d, "period_lambda_correlation_analytic");
    std::vector<double> centers;
    centers.reserve(d.samples.size());
    for (const auto& s : d.samples) centers.push_back(double(s.spectrum.center_wavelength_nm));
    return pearson(periods(d), centers);
}

double spectral_gradient_metric(const Dataset& d) {
    require_samples(d, "spectral_gradient_metric");
    std::vector<double> per_sample;
    per_sample.reserve(d.samples.size());
    for (const auto& s : d.samples) {
        const auto& t = s.spectrum.transmittance;
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < kGridPoints; ++i) {
            worst = std::max(worst, std::abs(double(t[i + 1]) - double(t[i])));
        }
        per_sample.push_back(worst);
    }
    return mean(per_sample);
}

EnergyReport noiseless_energy_metrics(const Dataset& d) {
    require_samples(d, "noiseless_energy_metrics");
    VariantConfig cfg = d.manifest.variant;
    cfg.noise.mode = NoiseMode::Off;
    std::vector<SampleEnergy> per_sample;
    per_sample.reserve(d.samples.size());
    RandomStream unused(0);
    for (const auto& s : d.samples) {
        const StoredSpectrum stored = to_stored(simulate(s.params, cfg, unused));
        per_sample.push_back(sample_energy(stored.reflectance, stored.transmittance, stored.absorbance));
    }
    return summarize(per_sample);
}

ValidationReport validate(const Dataset& d, const ValidateOptions& opts) {
    require_samples(d, "validate");
    ValidationReport r;
    r.variant_id = d.manifest.variant.variant_id;
    r.sample_count = d.samples.size();
    r.energy = energy_metrics(d);
    if (opts.include_noiseless) r.noiseless_energy = noiseless_energy_metrics(d);
    r.negative_absorption_fraction = negative_absorption_fraction(d);
    r.bandwidth = bandwidth_metrics(d);
    if (d.samples.size() >= 3) {
        r.period_lambda_r = period_lambda_correlation(d);
        r.period_lambda_analytic_r = period_lambda_correlation_analytic(d);
    }
    r.gradient_max_mean = spectral_gradient_metric(d);
    return r;
}

std::vector<std::string> contract_violations(const ValidationReport& report, const VariantConfig& cfg) {
    std::vector<std::string> out;
    const bool noiseless = cfg.noise.mode == NoiseMode::Off;
    const bool must_be_nonnegative = noiseless || cfg.noise.mode == NoiseMode::SafeBounded ||
                                     cfg.variant_id == VariantId::A_NoExplicitEnforcement;
    if (must_be_nonnegative && report.negative_absorption_fraction > 0.0) {
        out.push_back(fmt::format("negative absorbance at {:.4f}% of points; {} with noise '{}' must have none",
                                  100.0 * report.negative_absorption_fraction, label(cfg.variant_id),
                                  to_string(cfg.noise.mode)));
    }
    // Variant A skips renormalization, so only the others are held to closure.
    if (cfg.variant_id != VariantId::A_NoExplicitEnforcement && report.energy.max_energy_error > 1e-6) {
        out.push_back(fmt::format("max |R+T+A-1| = {:.3e} exceeds 1e-6", report.energy.max_energy_error));
    }
    if (report.negative_absorption_fraction < 0.0 || report.negative_absorption_fraction > 1.0) {
        out.push_back("negative absorption fraction outside [0, 1]");
    }
    return out;
}

nlohmann::json to_json(const EnergyReport& e) {
    return {{"mean_energy_error", e.mean_energy_error},
            {"max_energy_error", e.max_energy_error},
            {"rt_violation_count", e.rt_violation_count},
            {"valid_sample_fraction", e.valid_sample_fraction}};
}

nlohmann::json to_json(const ValidationReport& r, bool include_arrays) {
    nlohmann::json bw = {{"halfmax_mean_nm", r.bandwidth.halfmax_mean_nm},
                         {"halfmax_sigma_nm", r.bandwidth.halfmax_sigma_nm},
                         {"moment_mean_nm", r.bandwidth.moment_mean_nm},
                         {"moment_sigma_nm", r.bandwidth.moment_sigma_nm}};
    if (include_arrays) {
        bw["halfmax_bandwidths_nm"] = r.bandwidth.halfmax_bandwidths_nm;
        bw["moment_bandwidths_nm"] = r.bandwidth.moment_bandwidths_nm;
    }
    nlohmann::json j = {{"variant", std::string(to_string(r.variant_id))},
                        {"sample_count", r.sample_count},
                        {"energy", to_json(r.energy)},
                        {"negative_absorption_fraction", r.negative_absorption_fraction},
                        {"bandwidth", bw},
                        {"period_lambda_r", r.period_lambda_r},
                        {"period_lambda_analytic_r", r.period_lambda_analytic_r},
                        {"gradient_max_mean", r.gradient_max_mean}};
    if (r.noiseless_energy) j["noiseless_energy"] = to_json(*r.noiseless_energy);
    return j;
}

std::string to_text(const ValidationReport& r) {
    std::string out;
    auto line = [&out](const std::string& s) {
        out += s;
        out += '\n';
    };
    line(fmt::format("variant                      {}", label(r.variant_id)));
    line(fmt::format("samples                      {}", r.sample_count));
    line(fmt::format("mean energy error            {:.3e}", r.energy.mean_energy_error));
    line(fmt::format("max energy error             {:.3e}", r.energy.max_energy_error));
    line(fmt::format("R+T > 1 points               {}", r.energy.rt_violation_count));
    line(fmt::format("valid samples                {:.2f}%", 100.0 * r.energy.valid_sample_fraction));
    if (r.noiseless_energy) {
        line(fmt::format("noiseless mean / max error   {:.3e} / {:.3e}", r.noiseless_energy->mean_energy_error,
                         r.noiseless_energy->max_energy_error));
    }
    line(fmt::format("negative absorption          {:.4f}%", 100.0 * r.negative_absorption_fraction));
    line(fmt::format("half-max bandwidth mean/sd   {:.2f} / {:.2f} nm", r.bandwidth.halfmax_mean_nm,
                     r.bandwidth.halfmax_sigma_nm));
    line(fmt::format("moment bandwidth mean/sd     {:.2f} / {:.2f} nm", r.bandwidth.moment_mean_nm,
                     r.bandwidth.moment_sigma_nm));
    line(fmt::format("period-lambda r (argmax)     {:.4f}", r.period_lambda_r));
    line(fmt::format("period-lambda r (analytic)   {:.4f}", r.period_lambda_analytic_r));
    line(fmt::format("mean max |dT| per step       {:.4f}", r.gradient_max_mean));
    return out;
}

const VariantDelta* ComparisonDocument::delta_for(VariantId id) const {
    for (const auto& d : deltas) {
        if (d.variant_id == id) return &d;
    }
    return nullptr;
}

ComparisonDocument ablation_report(const std::map<VariantId, ValidationReport>& reports) {
    const auto ref_it = reports.find(VariantId::Reference);
    if (ref_it == reports.end()) {
        throw MetricError("ablation_report: Reference report is required");
    }
    const ValidationReport& ref = ref_it->second;

    ComparisonDocument doc;
    doc.reports = reports;
    for (const auto& [id, r] : reports) {
        if (id == VariantId::Reference) continue;
        VariantDelta delta;
        delta.variant_id = id;
        delta.halfmax_sigma_reduction = reduction(r.bandwidth.halfmax_sigma_nm, ref.bandwidth.halfmax_sigma_nm);
        delta.moment_mean_reduction = reduction(r.bandwidth.moment_mean_nm, ref.bandwidth.moment_mean_nm);
        delta.gradient_reduction = reduction(r.gradient_max_mean, ref.gradient_max_mean);
        delta.negative_absorption_delta = r.negative_absorption_fraction - ref.negative_absorption_fraction;
        doc.deltas.push_back(delta);
    }
    return doc;
}

nlohmann::json ComparisonDocument::to_json() const {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& [id, r] : reports) variants.push_back(gcsg::to_json(r));
    nlohmann::json delta_rows = nlohmann::json::array();
    for (const auto& d : deltas) {
        delta_rows.push_back({{"variant", std::string(to_string(d.variant_id))},
                              {"halfmax_sigma_reduction", d.halfmax_sigma_reduction},
                              {"moment_mean_reduction", d.moment_mean_reduction},
                              {"gradient_reduction", d.gradient_reduction},
                              {"negative_absorption_delta", d.negative_absorption_delta}});
    }
    return {{"variants", variants}, {"deltas_vs_reference", delta_rows}};
}

std::string ComparisonDocument::to_text() const {
    std::string out;
    out += "Physical validation\n";
    out += fmt::format("{:<36} {:>11} {:>11} {:>9} {:>8} {:>10} {:>10}\n", "Variant", "Mean err", "Max err",
                       "R+T>1", "Valid %", "r argmax", "r analytic");
    for (const auto& [id, r] : reports) {
        out += fmt::format("{:<36} {:>11.3e} {:>11.3e} {:>9} {:>8.1f} {:>10.4f} {:>10.4f}\n", label(id),
                           r.energy.mean_energy_error, r.energy.max_energy_error, r.energy.rt_violation_count,
                           100.0 * r.energy.valid_sample_fraction, r.period_lambda_r, r.period_lambda_analytic_r);
    }
    out += "\nNegative absorption (pointwise)\n";
    for (const auto& [id, r] : reports) {
        out += fmt::format("{:<36} {:>8.3f}%\n", label(id), 100.0 * r.negative_absorption_fraction);
    }
    out += "\nBandwidth and smoothness\n";
    out += fmt::format("{:<36} {:>12} {:>12} {:>12} {:>10}\n", "Variant", "HM sd nm", "HM mean nm", "Moment mean",
                       "max|dT|");
    for (const auto& [id, r] : reports) {
        out += fmt::format("{:<36} {:>12.2f} {:>12.2f} {:>12.2f} {:>10.4f}\n", label(id), r.bandwidth.halfmax_sigma_nm,
                           r.bandwidth.halfmax_mean_nm, r.bandwidth.moment_mean_nm, r.gradient_max_mean);
    }
    if (!deltas.empty()) {
        out += "\nChange vs Reference (positive = reduction)\n";
        out += fmt::format("{:<36} {:>14} {:>14} {:>14} {:>14}\n", "Variant", "HM sd", "Moment mean", "max|dT|",
                           "neg A delta");
        for (const auto& d : deltas) {
            out += fmt::format("{:<36} {:>13.1f}% {:>13.1f}% {:>13.1f}% {:>13.3f}%\n", label(d.variant_id),
                               100.0 * d.halfmax_sigma_reduction, 100.0 * d.moment_mean_reduction,
                               100.0 * d.gradient_reduction, 100.0 * d.negative_absorption_delta);
        }
    }
    return out;
}

}  // namespace gcsg
