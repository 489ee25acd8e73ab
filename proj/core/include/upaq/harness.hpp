// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "upaq/analysis.hpp"
#include "upaq/channel.hpp"
#include "upaq/narrowband.hpp"
#include "upaq/types.hpp"
#include "upaq/wideband.hpp"

namespace upaq {

enum class SchemeKind {
    proposed,       // three-round narrowband quantizer
    kp,             // SVD Kronecker baseline
    enhanced_kp,    // two-term SVD Kronecker baseline
    algorithm1,     // Algorithm-1 beams plus combiner codebook, any N
    wideband,       // two-level wideband quantizer
    narrowband_rb,  // proposed quantizer on the center tone of each narrowband RB
};

std::string_view to_string(SchemeKind kind) noexcept;
SchemeKind parse_scheme(std::string_view name);

enum class GainMetric {
    normalized,  // |h^H f|^2 / |h|^2
    raw,         // |h^H f|^2 with the channel left unnormalized
};

struct ExperimentConfig {
    std::string scenario = "default";
    UpaGeometry geometry{4, 4, 0.5, 0.5};
    std::vector<int> paths{3};  // trial t uses paths[t % size]
    DelayProfile delay;
    WidebandGrid grid{600, 15e3, 2e9, 4, 2};

    SchemeKind scheme = SchemeKind::proposed;
    GainMetric metric = GainMetric::normalized;
    ProposedConfig proposed;
    int kp_b1 = 11;
    int ekp_b1 = 5;
    int ekp_b2 = 5;
    FeedbackAllocation allocation{{4, 3}, 2};
    WidebandConfig wideband;
    int design_paths = 4;

    int trials = 1000;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency
    bool timing = true;
    std::string out;

    void validate() const;

    /// Feedback bits per narrowband tone, or per channel for the wideband
    /// schemes.
    long long feedback_bits() const;
};

/// Named configurations: prop-n-i, prop-n-ii, prop-n-iii, enh-kp-i,
/// enh-kp-ii, kp, w-i, w-ii, n-1, n-2. Sets the scheme, its bit budgets and,
/// for the wideband families, the RB layout.
void apply_preset(ExperimentConfig& config, std::string_view name);

/// Applies one "section.key=value" setting. Unknown keys throw configuration
/// with the key as the field name.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat key=value text; '#' starts a comment, blank lines are ignored and a
/// "[section]" line prefixes the keys that follow it.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Independent seed for trial `index` of a campaign.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

struct GainReport {
    std::string scenario;
    int m_v = 0;
    int m_h = 0;
    std::string scheme;
    long long b_total = 0;
    int trials = 0;
    double mean_gain = 0.0;
    double stderr_gain = 0.0;  // sample standard deviation / sqrt(trials)
    double seconds = 0.0;

    friend bool operator==(const GainReport&, const GainReport&) = default;
};

/// Gain of one trial; exposed so tests can check individual draws.
double trial_gain(const ExperimentConfig& config, int trial);

/// Runs config.trials independent trials on config.threads workers. The result
/// is identical for any worker count.
GainReport run_trials(const ExperimentConfig& config);

/// run_trials over several configs that share a geometry sweep.
std::vector<GainReport> run_campaign(const std::vector<ExperimentConfig>& configs);

struct ComparisonRow {
    int m_v = 0;
    int m_h = 0;
    std::vector<double> gains;          // one per scheme
    std::vector<double> deltas;         // gains[i] - gains[0]
};

struct ComparisonTable {
    std::vector<std::string> schemes;
    std::vector<Budget> budgets;  // feedback bits and search cost per scheme
    std::vector<ComparisonRow> rows;
};

/// Aligns reports by (m_v, m_h). Every scheme must cover the same geometries.
ComparisonTable compare(const std::vector<GainReport>& reports, const std::vector<ExperimentConfig>& configs);

void write_comparison(std::ostream& out, const ComparisonTable& table);

/// Budget of one config: complexity_budget for the narrowband schemes, the
/// wideband overhead formula for the wideband one.
Budget config_budget(const ExperimentConfig& config);

enum class ExportFormat { csv, json_lines };

ExportFormat parse_format(std::string_view name);

/// Columns: scenario, m_v, m_h, scheme, b_total, trials, mean_gain, stderr, seconds.
void export_reports(std::ostream& out, const std::vector<GainReport>& reports, ExportFormat format);
void export_reports(const std::string& path, const std::vector<GainReport>& reports, ExportFormat format);
std::vector<GainReport> import_reports(std::istream& in, ExportFormat format);

}  // namespace upaq
