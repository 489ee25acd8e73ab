// SPDX-License-Identifier: Apache-2.0
#include "upaq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace upaq {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw Error(ErrorKind::configuration, "cannot parse '" + text + "' as a number", key);
    }
    return value;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, item));
    if (out.empty()) throw Error(ErrorKind::configuration, "empty list", key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "on" || t == "true" || t == "1") return true;
    if (t == "off" || t == "false" || t == "0") return false;
    throw Error(ErrorKind::configuration, "expected on/off", key);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Immutable per-campaign state shared by all workers.
class Engine {
public:
    explicit Engine(const ExperimentConfig& config) : config_(config) {
        config_.validate();
        switch (config_.scheme) {
            case SchemeKind::proposed:
            case SchemeKind::narrowband_rb:
                proposed_.emplace(config_.geometry, config_.proposed, config_.design_paths);
                break;
            case SchemeKind::wideband:
                wideband_.emplace(config_.geometry, config_.grid, config_.wideband, config_.design_paths);
                break;
            case SchemeKind::algorithm1:
                if (config_.allocation.n_beams() > 1) {
                    const CMatrix r = analytic_covariance(config_.geometry, config_.allocation.n_beams(),
                                                          config_.allocation.bits_per_beam, config_.design_paths);
                    combiners_ = combiner_codebook(r, config_.allocation.n_beams(), config_.allocation.b_c);
                }
                break;
            default:
                break;
        }
    }

    double gain(int trial) const {
        const int p = config_.paths[static_cast<std::size_t>(trial) % config_.paths.size()];
        const PathSet paths = sample_paths(p, derive_seed(config_.seed, static_cast<std::uint64_t>(trial)), config_.delay);
        const UpaGeometry& geom = config_.geometry;

        if (config_.scheme == SchemeKind::wideband || config_.scheme == SchemeKind::narrowband_rb) {
            const CMatrix channel = wideband_channel(geom, paths, config_.grid);
            if (config_.scheme == SchemeKind::wideband) {
                return mean_tone_gain(channel, wideband_->precoders(wideband_->quantize(channel)));
            }
            CMatrix precoders(channel.rows(), channel.cols());
            const RbPartition partition = partition_rbs(config_.grid);
            for (const auto& row : partition.narrowband) {
                for (const ToneRange& rb : row) {
                    const CVector f = proposed_->quantize(channel.col(rb.begin + rb.count / 2)).vector;
                    for (int w = rb.begin; w < rb.begin + rb.count; ++w) precoders.col(w) = f;
                }
            }
            return mean_tone_gain(channel, precoders);
        }

        const CVector h = narrowband_channel(geom, paths);
        CVector f;
        switch (config_.scheme) {
            case SchemeKind::proposed: f = proposed_->quantize(h).vector; break;
            case SchemeKind::kp: f = kp_baseline(h, geom, 2 * config_.kp_b1).vector; break;
            case SchemeKind::enhanced_kp: f = enhanced_kp_baseline(h, geom, config_.ekp_b1, config_.ekp_b2).vector; break;
            case SchemeKind::algorithm1: {
                const FeedbackAllocation& alloc = config_.allocation;
                const QuantizedBeamSet set = beam_quantize(h, geom, alloc.n_beams(), alloc.bits_per_beam);
                f = alloc.n_beams() == 1 ? CVector(set.beams.col(0))
                                         : combine_beams(set.beams,
                                                         combiners_.codewords.col(select_combiner(set.beams, h, combiners_)));
                break;
            }
            default: break;
        }
        return config_.metric == GainMetric::raw ? beamforming_gain(h, f) : normalized_gain(h, f);
    }

private:
    ExperimentConfig config_;
    std::optional<ProposedQuantizer> proposed_;
    std::optional<WidebandQuantizer> wideband_;
    CombinerCodebook combiners_;
};

}  // namespace

std::string_view to_string(SchemeKind kind) noexcept {
    switch (kind) {
        case SchemeKind::proposed: return "proposed";
        case SchemeKind::kp: return "kp";
        case SchemeKind::enhanced_kp: return "enhanced_kp";
        case SchemeKind::algorithm1: return "algorithm1";
        case SchemeKind::wideband: return "wideband";
        case SchemeKind::narrowband_rb: return "narrowband_rb";
    }
    return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
    for (SchemeKind k : {SchemeKind::proposed, SchemeKind::kp, SchemeKind::enhanced_kp, SchemeKind::algorithm1,
                         SchemeKind::wideband, SchemeKind::narrowband_rb}) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorKind::configuration, "unknown scheme '" + std::string(name) + "'", "quantizer.scheme");
}

void ExperimentConfig::validate() const {
    geometry.validate();
    if (paths.empty()) throw Error(ErrorKind::configuration, "path-count set is empty", "channel.paths");
    for (int p : paths) {
        if (p < 1) throw Error(ErrorKind::configuration, "path counts must be >= 1", "channel.paths");
    }
    if (!(delay.max_delay >= 0.0)) throw Error(ErrorKind::configuration, "max delay must be >= 0", "channel.max_delay");
    if (trials < 1) throw Error(ErrorKind::configuration, "trial count must be >= 1", "experiment.trials");
    if (threads < 0) throw Error(ErrorKind::configuration, "thread count must be >= 0", "experiment.threads");
    if (design_paths < 1) throw Error(ErrorKind::configuration, "design path count must be >= 1", "combiner.design_paths");
    switch (scheme) {
        case SchemeKind::proposed: proposed.validate(); break;
        case SchemeKind::narrowband_rb:
            proposed.validate();
            grid.validate();
            break;
        case SchemeKind::kp:
            if (kp_b1 < 1) throw Error(ErrorKind::configuration, "KP bits must be >= 1", "kp.b1");
            break;
        case SchemeKind::enhanced_kp:
            if (ekp_b1 < 1) throw Error(ErrorKind::configuration, "enhanced KP bits must be >= 1", "enhanced_kp.b1");
            if (ekp_b2 < 1) throw Error(ErrorKind::configuration, "enhanced KP bits must be >= 1", "enhanced_kp.b2");
            break;
        case SchemeKind::algorithm1:
            allocation.validate();
            for (int b : allocation.bits_per_beam) {
                if (b < 1) throw Error(ErrorKind::configuration, "beam bits must be >= 1", "algorithm1.bits");
            }
            break;
        case SchemeKind::wideband:
            wideband.validate();
            grid.validate();
            break;
    }
}

long long ExperimentConfig::feedback_bits() const { return config_budget(*this).feedback_bits; }

Budget config_budget(const ExperimentConfig& config) {
    switch (config.scheme) {
        case SchemeKind::proposed:
            return complexity_budget(Scheme::proposed, {config.proposed.b1, config.proposed.b2, config.proposed.b_c});
        case SchemeKind::kp: return complexity_budget(Scheme::kp, {config.kp_b1});
        case SchemeKind::enhanced_kp: return complexity_budget(Scheme::enhanced_kp, {config.ekp_b1, config.ekp_b2});
        case SchemeKind::algorithm1: {
            Budget b{config.allocation.total(), 0};
            for (int bits : config.allocation.bits_per_beam) b.vector_evaluations += 1LL << (2 * bits);
            if (config.allocation.n_beams() > 1) b.vector_evaluations += 1LL << config.allocation.b_c;
            return b;
        }
        case SchemeKind::narrowband_rb: {
            const long long rbs = static_cast<long long>(config.grid.l_blocks) * config.grid.r_blocks;
            Budget b = complexity_budget(Scheme::proposed, {config.proposed.b1, config.proposed.b2, config.proposed.b_c});
            return {b.feedback_bits * rbs, b.vector_evaluations * rbs};
        }
        case SchemeKind::wideband: {
            const WidebandConfig& w = config.wideband;
            const long long l = config.grid.l_blocks;
            const long long lr = l * config.grid.r_blocks;
            Budget b;
            b.feedback_bits = wideband_overhead(config.grid, w.b_w1, w.b_w2, w.b_n1);
            b.vector_evaluations = l * ((1LL << (2 * w.b_w1)) + (1LL << (2 * w.b_w2 + w.b_c))) +
                                   lr * ((1LL << (2 * w.b_n1)) + (1LL << (2 * w.b_n2 + w.b_c)));
            return b;
        }
    }
    throw Error(ErrorKind::configuration, "unknown scheme", "quantizer.scheme");
}

void apply_preset(ExperimentConfig& config, std::string_view name) {
    const auto proposed = [&](int b1, int br, int b2, int bc) {
        config.scheme = SchemeKind::proposed;
        config.proposed = {b1, br, b2, bc};
    };
    const auto enhanced = [&](int b1, int b2) {
        config.scheme = SchemeKind::enhanced_kp;
        config.ekp_b1 = b1;
        config.ekp_b2 = b2;
    };
    const auto layout = [&](SchemeKind kind, int l, int r) {
        config.scheme = kind;
        config.grid.l_blocks = l;
        config.grid.r_blocks = r;
    };
    if (name == "prop-n-i") proposed(5, 5, 4, 2);
    else if (name == "prop-n-ii") proposed(5, 4, 3, 2);
    else if (name == "prop-n-iii") proposed(4, 4, 3, 2);
    else if (name == "enh-kp-i") enhanced(5, 5);
    else if (name == "enh-kp-ii") enhanced(5, 4);
    else if (name == "kp") {
        config.scheme = SchemeKind::kp;
        config.kp_b1 = 11;
    } else if (name == "w-i") {
        layout(SchemeKind::wideband, 4, 2);
        config.wideband = {5, 5, 3, 2, 2};
    } else if (name == "w-ii") {
        layout(SchemeKind::wideband, 1, 9);
        config.wideband = {5, 5, 2, 1, 2};
    } else if (name == "n-1") {
        layout(SchemeKind::narrowband_rb, 4, 2);
        config.proposed = {5, 5, 4, 2};
    } else if (name == "n-2") {
        layout(SchemeKind::narrowband_rb, 1, 1);
        config.proposed = {5, 5, 4, 2};
    } else {
        throw Error(ErrorKind::configuration, "unknown preset '" + std::string(name) + "'", "preset");
    }
    config.scenario = std::string(name);
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    const auto i = [&] { return parse_number<int>(key, value); };
    const auto d = [&] { return parse_number<double>(key, value); };

    if (key == "experiment.scenario") c.scenario = value;
    else if (key == "experiment.preset") apply_preset(c, value);
    else if (key == "experiment.trials") c.trials = i();
    else if (key == "experiment.seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "experiment.threads") c.threads = i();
    else if (key == "experiment.out") c.out = value;
    else if (key == "run.timing") c.timing = parse_bool(key, value);
    else if (key == "array.m_v") c.geometry.m_v = i();
    else if (key == "array.m_h") c.geometry.m_h = i();
    else if (key == "array.d_v") c.geometry.d_v = d();
    else if (key == "array.d_h") c.geometry.d_h = d();
    else if (key == "channel.paths") c.paths = parse_int_list(key, value);
    else if (key == "channel.max_delay") c.delay.max_delay = d();
    else if (key == "grid.tones") c.grid.tones = i();
    else if (key == "grid.spacing") c.grid.spacing = d();
    else if (key == "grid.carrier") c.grid.carrier = d();
    else if (key == "grid.l") c.grid.l_blocks = i();
    else if (key == "grid.r") c.grid.r_blocks = i();
    else if (key == "quantizer.scheme") c.scheme = parse_scheme(value);
    else if (key == "quantizer.metric") {
        if (value == "normalized") c.metric = GainMetric::normalized;
        else if (value == "raw") c.metric = GainMetric::raw;
        else throw Error(ErrorKind::configuration, "expected normalized or raw", key);
    } else if (key == "proposed.b1") c.proposed.b1 = i();
    else if (key == "proposed.b_refine") c.proposed.b_refine = i();
    else if (key == "proposed.b2") c.proposed.b2 = i();
    else if (key == "proposed.b_c") c.proposed.b_c = i();
    else if (key == "kp.b1") c.kp_b1 = i();
    else if (key == "enhanced_kp.b1") c.ekp_b1 = i();
    else if (key == "enhanced_kp.b2") c.ekp_b2 = i();
    else if (key == "algorithm1.bits") c.allocation.bits_per_beam = parse_int_list(key, value);
    else if (key == "algorithm1.b_c") c.allocation.b_c = i();
    else if (key == "wideband.b_w1") c.wideband.b_w1 = i();
    else if (key == "wideband.b_w2") c.wideband.b_w2 = i();
    else if (key == "wideband.b_n1") c.wideband.b_n1 = i();
    else if (key == "wideband.b_n2") c.wideband.b_n2 = i();
    else if (key == "wideband.b_c") c.wideband.b_c = i();
    else if (key == "combiner.design_paths") c.design_paths = i();
    else throw Error(ErrorKind::configuration, "unknown configuration key", key);
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::configuration, "line " + std::to_string(number) + " is not key=value", "config");
        }
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        apply_setting(base, key, line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config file " + path, "config");
    return parse_config(in, std::move(base));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ index);
}

double trial_gain(const ExperimentConfig& config, int trial) { return Engine(config).gain(trial); }

GainReport run_trials(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const Engine engine(config);
    std::vector<double> gains(static_cast<std::size_t>(config.trials));

    int workers = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, config.trials);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (int t = next++; t < config.trials; t = next++) {
            try {
                gains[static_cast<std::size_t>(t)] = engine.gain(t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = config.trials;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    // Fixed-order reduction keeps the aggregate independent of scheduling.
    double sum = 0.0;
    for (double g : gains) sum += g;
    const double mean = sum / config.trials;
    double var = 0.0;
    for (double g : gains) var += (g - mean) * (g - mean);
    const double sd = config.trials > 1 ? std::sqrt(var / (config.trials - 1)) : 0.0;

    GainReport report;
    report.scenario = config.scenario;
    report.m_v = config.geometry.m_v;
    report.m_h = config.geometry.m_h;
    report.scheme = std::string(to_string(config.scheme));
    report.b_total = config.feedback_bits();
    report.trials = config.trials;
    report.mean_gain = mean;
    report.stderr_gain = sd / std::sqrt(static_cast<double>(config.trials));
    report.seconds =
        config.timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
    return report;
}

std::vector<GainReport> run_campaign(const std::vector<ExperimentConfig>& configs) {
    std::vector<GainReport> out;
    out.reserve(configs.size());
    for (const auto& c : configs) out.push_back(run_trials(c));
    return out;
}

ComparisonTable compare(const std::vector<GainReport>& reports, const std::vector<ExperimentConfig>& configs) {
    if (reports.size() != configs.size()) {
        throw Error(ErrorKind::invalid_input, "one config is needed per report", "configs");
    }
    ComparisonTable table;
    std::vector<std::pair<int, int>> geometries;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const GainReport& r = reports[k];
        if (std::find(table.schemes.begin(), table.schemes.end(), r.scenario) == table.schemes.end()) {
            table.schemes.push_back(r.scenario);
            table.budgets.push_back(config_budget(configs[k]));
        }
        const std::pair<int, int> g{r.m_v, r.m_h};
        if (std::find(geometries.begin(), geometries.end(), g) == geometries.end()) geometries.push_back(g);
    }
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [m_v, m_h] : geometries) {
        ComparisonRow row{m_v, m_h, std::vector<double>(table.schemes.size(), nan), {}};
        for (const GainReport& r : reports) {
            if (r.m_v != m_v || r.m_h != m_h) continue;
            const auto col = std::find(table.schemes.begin(), table.schemes.end(), r.scenario) - table.schemes.begin();
            if (!std::isnan(row.gains[static_cast<std::size_t>(col)])) {
                throw Error(ErrorKind::invalid_input, "duplicate report for " + r.scenario, "configs");
            }
            row.gains[static_cast<std::size_t>(col)] = r.mean_gain;
        }
        for (double g : row.gains) {
            if (std::isnan(g)) throw Error(ErrorKind::invalid_input, "schemes do not share the same geometry sweep", "configs");
            row.deltas.push_back(g - row.gains.front());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_comparison(std::ostream& out, const ComparisonTable& table) {
    char buf[64];
    out << "m_v,m_h";
    for (const auto& s : table.schemes) out << ',' << s;
    for (std::size_t i = 1; i < table.schemes.size(); ++i) out << ",delta_" << table.schemes[i];
    out << '\n';
    for (const ComparisonRow& row : table.rows) {
        out << row.m_v << ',' << row.m_h;
        for (double g : row.gains) {
            std::snprintf(buf, sizeof buf, "%.6f", g);
            out << ',' << buf;
        }
        for (std::size_t i = 1; i < row.deltas.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%+.6f", row.deltas[i]);
            out << ',' << buf;
        }
        out << '\n';
    }
    out << "# budget: scheme,feedback_bits,vector_evaluations\n";
    for (std::size_t i = 0; i < table.schemes.size(); ++i) {
        out << "# " << table.schemes[i] << ',' << table.budgets[i].feedback_bits << ','
            << table.budgets[i].vector_evaluations << '\n';
    }
}

ExportFormat parse_format(std::string_view name) {
    if (name == "csv") return ExportFormat::csv;
    if (name == "jsonl" || name == "json-lines") return ExportFormat::json_lines;
    throw Error(ErrorKind::configuration, "unknown export format '" + std::string(name) + "'", "format");
}

namespace {

constexpr const char* kColumns = "scenario,m_v,m_h,scheme,b_total,trials,mean_gain,stderr,seconds";

std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void export_reports(std::ostream& out, const std::vector<GainReport>& reports, ExportFormat format) {
    if (format == ExportFormat::csv) {
        out << kColumns << '\n';
        for (const GainReport& r : reports) {
            if (r.scenario.find_first_of(",\n") != std::string::npos) {
                throw Error(ErrorKind::invalid_input, "scenario names cannot contain commas", "scenario");
            }
            out << r.scenario << ',' << r.m_v << ',' << r.m_h << ',' << r.scheme << ',' << r.b_total << ',' << r.trials
                << ',' << exact(r.mean_gain) << ',' << exact(r.stderr_gain) << ',' << exact(r.seconds) << '\n';
        }
        return;
    }
    for (const GainReport& r : reports) {
        nlohmann::ordered_json j;
        j["scenario"] = r.scenario;
        j["m_v"] = r.m_v;
        j["m_h"] = r.m_h;
        j["scheme"] = r.scheme;
        j["b_total"] = r.b_total;
        j["trials"] = r.trials;
        j["mean_gain"] = r.mean_gain;
        j["stderr"] = r.stderr_gain;
        j["seconds"] = r.seconds;
        out << j.dump() << '\n';
    }
}

void export_reports(const std::string& path, const std::vector<GainReport>& reports, ExportFormat format) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path, "out");
    export_reports(out, reports, format);
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed for " + path, "out");
}

std::vector<GainReport> import_reports(std::istream& in, ExportFormat format) {
    std::vector<GainReport> out;
    std::string line;
    if (format == ExportFormat::csv) {
        if (!std::getline(in, line) || trim(line) != kColumns) {
            throw Error(ErrorKind::invalid_input, "missing or unexpected CSV header", "header");
        }
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const auto cells = split_csv(trim(line));
            if (cells.size() != 9) throw Error(ErrorKind::invalid_input, "expected 9 columns: " + line, "row");
            GainReport r;
            r.scenario = cells[0];
            r.m_v = parse_number<int>("m_v", cells[1]);
            r.m_h = parse_number<int>("m_h", cells[2]);
            r.scheme = cells[3];
            r.b_total = parse_number<long long>("b_total", cells[4]);
            r.trials = parse_number<int>("trials", cells[5]);
            r.mean_gain = parse_number<double>("mean_gain", cells[6]);
            r.stderr_gain = parse_number<double>("stderr", cells[7]);
            r.seconds = parse_number<double>("seconds", cells[8]);
            out.push_back(std::move(r));
        }
        return out;
    }
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            GainReport r;
            r.scenario = j.at("scenario").get<std::string>();
            r.m_v = j.at("m_v").get<int>();
            r.m_h = j.at("m_h").get<int>();
            r.scheme = j.at("scheme").get<std::string>();
            r.b_total = j.at("b_total").get<long long>();
            r.trials = j.at("trials").get<int>();
            r.mean_gain = j.at("mean_gain").get<double>();
            r.stderr_gain = j.at("stderr").get<double>();
            r.seconds = j.at("seconds").get<double>();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::invalid_input, std::string("bad json-lines record: ") + e.what(), "row");
        }
    }
    return out;
}

}  // namespace upaq
