// SPDX-License-Identifier: Apache-2.0
// upaq: Monte Carlo campaigns and closed-form tables for UPA CSI quantizers.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "upaq/analysis.hpp"
#include "upaq/codebooks.hpp"
#include "upaq/harness.hpp"
#include "upaq/narrowband.hpp"
#include "upaq/wideband.hpp"

namespace {

using namespace upaq;

void error_line(const std::string& kind, const std::string& message, const std::string& field = {}) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    if (!field.empty()) j["field"] = field;
    std::cerr << j.dump() << '\n';
}

std::vector<std::pair<int, int>> parse_arrays(const std::string& text) {
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto x = item.find('x');
        if (x == std::string::npos) throw Error(ErrorKind::configuration, "array '" + item + "' is not MVxMH", "arrays");
        try {
            out.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
        } catch (const std::exception&) {
            throw Error(ErrorKind::configuration, "array '" + item + "' is not MVxMH", "arrays");
        }
    }
    if (out.empty()) throw Error(ErrorKind::configuration, "no arrays given", "arrays");
    return out;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> int_list(const std::string& text, const char* field) {
    std::vector<int> out;
    for (const auto& item : split(text)) {
        std::size_t used = 0;
        try {
            out.push_back(std::stoi(item, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw Error(ErrorKind::configuration, "'" + item + "' is not an integer", field);
    }
    if (out.empty()) throw Error(ErrorKind::configuration, "empty list", field);
    return out;
}

// Options shared by the campaign commands.
struct Campaign {
    std::string config_file;
    std::vector<std::string> settings;
    std::string preset;
    std::string scheme;
    std::string arrays;
    std::string paths;
    std::uint64_t seed = 0;
    int trials = 0;
    int threads = 0;
    std::string out;
    std::string format = "csv";
    bool no_timing = false;

    void attach(CLI::App* cmd, bool with_scheme) {
        cmd->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
        cmd->add_option("--set", settings, "override, e.g. --set array.m_v=8");
        cmd->add_option("--preset", preset, "named configuration (prop-n-i, kp, w-i, n-1, ...)");
        if (with_scheme) cmd->add_option("--scheme", scheme, "proposed|kp|enhanced_kp|algorithm1|wideband|narrowband_rb");
        cmd->add_option("--arrays", arrays, "comma list of MVxMH sizes, e.g. 4x4,8x8");
        cmd->add_option("--paths", paths, "comma list of path counts drawn uniformly");
        cmd->add_option("--seed", seed, "master seed")->required();
        cmd->add_option("--trials", trials, "trials per scenario")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--threads", threads, "worker threads (0: all cores)");
        cmd->add_option("--out", out, "output file ('-' for stdout)")->required();
        cmd->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
        cmd->add_flag("--no-timing", no_timing, "write 0 in the seconds column");
    }

    ExperimentConfig base(SchemeKind default_scheme) const {
        ExperimentConfig c;
        c.scheme = default_scheme;
        if (!config_file.empty()) c = load_config(config_file, c);
        if (!preset.empty()) apply_preset(c, preset);
        if (!scheme.empty()) c.scheme = parse_scheme(scheme);
        for (const std::string& s : settings) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw Error(ErrorKind::configuration, "--set expects key=value", s);
            apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
        }
        if (!paths.empty()) apply_setting(c, "channel.paths", paths);
        c.seed = seed;
        c.trials = trials;
        c.threads = threads;
        c.out = out;
        if (no_timing) c.timing = false;
        return c;
    }

    std::vector<ExperimentConfig> sweep(const ExperimentConfig& c) const {
        if (arrays.empty()) return {c};
        std::vector<ExperimentConfig> out_configs;
        for (const auto& [m_v, m_h] : parse_arrays(arrays)) {
            ExperimentConfig s = c;
            s.geometry.m_v = m_v;
            s.geometry.m_h = m_h;
            out_configs.push_back(s);
        }
        return out_configs;
    }

    void write(const std::vector<GainReport>& reports) const {
        const ExportFormat f = parse_format(format);
        if (out == "-") {
            export_reports(std::cout, reports, f);
        } else {
            export_reports(out, reports, f);
        }
    }
};

int run_campaign_command(const Campaign& opts, SchemeKind default_scheme) {
    const ExperimentConfig c = opts.base(default_scheme);
    const auto configs = opts.sweep(c);
    for (const auto& cfg : configs) cfg.validate();
    opts.write(run_campaign(configs));
    return 0;
}

void print_table2(std::ostream& out) {
    struct Row {
        const char* name;
        Scheme scheme;
        std::vector<int> bits;
    };
    const std::vector<Row> rows = {
        {"prop-n-i", Scheme::proposed, {5, 4, 2}},   {"prop-n-ii", Scheme::proposed, {5, 3, 2}},
        {"prop-n-iii", Scheme::proposed, {4, 3, 2}}, {"enh-kp-i", Scheme::enhanced_kp, {5, 5}},
        {"enh-kp-ii", Scheme::enhanced_kp, {5, 4}},  {"kp", Scheme::kp, {11}},
    };
    out << "scheme,feedback_bits,vector_evaluations\n";
    for (const Row& r : rows) {
        const Budget b = complexity_budget(r.scheme, r.bits);
        out << r.name << ',' << b.feedback_bits << ',' << b.vector_evaluations << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"upaq: limited-feedback CSI quantizers for uniform planar arrays"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "upaq 0.1.0");

    Campaign nb_opts;
    auto* nb = app.add_subcommand("narrowband", "Monte Carlo gain of a narrowband quantizer");
    nb_opts.attach(nb, true);

    Campaign wb_opts;
    auto* wb = app.add_subcommand("wideband", "Monte Carlo per-tone gain of the wideband quantizer");
    wb_opts.attach(wb, true);

    Campaign cmp_opts;
    std::string cmp_presets = "prop-n-i,kp,enh-kp-i";
    auto* cmp = app.add_subcommand("compare", "Run several presets over one array sweep and tabulate");
    cmp_opts.attach(cmp, false);
    cmp->add_option("--presets", cmp_presets, "comma list of presets");
    std::string cmp_table;
    cmp->add_option("--table", cmp_table, "also write the aligned comparison table here");

    int alloc_mv = 4, alloc_mh = 4, alloc_bits = 20;
    std::string alloc_paths = "3,4,5";
    bool alloc_all = false;
    auto* alloc = app.add_subcommand("allocate", "Feedback-bit allocation by closed-form expected gain");
    alloc->add_option("--m-v", alloc_mv, "vertical antennas")->check(CLI::PositiveNumber);
    alloc->add_option("--m-h", alloc_mh, "horizontal antennas")->check(CLI::PositiveNumber);
    alloc->add_option("--b-total", alloc_bits, "total feedback bits")->required();
    alloc->add_option("--paths", alloc_paths, "comma list of path counts");
    alloc->add_flag("--all", alloc_all, "list every feasible allocation");

    int an_mv = 4, an_mh = 4, an_p = 3, an_bc = 0;
    std::string an_bits;
    bool an_table2 = false;
    int an_w1 = 5, an_w2 = 5, an_n1 = 3, an_l = 4, an_r = 2, an_tones = 600;
    bool an_wideband = false;
    std::string an_codebook;
    auto* an = app.add_subcommand("analyze", "Closed-form gains and budgets");
    an->add_option("--m-v", an_mv)->check(CLI::PositiveNumber);
    an->add_option("--m-h", an_mh)->check(CLI::PositiveNumber);
    an->add_option("--paths", an_p, "path count P")->check(CLI::PositiveNumber);
    an->add_option("--bits", an_bits, "per-beam DFT bits, e.g. 4,3");
    an->add_option("--b-c", an_bc, "combiner bits");
    an->add_flag("--table2", an_table2, "print the six narrowband budget rows");
    an->add_flag("--wideband", an_wideband, "print the wideband overhead for --b-w1/--b-w2/--b-n1/--l/--r");
    an->add_option("--b-w1", an_w1);
    an->add_option("--b-w2", an_w2);
    an->add_option("--b-n1", an_n1);
    an->add_option("--l", an_l);
    an->add_option("--r", an_r);
    an->add_option("--tones", an_tones);
    an->add_option("--codebook", an_codebook, "write the combiner codebook for --bits/--b-c/--paths to this file");

    auto* st = app.add_subcommand("selftest", "Fast internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_line("usage", e.what());
        return 2;
    }

    try {
        if (*nb) return run_campaign_command(nb_opts, SchemeKind::proposed);
        if (*wb) return run_campaign_command(wb_opts, SchemeKind::wideband);

        if (*cmp) {
            const ExperimentConfig base = cmp_opts.base(SchemeKind::proposed);
            std::vector<ExperimentConfig> configs;
            for (const std::string& p : split(cmp_presets)) {
                ExperimentConfig c = base;
                apply_preset(c, p);
                for (auto& s : cmp_opts.sweep(c)) configs.push_back(s);
            }
            for (const auto& cfg : configs) cfg.validate();
            const auto reports = run_campaign(configs);
            cmp_opts.write(reports);
            const ComparisonTable table = compare(reports, configs);
            if (!cmp_table.empty()) {
                std::ofstream t(cmp_table);
                if (!t) throw Error(ErrorKind::io, "cannot write " + cmp_table, "table");
                write_comparison(t, table);
            } else if (cmp_opts.out != "-") {
                write_comparison(std::cout, table);
            }
            return 0;
        }

        if (*alloc) {
            const UpaGeometry geom{alloc_mv, alloc_mh, 0.5, 0.5};
            const std::vector<int> p_set = int_list(alloc_paths, "paths");
            const auto print = [](const AllocationChoice& c) {
                std::cout << c.alloc.n_beams() << ",\"";
                for (std::size_t i = 0; i < c.alloc.bits_per_beam.size(); ++i)
                    std::cout << (i ? "," : "") << c.alloc.bits_per_beam[i];
                std::printf("\",%d,%.6f\n", c.alloc.b_c, c.objective);
            };
            std::cout << "n_beams,bits_per_beam,b_c,expected_gain\n";
            if (alloc_all) {
                for (const auto& c : enumerate_allocations(geom, alloc_bits, p_set)) print(c);
            } else {
                print(allocate_feedback(geom, alloc_bits, p_set));
            }
            return 0;
        }

        if (*an) {
            if (an_table2) {
                print_table2(std::cout);
                return 0;
            }
            if (an_wideband) {
                WidebandGrid grid{an_tones, 15e3, 2e9, an_l, an_r};
                std::cout << "wideband_bits," << wideband_overhead(grid, an_w1, an_w2, an_n1) << '\n';
                return 0;
            }
            const UpaGeometry geom{an_mv, an_mh, 0.5, 0.5};
            FeedbackAllocation a;
            a.bits_per_beam = int_list(an_bits.empty() ? "4" : an_bits, "bits");
            a.b_c = an_bc;
            if (!an_codebook.empty()) {
                const CMatrix r = analytic_covariance(geom, a.n_beams(), a.bits_per_beam, an_p);
                const CombinerCodebook cb = combiner_codebook(r, a.n_beams(), a.b_c);
                std::ofstream file(an_codebook);
                if (!file) throw Error(ErrorKind::io, "cannot write " + an_codebook, "codebook");
                write_codebook(file, cb.codewords, "combiner codebook");
                if (!file) throw Error(ErrorKind::io, "write failed for " + an_codebook, "codebook");
            }
            const ExpectedGain g = expected_gain(geom, an_p, a);
            std::printf("quantity,value\n");
            for (std::size_t n = 0; n < a.bits_per_beam.size(); ++n) {
                std::printf("gamma_sq_v[%zu],%.6f\n", n + 1, gamma_sq(an_mv, a.bits_per_beam[n]));
                std::printf("gamma_sq_h[%zu],%.6f\n", n + 1, gamma_sq(an_mh, a.bits_per_beam[n]));
            }
            std::printf("g_bq,%.6f\ng_bc,%.6f\ng_total,%.6f\n", g.g_bq, g.g_bc, g.total);
            if (g.combiner_approximate) std::printf("# g_bc uses the per-phase grid model for N >= 3\n");
            return 0;
        }

        if (*st) {
            int failures = 0;
            const auto check = [&](const char* name, bool ok) {
                std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
                failures += ok ? 0 : 1;
            };
            check("budget prop-n-i", complexity_budget(Scheme::proposed, {5, 4, 2}).vector_evaluations == 3072);
            check("budget kp", complexity_budget(Scheme::kp, {11}).feedback_bits == 22);
            check("wideband overhead", wideband_overhead({600, 15e3, 2e9, 4, 2}, 5, 5, 3) == 136);

            const UpaGeometry geom{4, 4, 0.5, 0.5};
            const ProposedConfig cfg{4, 4, 3, 2};
            const ProposedQuantizer q(geom, cfg);
            bool round_trip = true;
            for (std::uint64_t s = 0; s < 20; ++s) {
                const CVector h = narrowband_channel(geom, sample_paths(3, s));
                const Codeword c = q.quantize(h);
                round_trip = round_trip && decode_payload(c.payload, cfg) == c.indices &&
                             encode_payload(c.indices, cfg) == c.payload &&
                             (reconstruct_codeword(c.indices, geom, cfg, q.combiners()) - c.vector).norm() < 1e-9;
            }
            check("payload round trip", round_trip);

            ExperimentConfig e;
            e.trials = 64;
            e.seed = 7;
            e.timing = false;
            e.threads = 1;
            const GainReport serial = run_trials(e);
            e.threads = 4;
            check("seed determinism", run_trials(e) == serial);
            return failures == 0 ? 0 : 1;
        }
    } catch (const Error& e) {
        error_line(std::string(to_string(e.kind())), e.what(), e.field());
        return 1;
    } catch (const std::exception& e) {
        error_line("internal", e.what());
        return 1;
    }
    return 0;
}
