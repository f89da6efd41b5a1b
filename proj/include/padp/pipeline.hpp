// SPDX-License-Identifier: Apache-2.0
//
// padp - post-processing for gimbal-based mmWave angular channel measurements
// Copyright (C) 2026 The padp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PADP_PIPELINE_HPP
#define PADP_PIPELINE_HPP

#include "padp/config.hpp"
#include "padp/io.hpp"
#include "padp/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace padp
{
    inline constexpr std::string_view tool_version = "0.1.0";

    // ---------------------------------------------------------------------------------------------
    // In-memory pipeline

    struct SimulationOutput
    {
        GroundTruth truth;
        SimulatedCampaign sicl;
        SimulatedCampaign secl;
        std::optional<PdpTrace> calibration; // only with a hardware response
    };

    inline SimulationOutput simulate(const PipelineConfig &cfg, unsigned threads = 1)
    {
        validate_config(cfg);
        SimulationOutput out;
        out.truth = generate_scenario(cfg.scenario, cfg.grid, cfg.constants);
        out.sicl = run_campaign(out.truth, cfg.grid, cfg.constants, cfg.sicl_clock, cfg.scenario, "SICL", threads);
        out.secl = run_campaign(out.truth, cfg.grid, cfg.constants, cfg.secl_clock, cfg.scenario, "SECL", threads);
        if (cfg.scenario.hardware)
        {
            // cable through a 20 dB attenuator, arriving a few bins after the trigger
            RandomStream rng(cfg.seed, StreamTag::calibration);
            out.calibration = synthesize_calibration_trace(*cfg.scenario.hardware, cfg.constants, cfg.constants.tx_power_dbm - 20.0,
                                                           10, cfg.scenario.noise_floor_dbm, rng, cfg.scenario.noise);
        }
        return out;
    }

    inline std::optional<EqualizerProfile> equalizer_for(const PipelineConfig &cfg, const std::optional<PdpTrace> &calibration)
    {
        if (!cfg.equalize || !calibration)
            return std::nullopt;
        return design_equalizer(*calibration, -40.0, cfg.peaks.threshold_db, cfg.peaks.exclusion_bins);
    }

    inline PeakTable campaign_peaks(const CampaignSet &campaign, const PipelineConfig &cfg,
                                    const std::optional<EqualizerProfile> &eq = std::nullopt, unsigned threads = 1)
    {
        return extract_campaign_peaks(campaign, cfg.peaks, eq ? &*eq : nullptr, threads);
    }

    struct StageOutput
    {
        Stage stage = Stage::raw;
        CorrectionResult correction;
        ExtractedMpcSet mpcs;
    };

    inline StageOutput run_stage(const PeakTable &peaks, Stage stage, const PipelineConfig &cfg, const std::string &label)
    {
        StageOutput out;
        out.stage = stage;
        // a campaign without measurements has nothing to track drift on
        const Stage effective = peaks.entries.empty() ? Stage::raw : stage;
        out.correction = correct(peaks, effective, cfg.cdedar, cfg.ccd);
        SounderConstants c = cfg.constants;
        if (peaks.pdp_len != 0)
            c.pdp_len = peaks.pdp_len;
        out.mpcs = extract_mpcs(out.correction.table, c, label + " " + to_string(stage));
        return out;
    }

    // ---------------------------------------------------------------------------------------------
    // Run directory layout

    inline std::string lower(std::string s)
    {
        for (auto &ch : s)
            ch = char(std::tolower(static_cast<unsigned char>(ch)));
        return s;
    }

    // "ccd+cdedar" is not friendly in file names
    inline std::string stage_slug(Stage s)
    {
        auto n = to_string(s);
        std::replace(n.begin(), n.end(), '+', '_');
        return n;
    }

    namespace files
    {
        namespace fs = std::filesystem;
        inline fs::path config(const fs::path &d) { return d / "config.txt"; }
        inline fs::path manifest(const fs::path &d) { return d / "manifest.json"; }
        inline fs::path truth(const fs::path &d) { return d / "ground_truth.csv"; }
        inline fs::path calibration(const fs::path &d) { return d / "calibration.txt"; }
        inline fs::path campaign(const fs::path &d, const std::string &label) { return d / ("campaign_" + lower(label) + ".txt"); }
        inline fs::path drift(const fs::path &d, const std::string &label) { return d / ("drift_" + lower(label) + ".csv"); }
        inline fs::path peaks(const fs::path &d, const std::string &label) { return d / ("peaks_" + lower(label) + ".csv"); }
        inline fs::path corrected(const fs::path &d, const std::string &label, Stage s)
        {
            return d / ("peaks_" + lower(label) + "_" + stage_slug(s) + ".csv");
        }
        inline fs::path changes(const fs::path &d, const std::string &label, Stage s)
        {
            return d / ("changes_" + lower(label) + "_" + stage_slug(s) + ".csv");
        }
        inline fs::path drift_track(const fs::path &d, const std::string &label) { return d / ("drift_track_" + lower(label) + ".csv"); }
        inline fs::path mpcs(const fs::path &d, const std::string &label, Stage s)
        {
            return d / ("mpcs_" + lower(label) + "_" + stage_slug(s) + ".csv");
        }
        inline fs::path match(const fs::path &d, const std::string &stem) { return d / ("match_" + stem + ".json"); }
        inline fs::path histograms(const fs::path &d, const std::string &stem) { return d / ("histograms_" + stem + ".csv"); }
        inline fs::path match_table(const fs::path &d) { return d / "match_table.txt"; }
        inline fs::path report(const fs::path &d) { return d / "report.txt"; }
        inline fs::path plot_drift(const fs::path &d) { return d / "plot_drift.csv"; }
        inline fs::path plot_scatter(const fs::path &d, const std::string &stem) { return d / ("plot_scatter_" + stem + ".csv"); }
    }

    // The target set is SICL after CDEDAR; the three SECL stages are matched against it
    inline constexpr const char *target_label = "SICL";
    inline constexpr const char *source_label = "SECL";
    inline constexpr Stage target_stage = Stage::cdedar;

    // ---------------------------------------------------------------------------------------------
    // Manifest

    // Output inventory: every regular file in the run directory except the manifest itself
    inline nlohmann::json file_inventory(const std::filesystem::path &dir)
    {
        std::vector<std::filesystem::path> paths;
        for (const auto &e : std::filesystem::directory_iterator(dir))
            if (e.is_regular_file() && e.path().filename() != "manifest.json" &&
                e.path().filename().string().find(".tmp.") == std::string::npos)
                paths.push_back(e.path());
        std::sort(paths.begin(), paths.end());
        nlohmann::json inv = nlohmann::json::object();
        for (const auto &p : paths)
        {
            const auto data = read_file(p);
            inv[p.filename().string()] = {{"bytes", data.size()}, {"fnv1a64", hex64(fnv1a64(data))}};
        }
        return inv;
    }

    // Merges this command's record into the manifest and refreshes the inventory
    inline void update_manifest(const std::filesystem::path &dir, const PipelineConfig &cfg, const std::string &command,
                                const std::map<std::string, double> &seconds)
    {
        nlohmann::json m = nlohmann::json::object();
        const auto path = files::manifest(dir);
        if (std::filesystem::exists(path))
        {
            try
            {
                m = nlohmann::json::parse(read_file(path));
            }
            catch (const nlohmann::json::exception &)
            {
                m = nlohmann::json::object(); // rebuilt below
            }
        }
        m["tool"] = "padp";
        m["version"] = std::string(tool_version);
        m["config_hash"] = hex64(fnv1a64(canonical_config(cfg)));
        m["seeds"] = {{"seed", cfg.seed}, {"scenario", cfg.scenario.seed}, {"drift", cfg.secl_clock.seed}, {"noise", cfg.scenario.seed}};
        nlohmann::json stages = nlohmann::json::array();
        for (auto s : cfg.stages)
            stages.push_back(to_string(s));
        m["stages"] = stages;
        if (!m.contains("commands") || !m["commands"].is_array())
            m["commands"] = nlohmann::json::array();
        if (std::find(m["commands"].begin(), m["commands"].end(), command) == m["commands"].end())
            m["commands"].push_back(command);
        if (!m.contains("wall_clock_s") || !m["wall_clock_s"].is_object())
            m["wall_clock_s"] = nlohmann::json::object();
        for (const auto &[k, v] : seconds)
            m["wall_clock_s"][k] = v;
        m["files"] = file_inventory(dir);
        write_file_atomic(path, m.dump(2) + "\n");
    }

    class StageTimer
    {
    public:
        explicit StageTimer(std::map<std::string, double> &sink, std::string name) : sink_(sink), name_(std::move(name)) {}
        ~StageTimer()
        {
            sink_[name_] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        }

    private:
        std::map<std::string, double> &sink_;
        std::string name_;
        std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
    };

    inline CampaignSet load_campaign(const std::filesystem::path &p)
    {
        std::ifstream in(p);
        if (!in)
            throw DataError("cannot open campaign file '" + p.string() + "'");
        return read_campaign(in, p.filename().string());
    }

    inline ExtractedMpcSet load_mpcs(const std::filesystem::path &p)
    {
        std::ifstream in(p);
        if (!in)
            throw DataError("cannot open MPC file '" + p.string() + "'");
        return read_mpcs(in, p.filename().string());
    }

    // Config of an existing run, falling back to defaults
    inline PipelineConfig run_config(const std::filesystem::path &dir)
    {
        return std::filesystem::exists(files::config(dir)) ? load_config(files::config(dir)) : PipelineConfig{};
    }

    // ---------------------------------------------------------------------------------------------
    // Commands

    // Ground truth, SICL and SECL campaigns, the simulator drift audit and, with a hardware
    // response, the calibration-cable trace
    inline void cmd_simulate(const PipelineConfig &cfg, const std::filesystem::path &dir, unsigned threads = 1)
    {
        std::map<std::string, double> t;
        SimulationOutput sim;
        {
            StageTimer timer(t, "simulate");
            sim = simulate(cfg, threads);
        }
        StageTimer timer(t, "simulate_write");
        std::filesystem::create_directories(dir);
        write_file_atomic(files::config(dir), canonical_config(cfg));
        write_file_atomic(files::truth(dir), to_text([&](std::ostream &o) { write_ground_truth(o, sim.truth); }));
        for (const auto *c : {&sim.sicl, &sim.secl})
        {
            write_file_atomic(files::campaign(dir, c->campaign.label), to_text([&](std::ostream &o) { write_campaign(o, c->campaign); }));
            write_file_atomic(files::drift(dir, c->campaign.label), to_text([&](std::ostream &o) { write_drift(o, c->campaign, c->drift_ns); }));
        }
        if (sim.calibration)
        {
            CampaignSet cal;
            cal.label = "calibration";
            cal.constants = cfg.constants;
            cal.grid = cfg.grid;
            Measurement m;
            m.entry.channel = 0;
            m.trace = *sim.calibration;
            cal.measurements.push_back(m);
            write_file_atomic(files::calibration(dir), to_text([&](std::ostream &o) { write_campaign(o, cal); }));
        }
        else
            std::filesystem::remove(files::calibration(dir));
        update_manifest(dir, cfg, "simulate", t);
    }

    struct ProcessSummary
    {
        std::vector<std::filesystem::path> mpc_files;
    };

    inline void write_stage_outputs(const std::filesystem::path &dir, const std::string &label, const StageOutput &s)
    {
        write_file_atomic(files::corrected(dir, label, s.stage),
                          to_text([&](std::ostream &o) { write_peaks(o, flatten(s.correction.table)); }));
        write_file_atomic(files::changes(dir, label, s.stage),
                          to_text([&](std::ostream &o) { write_change_ledger(o, s.correction.table); }));
        write_file_atomic(files::mpcs(dir, label, s.stage), to_text([&](std::ostream &o) { write_mpcs(o, s.mpcs); }));
        if (s.correction.track)
            write_file_atomic(files::drift_track(dir, label),
                              to_text([&](std::ostream &o) { write_drift_track(o, *s.correction.track, s.correction.table.delay_bin_ns); }));
    }

    // Processes one campaign through the given stages and writes its outputs
    inline ProcessSummary process_campaign_file(const std::filesystem::path &campaign_path, const std::vector<Stage> &stages,
                                                const PipelineConfig &cfg, const std::filesystem::path &dir,
                                                std::map<std::string, double> &t, unsigned threads = 1)
    {
        const auto campaign = load_campaign(campaign_path);
        const std::string label = campaign.label.empty() ? campaign_path.stem().string() : campaign.label;

        std::optional<PdpTrace> cal;
        if (cfg.equalize && std::filesystem::exists(files::calibration(campaign_path.parent_path())))
        {
            const auto c = load_campaign(files::calibration(campaign_path.parent_path()));
            if (c.measurements.size() != 1)
                throw DataError("calibration file must hold exactly one trace");
            cal = c.measurements.front().trace;
        }

        PeakTable peaks;
        {
            StageTimer timer(t, "peaks " + lower(label));
            const auto eq = equalizer_for(cfg, cal);
            peaks = campaign_peaks(campaign, cfg, eq, threads);
        }
        write_file_atomic(files::peaks(dir, label), to_text([&](std::ostream &o) { write_peaks(o, flatten(peaks)); }));

        ProcessSummary summary;
        std::vector<StageOutput> outputs(stages.size());
        {
            StageTimer timer(t, "correct+extract " + lower(label));
            parallel_for(stages.size(), threads, [&](std::size_t i)
                         { outputs[i] = run_stage(peaks, stages[i], cfg, label); });
        }
        for (const auto &s : outputs)
        {
            write_stage_outputs(dir, label, s);
            summary.mpc_files.push_back(files::mpcs(dir, label, s.stage));
        }
        return summary;
    }

    // Default: SICL through CDEDAR (the matching target) and SECL through the configured stages.
    // With explicit campaign files, each goes through the configured stages.
    inline ProcessSummary cmd_process(const PipelineConfig &cfg, const std::filesystem::path &dir, unsigned threads = 1,
                                      const std::vector<std::filesystem::path> &campaigns = {})
    {
        validate_config(cfg);
        std::map<std::string, double> t;
        ProcessSummary out;
        auto append = [&](const ProcessSummary &s)
        { out.mpc_files.insert(out.mpc_files.end(), s.mpc_files.begin(), s.mpc_files.end()); };
        if (campaigns.empty())
        {
            const auto sicl = files::campaign(dir, target_label), secl = files::campaign(dir, source_label);
            if (!std::filesystem::exists(sicl) && !std::filesystem::exists(secl))
                throw DataError("no campaign files in '" + dir.string() + "' (run simulate first or pass --campaign)");
            if (std::filesystem::exists(sicl))
                append(process_campaign_file(sicl, {target_stage}, cfg, dir, t, threads));
            if (std::filesystem::exists(secl))
                append(process_campaign_file(secl, cfg.stages, cfg, dir, t, threads));
        }
        else
        {
            std::filesystem::create_directories(dir);
            for (const auto &c : campaigns)
                append(process_campaign_file(c, cfg.stages, cfg, dir, t, threads));
        }
        update_manifest(dir, cfg, "process", t);
        return out;
    }

    struct MatchJob
    {
        std::filesystem::path target;
        std::filesystem::path source;
        std::string stem; // output name suffix
    };

    inline std::vector<MatchReport> cmd_match(const PipelineConfig &cfg, const std::filesystem::path &dir, unsigned threads = 1,
                                              std::vector<MatchJob> jobs = {})
    {
        validate_config(cfg);
        std::map<std::string, double> t;
        if (jobs.empty())
        {
            const auto target = files::mpcs(dir, target_label, target_stage);
            if (!std::filesystem::exists(target))
                throw DataError("target MPC file '" + target.string() + "' not found (run process first)");
            for (auto s : cfg.stages)
            {
                const auto src = files::mpcs(dir, source_label, s);
                if (std::filesystem::exists(src))
                    jobs.push_back({target, src, stage_slug(s)});
            }
            if (jobs.empty())
                throw DataError("no source MPC files in '" + dir.string() + "'");
        }

        std::vector<MatchReport> reports(jobs.size());
        {
            StageTimer timer(t, "match");
            parallel_for(jobs.size(), threads, [&](std::size_t i)
                         { reports[i] = match_mpcs(load_mpcs(jobs[i].target), load_mpcs(jobs[i].source), cfg.match); });
        }
        std::filesystem::create_directories(dir);
        for (std::size_t i = 0; i < jobs.size(); ++i)
        {
            write_file_atomic(files::match(dir, jobs[i].stem), to_json(reports[i]).dump(2) + "\n");
            write_file_atomic(files::histograms(dir, jobs[i].stem), format_error_histograms(reports[i], cfg.constants.delay_bin_ns()));
        }
        write_file_atomic(files::match_table(dir), format_match_table(reports));
        update_manifest(dir, cfg, "match", t);
        return reports;
    }

    namespace detail
    {
        // Rows of a versioned CSV after the column header
        inline std::vector<std::vector<std::string>> csv_rows(const std::filesystem::path &p, std::string_view magic)
        {
            std::ifstream in(p);
            if (!in)
                throw DataError("cannot open '" + p.string() + "'");
            auto lines = expect_magic(in, magic, p.filename().string());
            std::vector<std::vector<std::string>> rows;
            for (std::size_t i = 1; i < lines.size(); ++i)
            {
                if (lines[i].empty() || lines[i][0] == '#')
                    continue;
                std::vector<std::string> r;
                for (auto f : split(lines[i], ','))
                    r.emplace_back(f);
                rows.push_back(std::move(r));
            }
            return rows;
        }
    }

    // Consolidated report plus plot data. Missing pieces are marked, not fatal, unless the
    // directory holds no run outputs at all.
    inline std::string cmd_report(const std::filesystem::path &dir)
    {
        if (!std::filesystem::is_directory(dir))
            throw DataError("run directory '" + dir.string() + "' does not exist");
        bool any = false;
        for (const auto &e : std::filesystem::directory_iterator(dir))
            any = any || e.is_regular_file();
        if (!any)
            throw DataError("run directory '" + dir.string() + "' is empty");

        const auto cfg = run_config(dir);
        const auto start = std::chrono::steady_clock::now();
        std::ostringstream r;
        r << "padp run report\n"
          << "directory: " << dir.string() << '\n'
          << "config hash: " << hex64(fnv1a64(canonical_config(cfg))) << '\n'
          << "seed: " << cfg.seed << "\n\n";

        // matching summary in stage order
        r << "MPC matching against " << target_label << " + " << to_string(target_stage) << '\n';
        std::vector<MatchReport> found;
        for (auto s : cfg.stages)
        {
            const auto p = files::match(dir, stage_slug(s));
            if (!std::filesystem::exists(p))
            {
                r << "  " << source_label << " " << to_string(s) << ": stage missing\n";
                continue;
            }
            try
            {
                found.push_back(match_report_from_json(nlohmann::json::parse(read_file(p))));
            }
            catch (const nlohmann::json::exception &e)
            {
                throw DataError(p.filename().string() + ": " + e.what());
            }
        }
        if (!found.empty())
            r << format_match_table(found);
        r << '\n';

        // MPC counts per stage
        r << "extracted MPCs\n";
        auto count_line = [&](const std::string &label, Stage s)
        {
            const auto p = files::mpcs(dir, label, s);
            r << "  " << label << " " << to_string(s) << ": ";
            if (!std::filesystem::exists(p))
            {
                r << "stage missing\n";
                return;
            }
            const auto set = load_mpcs(p);
            r << set.mpcs.size() << " MPCs";
            if (set.dropped_below_limit)
                r << " (" << set.dropped_below_limit << " below the path-loss limit dropped)";
            r << '\n';

            std::ostringstream scatter;
            scatter << "delay_ns,gain_db,aod_az,aod_el,aoa_az,aoa_el\n";
            for (const auto &e : set.mpcs)
                scatter << format_double(e.mpc.delay_ns) << ',' << format_double(e.mpc.gain_db) << ',' << format_double(e.mpc.aod_az)
                        << ',' << format_double(e.mpc.aod_el) << ',' << format_double(e.mpc.aoa_az) << ','
                        << format_double(e.mpc.aoa_el) << '\n';
            write_file_atomic(files::plot_scatter(dir, lower(label) + "_" + stage_slug(s)), scatter.str());
        };
        count_line(target_label, target_stage);
        for (auto s : cfg.stages)
            count_line(source_label, s);
        r << '\n';

        // drift: reference estimates next to the simulated drift where available
        r << "clock drift (" << source_label << ")\n";
        const auto track_path = files::drift_track(dir, source_label);
        if (!std::filesystem::exists(track_path))
            r << "  drift track missing\n";
        else
        {
            std::map<std::string, std::string> truth_by_seq;
            const auto truth_path = files::drift(dir, source_label);
            if (std::filesystem::exists(truth_path))
                for (const auto &row : detail::csv_rows(truth_path, drift_magic))
                    if (row.size() == 5)
                        truth_by_seq[row[0]] = row[3];
            std::ostringstream plot;
            plot << "k,sequence,d_ref_bins,d_ref_ns,true_drift_ns\n";
            int max_abs = 0;
            const auto rows = detail::csv_rows(track_path, drift_track_magic);
            for (const auto &row : rows)
            {
                if (row.size() != 5)
                    throw DataError(track_path.filename().string() + ": expected 5 columns");
                const auto it = truth_by_seq.find(row[1]);
                plot << row[0] << ',' << row[1] << ',' << row[3] << ',' << row[4] << ','
                     << (it == truth_by_seq.end() ? std::string() : it->second) << '\n';
                max_abs = std::max(max_abs, std::abs(parse_int<int>(row[3], track_path.filename().string())));
            }
            write_file_atomic(files::plot_drift(dir), plot.str());
            r << "  " << rows.size() << " references, max |d_ref| = " << max_abs << " bins ("
              << format_double(max_abs * cfg.constants.delay_bin_ns()) << " ns)\n";
        }
        r << '\n';

        r << "plot data\n";
        std::vector<std::string> plots;
        for (const auto &e : std::filesystem::directory_iterator(dir))
        {
            const auto n = e.path().filename().string();
            if (e.is_regular_file() && (n.rfind("plot_", 0) == 0 || n.rfind("histograms_", 0) == 0))
                plots.push_back(n);
        }
        std::sort(plots.begin(), plots.end());
        for (const auto &n : plots)
            r << "  " << n << '\n';
        if (plots.empty())
            r << "  none\n";

        const auto text = r.str();
        write_file_atomic(files::report(dir), text);
        update_manifest(dir, cfg, "report", {{"report", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}});
        return text;
    }
}

#endif
