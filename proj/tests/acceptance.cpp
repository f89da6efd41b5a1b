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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: padp_acceptance [criterion ...]   (default: all)

#include "padp/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <thread>
#include <unistd.h>

using namespace padp;
namespace fs = std::filesystem;

namespace
{
    const SounderConstants C;
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string fmt(const char *f, auto... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof(buf), f, args...);
        return buf;
    }

    // ---------------------------------------------------------------------------------------------

    Outcome friis_point()
    {
        const double p = friis_power(-10.0, 17.0, 17.0, 2.0, 28e9);
        return {std::abs(p - (-43.4)) <= 0.05, fmt("P_RX = %.4f dBm", p)};
    }

    Outcome grid_counts()
    {
        const auto g = default_grid();
        const auto seq = scan_order(g);
        std::size_t m = 0, k = 0;
        for (const auto &e : seq)
            (e.is_reference() ? k : m)++;
        const bool ok = g.channel_count() == 3249 && g.reference_count() == 12 && m == 3249 && k == 12 && seq.size() == 3261;
        return {ok, fmt("M = %zu, K = %zu, total %zu", m, k, seq.size())};
    }

    Outcome los_bin()
    {
        ScenarioConfig cfg;
        const auto truth = generate_scenario(cfg);
        RandomStream rng(cfg.seed, StreamTag::noise);
        const auto peaks = extract_peaks(synthesize_pdp(truth, default_grid().reference, 0.0, cfg, C, rng), {}, C.delay_bin_ns());
        if (peaks.empty())
            return {false, "no peaks"};
        const auto best = *std::max_element(peaks.begin(), peaks.end(), [](const auto &a, const auto &b)
                                            { return a.power_dbm < b.power_dbm; });
        const double friis = friis_power(C.tx_power_dbm, C.boresight_gain_dbi, C.boresight_gain_dbi, 2.0, C.carrier_hz);
        const bool ok = best.delay_bin == 10 && std::abs(best.delay_ns - 6.51) < 0.005 && std::abs(best.power_dbm - friis) <= 1.5;
        return {ok, fmt("strongest peak bin %d (%.3f ns), %.2f dBm vs Friis %.2f dBm", best.delay_bin, best.delay_ns, best.power_dbm, friis)};
    }

    // ---------------------------------------------------------------------------------------------

    void enumerate(const CostMatrix &c, std::size_t i, std::vector<char> &used, std::size_t n, double cost,
                   std::pair<std::size_t, double> &best)
    {
        if (i == c.rows)
        {
            if (n > best.first || (n == best.first && cost < best.second))
                best = {n, cost};
            return;
        }
        enumerate(c, i + 1, used, n, cost, best);
        for (std::size_t j = 0; j < c.cols; ++j)
            if (!used[j] && c.is_feasible(i, j))
            {
                used[j] = 1;
                enumerate(c, i + 1, used, n + 1, cost + c.at(i, j), best);
                used[j] = 0;
            }
    }

    Outcome hungarian_oracle()
    {
        RandomStream rng(2024, StreamTag::scenario);
        std::size_t mismatches = 0, rectangular = 0, partial = 0;
        for (int t = 0; t < 1000; ++t)
        {
            const std::size_t n = 1 + rng.below(6), m = 1 + rng.below(6);
            CostMatrix c(n, m);
            const double p_infeasible = t % 4 == 0 ? 0.0 : rng.uniform() * 0.6;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                {
                    c.at(i, j) = double(rng.below(1000)); // integer costs: sums are exact in any order
                    if (rng.uniform() < p_infeasible)
                        c.set_infeasible(i, j);
                }
            rectangular += n != m;
            partial += std::count(c.feasible.begin(), c.feasible.end(), 0) > 0;
            std::pair<std::size_t, double> best{0, 0.0};
            std::vector<char> used(m, 0);
            enumerate(c, 0, used, 0, 0.0, best);
            const auto a = solve_assignment(c);
            mismatches += a.pairs.size() != best.first || a.total_cost != best.second;
        }
        return {mismatches == 0, fmt("%zu/1000 mismatches (%zu rectangular, %zu partially infeasible)", mismatches, rectangular, partial)};
    }

    // ---------------------------------------------------------------------------------------------

    Outcome correction_bound()
    {
        std::size_t peaks = 0, moved = 0, out_of_range = 0, not_idempotent = 0;
        for (std::uint64_t seed = 1; seed <= 2; ++seed)
        {
            PipelineConfig cfg;
            cfg.apply_seed(seed);
            const auto sim = simulate(cfg, threads);
            for (const auto *c : {&sim.sicl, &sim.secl})
            {
                const auto r = correct(campaign_peaks(c->campaign, cfg, std::nullopt, threads),
                                       c == &sim.sicl ? Stage::cdedar : Stage::ccd_cdedar, cfg.cdedar, cfg.ccd);
                for (const auto &row : r.table.peaks)
                    for (const auto &p : row)
                    {
                        const int d = p.ccd_bin - p.corrected_bin;
                        ++peaks;
                        moved += d != 0;
                        out_of_range += d < 0 || d > 2;
                    }
                auto again = r.table;
                const auto st = apply_cdedar(again, cfg.cdedar);
                not_idempotent += st.moves != 0 || !(again == r.table);
            }
        }
        return {out_of_range == 0 && not_idempotent == 0,
                fmt("%zu peaks over 4 campaigns, %zu moved, %zu changes outside {0,1,2}, %zu non-idempotent runs", peaks, moved,
                    out_of_range, not_idempotent)};
    }

    Outcome sicl_identity()
    {
        PipelineConfig cfg;
        const auto sim = simulate(cfg, threads);
        const auto peaks = campaign_peaks(sim.sicl.campaign, cfg, std::nullopt, threads);
        const auto r = correct(peaks, Stage::ccd, cfg.cdedar, cfg.ccd);
        std::size_t changed = 0, total = 0;
        for (std::size_t k = 0; k < peaks.peaks.size(); ++k)
            for (std::size_t i = 0; i < peaks.peaks[k].size(); ++i)
            {
                const auto &p = r.table.peaks[k][i];
                ++total;
                changed += p.ccd_bin != peaks.peaks[k][i].delay_bin || p.power_dbm != peaks.peaks[k][i].power_dbm;
            }
        return {changed == 0 && total > 0, fmt("%zu of %zu peak delays changed", changed, total)};
    }

    // ---------------------------------------------------------------------------------------------

    // Measurements whose drift estimate is within one bin of the simulated drift
    std::pair<std::size_t, std::size_t> drift_hits(const ClockModel &clock, std::uint64_t seed, double &worst)
    {
        ScenarioConfig sc;
        sc.seed = seed;
        const auto grid = default_grid();
        const auto truth = generate_scenario(sc, grid, C);
        const auto secl = run_campaign(truth, grid, C, clock, sc, "SECL", threads);
        const auto table = extract_campaign_peaks(secl.campaign, {}, nullptr, threads);
        const auto track = track_reference_drift(table);
        std::size_t ok = 0;
        for (std::size_t k = 0; k < table.entries.size(); ++k)
        {
            const double err = std::abs(track.estimate[k] - secl.drift_ns[k] / C.delay_bin_ns());
            worst = std::max(worst, err);
            ok += err <= 1.0;
        }
        return {ok, table.entries.size()};
    }

    Outcome drift_recovery()
    {
        // piecewise-linear drift with a knot at every reference position
        RandomStream rng(77, StreamTag::drift);
        ClockModel pw;
        pw.mode = ClockMode::piecewise_linear;
        double level = 0.0;
        for (const auto &e : scan_order(default_grid()))
            if (e.is_reference())
            {
                pw.knots.push_back({double(e.sequence), level});
                level += rng.uniform(-3.0, 3.0); // ns per reference interval, ~18 ns/hour scale
            }
        double worst_pw = 0.0;
        const auto [pw_ok, pw_n] = drift_hits(pw, 1, worst_pw);

        std::size_t ok = 0, n = 0;
        double worst_rw = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
        {
            auto clock = random_walk_clock();
            clock.seed = seed;
            const auto [a, b] = drift_hits(clock, seed, worst_rw);
            ok += a;
            n += b;
        }
        const double frac = double(ok) / double(n);
        return {worst_pw <= 1.0 && frac >= 0.90,
                fmt("piecewise: max error %.3f bins (%zu/%zu within 1); random walk: %.2f%% within 1 bin over 20 seeds (max %.3f)",
                    worst_pw, pw_ok, pw_n, 100.0 * frac, worst_rw)};
    }

    // ---------------------------------------------------------------------------------------------

    struct TrendRun
    {
        double lever = 0.0;
        std::size_t paths = 0;
        std::size_t target_mpcs = 0;
        std::vector<MatchReport> reports; // raw, ccd, ccd+cdedar
    };

    std::vector<TrendRun> trend_runs(NoiseMode noise)
    {
        std::vector<TrendRun> out;
        for (std::uint64_t s = 1; s <= 20; ++s)
        {
            PipelineConfig cfg;
            cfg.apply_seed(s);
            cfg.scenario.lever_arm_m = 0.10 + 0.005 * double(s - 1);
            cfg.scenario.n_paths = 50 + (150 * (s - 1)) / 19;
            cfg.scenario.noise = noise;
            const auto sim = simulate(cfg, threads);
            const auto target = run_stage(campaign_peaks(sim.sicl.campaign, cfg, std::nullopt, threads), target_stage, cfg, target_label).mpcs;
            const auto source = campaign_peaks(sim.secl.campaign, cfg, std::nullopt, threads);
            TrendRun r{cfg.scenario.lever_arm_m, cfg.scenario.n_paths, target.mpcs.size(), {}};
            for (Stage st : {Stage::raw, Stage::ccd, Stage::ccd_cdedar})
                r.reports.push_back(match_mpcs(target, run_stage(source, st, cfg, source_label).mpcs, cfg.match));
            out.push_back(std::move(r));
        }
        return out;
    }

    std::vector<TrendRun> &random_noise_runs()
    {
        static auto runs = trend_runs(NoiseMode::random);
        return runs;
    }

    Outcome table_iv_trend()
    {
        const auto &runs = random_noise_runs();
        std::size_t trend = 0, power_up = 0, power_trend = 0;
        double gain = 0.0, raw = 0.0, full = 0.0, praw = 0.0, pfull = 0.0;
        for (const auto &r : runs)
        {
            const auto &m = r.reports;
            trend += m[0].matched_pct < m[1].matched_pct && m[1].matched_pct < m[2].matched_pct;
            power_up += m[2].matched_power_pct_target > m[0].matched_power_pct_target;
            power_trend += m[0].matched_power_pct_target < m[1].matched_power_pct_target &&
                           m[1].matched_power_pct_target < m[2].matched_power_pct_target;
            gain += m[2].matched_pct - m[0].matched_pct;
            raw += m[0].matched_pct;
            full += m[2].matched_pct;
            praw += m[0].matched_power_pct_target;
            pfull += m[2].matched_power_pct_target;
        }
        const double n = double(runs.size());
        gain /= n;
        const bool ok = trend >= 18 && gain >= 25.0 && power_up >= 18;
        return {ok, fmt("strict trend %zu/20, mean gain %.2f pts (raw %.2f%% -> full %.2f%%); matched power %.2f%% -> %.2f%%, "
                        "higher in %zu/20, strictly monotone in %zu/20",
                        trend, gain, raw / n, full / n, praw / n, pfull / n, power_up, power_trend)};
    }

    Outcome match_gates()
    {
        const MatchGates g;
        std::size_t audited = 0, violations = 0;
        auto audit = [&](const std::vector<TrendRun> &runs)
        {
            for (const auto &r : runs)
                for (const auto &rep : r.reports)
                    for (const auto &p : rep.pairs)
                    {
                        ++audited;
                        bool ok = p.error[4] < g.delay_ns && p.error[5] < g.gain_db;
                        for (std::size_t l = 0; l < 4; ++l)
                            ok = ok && p.error[l] < g.angle_deg;
                        violations += !ok;
                    }
        };
        audit(random_noise_runs());
        const auto controlled = trend_runs(NoiseMode::constant);
        audit(controlled);

        std::size_t pairs = 0, concentrated = 0;
        for (const auto &r : controlled)
            for (const auto &p : r.reports.back().pairs)
            {
                ++pairs;
                concentrated += std::lround(p.error[4] / C.delay_bin_ns()) <= 1 && p.error[5] <= 2.0;
            }
        const double frac = pairs ? double(concentrated) / double(pairs) : 0.0;
        return {violations == 0 && frac >= 0.80,
                fmt("%zu gate violations in %zu audited pairs; %.2f%% of fully corrected pairs within 1 bin and 2 dB "
                    "(noise-controlled)",
                    violations, audited, 100.0 * frac)};
    }

    // ---------------------------------------------------------------------------------------------

    bool within_one_step(const std::vector<double> &axis, double a, double b, bool circular)
    {
        const auto ia = std::find(axis.begin(), axis.end(), a) - axis.begin();
        const auto ib = std::find(axis.begin(), axis.end(), b) - axis.begin();
        long d = std::abs(long(ia - ib));
        if (circular)
            d = std::min(d, long(axis.size()) - d);
        return d <= 1;
    }

    bool near_path(const Mpc &path, const Mpc &m, const ScanGrid &g)
    {
        return std::abs(path.delay_bin - m.delay_bin) <= 2 && within_one_step(g.tx_az, path.aod_az, m.aod_az, true) &&
               within_one_step(g.tx_el, path.aod_el, m.aod_el, false) && within_one_step(g.rx_az, path.aoa_az, m.aoa_az, true) &&
               within_one_step(g.rx_el, path.aoa_el, m.aoa_el, false);
    }

    Outcome ghost_oracle()
    {
        std::size_t ghosts = 0, mpcs = 0, low_recall = 0;
        std::string per_seed;
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
        {
            PipelineConfig cfg;
            cfg.apply_seed(seed);
            cfg.scenario.noise = NoiseMode::constant;
            const auto truth = generate_scenario(cfg.scenario, cfg.grid, C);
            const auto secl = run_campaign(truth, cfg.grid, C, cfg.secl_clock, cfg.scenario, "SECL", threads);
            const auto set = run_stage(campaign_peaks(secl.campaign, cfg, std::nullopt, threads), Stage::ccd_cdedar, cfg, source_label).mpcs;
            std::size_t g = 0;
            for (const auto &e : set.mpcs)
            {
                bool ok = false;
                for (const auto &p : truth.paths)
                    ok = ok || near_path(p, e.mpc, cfg.grid);
                g += !ok;
            }
            std::size_t detectable = 0, found = 0;
            for (const auto &p : truth.paths)
            {
                if (C.tx_power_dbm + p.gain_db + 2.0 * C.boresight_gain_dbi < cfg.scenario.noise_floor_dbm + cfg.peaks.threshold_db)
                    continue;
                ++detectable;
                bool ok = false;
                for (const auto &e : set.mpcs)
                    ok = ok || near_path(p, e.mpc, cfg.grid);
                found += ok;
            }
            ghosts += g;
            mpcs += set.mpcs.size();
            low_recall += double(found) < 0.9 * double(detectable);
            per_seed += fmt(" [seed %llu: %zu ghosts, recall %zu/%zu]", (unsigned long long)seed, g, found, detectable);
        }
        return {ghosts == 0 && low_recall == 0, fmt("%zu ghosts among %zu MPCs, %zu scenarios under 90%% recall;", ghosts, mpcs, low_recall) + per_seed};
    }

    // ---------------------------------------------------------------------------------------------

    Outcome determinism()
    {
        const fs::path dir = fs::temp_directory_path() / ("padp_acceptance_" + std::to_string(::getpid()));
        PipelineConfig cfg;
        cfg.apply_seed(11);
        std::vector<nlohmann::json> inventories;
        std::string counts;
        for (unsigned t : {1u, 4u, 8u})
        {
            fs::remove_all(dir);
            cmd_simulate(cfg, dir, t);
            cmd_process(cfg, dir, t);
            cmd_match(cfg, dir, t);
            cmd_report(dir);
            inventories.push_back(file_inventory(dir));
            counts += fmt(" %u", t);
        }
        fs::remove_all(dir);
        bool same = true;
        for (const auto &inv : inventories)
            same = same && inv == inventories.front();
        return {same, fmt("%zu output files, hashes %s across --threads", inventories.front().size(), same ? "identical" : "DIFFER") + counts};
    }
}

int main(int argc, char **argv)
{
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"Friis point check", friis_point},
        {"grid and measurement counts", grid_counts},
        {"LOS bin and power", los_bin},
        {"Hungarian brute-force oracle", hungarian_oracle},
        {"CDEDAR change bound and idempotence", correction_bound},
        {"SICL CCD identity", sicl_identity},
        {"drift recovery", drift_recovery},
        {"end-to-end correction trend", table_iv_trend},
        {"match-quality gates", match_gates},
        {"ghost and missed-path oracle", ghost_oracle},
        {"determinism across thread counts", determinism},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const int id = int(i + 1);
        if (!selected.empty() && !selected.count(id))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d %s  %s: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
