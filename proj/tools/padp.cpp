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

// padp command line: simulate | process | match | report
// exit codes: 0 success, 2 configuration or usage error, 3 data or I/O error

#include "padp/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{
    constexpr int exit_config = 2;
    constexpr int exit_data = 3;

    struct Common
    {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::string stages;
        std::string out = "run";
        unsigned threads = 1;
    };

    // --config wins, then the run directory's own config, then defaults
    padp::PipelineConfig resolve_config(const Common &c, bool from_run_dir)
    {
        padp::PipelineConfig cfg;
        if (!c.config.empty())
            cfg = padp::load_config(c.config);
        else if (from_run_dir)
            cfg = padp::run_config(c.out);
        if (c.seed)
            cfg.apply_seed(*c.seed);
        if (!c.stages.empty())
            padp::set_config_value(cfg, "process.stages", c.stages);
        padp::validate_config(cfg);
        return cfg;
    }

    std::string mpc_stem(const std::filesystem::path &p)
    {
        auto s = p.stem().string();
        if (s.rfind("mpcs_", 0) == 0)
            s = s.substr(5);
        return s;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"padp: mmWave angular channel measurement post-processing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(padp::tool_version));

    Common c;
    std::vector<std::string> campaigns, sources;
    std::string target;

    auto add_common = [&](CLI::App *sub, bool stages)
    {
        sub->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", c.seed, "top-level seed, overrides the config");
        sub->add_option("--out", c.out, "run directory")->capture_default_str();
        sub->add_option("--threads", c.threads, "worker threads (speed only, never results)")->check(CLI::PositiveNumber);
        if (stages)
            sub->add_option("--stages", c.stages, "comma-separated subset of raw,ccd,cdedar,ccd+cdedar");
    };

    auto *sim = app.add_subcommand("simulate", "generate ground truth and SICL/SECL campaigns");
    add_common(sim, false);
    auto *proc = app.add_subcommand("process", "extract peaks, correct delays and extract MPCs");
    add_common(proc, true);
    proc->add_option("--campaign", campaigns, "campaign file(s); default: the run directory's SICL and SECL campaigns");
    auto *match = app.add_subcommand("match", "match source MPC sets against the target set");
    add_common(match, true);
    match->add_option("--target", target, "target MPC file");
    match->add_option("--source", sources, "source MPC file(s)");
    auto *report = app.add_subcommand("report", "consolidated report and plot data for a run directory");
    report->add_option("--out", c.out, "run directory")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try
    {
        if (sim->parsed())
        {
            padp::cmd_simulate(resolve_config(c, false), c.out, c.threads);
            std::cout << "simulated campaigns written to " << c.out << '\n';
        }
        else if (proc->parsed())
        {
            std::vector<std::filesystem::path> files(campaigns.begin(), campaigns.end());
            const auto summary = padp::cmd_process(resolve_config(c, true), c.out, c.threads, files);
            for (const auto &f : summary.mpc_files)
                std::cout << f.string() << '\n';
        }
        else if (match->parsed())
        {
            std::vector<padp::MatchJob> jobs;
            if (target.empty() != sources.empty())
                throw padp::ConfigError("--target and --source must be given together");
            for (const auto &s : sources)
                jobs.push_back({target, s, mpc_stem(s)});
            const auto reports = padp::cmd_match(resolve_config(c, true), c.out, c.threads, jobs);
            std::cout << padp::format_match_table(reports);
        }
        else if (report->parsed())
            std::cout << padp::cmd_report(c.out);
    }
    catch (const padp::ConfigError &e)
    {
        std::cerr << "padp: configuration error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const padp::DataError &e)
    {
        std::cerr << "padp: data error: " << e.what() << '\n';
        return exit_data;
    }
    catch (const std::filesystem::filesystem_error &e)
    {
        std::cerr << "padp: I/O error: " << e.what() << '\n';
        return exit_data;
    }
    return 0;
}
