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

#ifndef PADP_CONFIG_HPP
#define PADP_CONFIG_HPP

#include "padp/delay_correction.hpp"
#include "padp/error.hpp"
#include "padp/model.hpp"
#include "padp/mpc_matching.hpp"
#include "padp/pdp_processing.hpp"
#include "padp/sounder_sim.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace padp
{
    inline ClockModel random_walk_clock()
    {
        ClockModel m;
        m.mode = ClockMode::random_walk;
        return m;
    }

    // Everything a run needs. All randomness derives from `seed` through named sub-streams.
    struct PipelineConfig
    {
        std::uint64_t seed = 1;
        ScenarioConfig scenario;
        SounderConstants constants;
        ScanGrid grid = default_grid();
        ClockModel sicl_clock; // mode none
        ClockModel secl_clock = random_walk_clock();
        std::vector<Stage> stages{Stage::raw, Stage::ccd, Stage::ccd_cdedar};
        PeakOptions peaks;
        bool equalize = true; // when a calibration trace is available
        CcdOptions ccd;
        CdedarOptions cdedar;
        MatchParams match;

        // Propagates the top-level seed into the component configurations
        void apply_seed(std::uint64_t s)
        {
            seed = s;
            scenario.seed = s;
            sicl_clock.seed = s;
            secl_clock.seed = s;
        }
    };

    namespace detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        inline double to_double(const std::string &key, const std::string &v)
        {
            double out = 0.0;
            const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
            if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
                throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
            return out;
        }

        inline std::uint64_t to_uint(const std::string &key, const std::string &v)
        {
            std::uint64_t out = 0;
            const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
            if (r.ec != std::errc() || r.ptr != v.data() + v.size())
                throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
            return out;
        }

        inline bool to_bool(const std::string &key, const std::string &v)
        {
            if (v == "true" || v == "1" || v == "on")
                return true;
            if (v == "false" || v == "0" || v == "off")
                return false;
            throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
        }

        inline std::vector<std::string> to_list(const std::string &v)
        {
            std::vector<std::string> out;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
                out.push_back(trim(item));
            return out;
        }

        inline std::vector<double> to_doubles(const std::string &key, const std::string &v)
        {
            std::vector<double> out;
            for (const auto &s : to_list(v))
                out.push_back(to_double(key, s));
            return out;
        }

        inline std::vector<double> to_angles(const std::string &key, const std::string &v, bool azimuth)
        {
            if (v == "default")
                return azimuth ? default_azimuths() : std::vector<double>{-20.0, 0.0, 20.0};
            return to_doubles(key, v);
        }

        inline ClockMode to_clock_mode(const std::string &key, const std::string &v)
        {
            if (v == "none")
                return ClockMode::none;
            if (v == "random_walk")
                return ClockMode::random_walk;
            if (v == "piecewise_linear")
                return ClockMode::piecewise_linear;
            throw ConfigError("config key '" + key + "': expected none, random_walk or piecewise_linear, got '" + v + "'");
        }

        // "t:d, t:d, ..." in seconds and ns
        inline std::vector<std::pair<double, double>> to_knots(const std::string &key, const std::string &v)
        {
            std::vector<std::pair<double, double>> out;
            for (const auto &item : to_list(v))
            {
                const auto c = item.find(':');
                if (c == std::string::npos)
                    throw ConfigError("config key '" + key + "': knot '" + item + "' must be time_s:drift_ns");
                out.emplace_back(to_double(key, trim(item.substr(0, c))), to_double(key, trim(item.substr(c + 1))));
            }
            for (std::size_t i = 1; i < out.size(); ++i)
                if (!(out[i].first > out[i - 1].first))
                    throw ConfigError("config key '" + key + "': knot times must be strictly increasing");
            return out;
        }
    }

    // Applies one key=value setting
    inline void set_config_value(PipelineConfig &cfg, const std::string &key, const std::string &value)
    {
        using namespace detail;
        auto &sc = cfg.scenario;
        const std::map<std::string, std::function<void(const std::string &)>> setters = {
            {"seed", [&](const std::string &v) { cfg.apply_seed(to_uint(key, v)); }},
            {"scenario.n_paths", [&](const std::string &v) { sc.n_paths = to_uint(key, v); }},
            {"scenario.los_distance_m", [&](const std::string &v) { sc.los_distance_m = to_double(key, v); }},
            {"scenario.delay_min_bins", [&](const std::string &v) { sc.delay_min_bins = int(to_uint(key, v)); }},
            {"scenario.delay_max_bins", [&](const std::string &v) { sc.delay_max_bins = int(to_uint(key, v)); }},
            {"scenario.gain_min_db", [&](const std::string &v) { sc.gain_min_db = to_double(key, v); }},
            {"scenario.gain_max_db", [&](const std::string &v) { sc.gain_max_db = to_double(key, v); }},
            {"scenario.lever_arm_m", [&](const std::string &v) { sc.lever_arm_m = to_double(key, v); }},
            {"scenario.noise_floor_dbm", [&](const std::string &v) { sc.noise_floor_dbm = to_double(key, v); }},
            {"scenario.leakage_db", [&](const std::string &v) { sc.leakage_db = to_double(key, v); }},
            {"scenario.noise", [&](const std::string &v)
             {
                 if (v == "random")
                     sc.noise = NoiseMode::random;
                 else if (v == "constant")
                     sc.noise = NoiseMode::constant;
                 else
                     throw ConfigError("config key '" + key + "': expected random or constant, got '" + v + "'");
             }},
            {"scenario.hardware", [&](const std::string &v)
             {
                 if (v == "none")
                     sc.hardware.reset();
                 else if (v == "default_spurs")
                     sc.hardware = default_spur_profile();
                 else
                     throw ConfigError("config key '" + key + "': expected none or default_spurs, got '" + v + "'");
             }},
            {"grid.tx_az", [&](const std::string &v) { cfg.grid.tx_az = to_angles(key, v, true); }},
            {"grid.tx_el", [&](const std::string &v) { cfg.grid.tx_el = to_angles(key, v, false); }},
            {"grid.rx_az", [&](const std::string &v) { cfg.grid.rx_az = to_angles(key, v, true); }},
            {"grid.rx_el", [&](const std::string &v) { cfg.grid.rx_el = to_angles(key, v, false); }},
            {"grid.reference", [&](const std::string &v)
             {
                 const auto a = to_doubles(key, v);
                 if (a.size() != 4)
                     throw ConfigError("config key '" + key + "': expected tx_az,tx_el,rx_az,rx_el");
                 cfg.grid.reference = {a[0], a[1], a[2], a[3]};
             }},
            {"grid.reference_interval", [&](const std::string &v) { cfg.grid.reference_interval = to_uint(key, v); }},
            {"clock.sicl", [&](const std::string &v) { cfg.sicl_clock.mode = to_clock_mode(key, v); }},
            {"clock.secl", [&](const std::string &v) { cfg.secl_clock.mode = to_clock_mode(key, v); }},
            {"clock.rate_ns_per_hour", [&](const std::string &v)
             { cfg.sicl_clock.rate_ns_per_hour = cfg.secl_clock.rate_ns_per_hour = to_double(key, v); }},
            {"clock.step_period_s", [&](const std::string &v)
             { cfg.sicl_clock.step_period_s = cfg.secl_clock.step_period_s = to_double(key, v); }},
            {"clock.knots", [&](const std::string &v) { cfg.sicl_clock.knots = cfg.secl_clock.knots = to_knots(key, v); }},
            {"process.stages", [&](const std::string &v)
             {
                 cfg.stages.clear();
                 for (const auto &s : to_list(v))
                     cfg.stages.push_back(parse_stage(s));
             }},
            {"process.threshold_db", [&](const std::string &v) { cfg.peaks.threshold_db = to_double(key, v); }},
            {"process.exclusion_bins", [&](const std::string &v) { cfg.peaks.exclusion_bins = to_uint(key, v); }},
            {"process.equalize", [&](const std::string &v) { cfg.equalize = to_bool(key, v); }},
            {"process.ccd_circular", [&](const std::string &v) { cfg.ccd.circular = to_bool(key, v); }},
            {"process.neighborhood_deg", [&](const std::string &v) { cfg.cdedar.max_diff_deg = to_double(key, v); }},
            {"process.max_sweeps", [&](const std::string &v) { cfg.cdedar.max_sweeps = to_uint(key, v); }},
            {"match.weights", [&](const std::string &v)
             {
                 const auto w = to_doubles(key, v);
                 if (w.size() != match_dims)
                     throw ConfigError("config key '" + key + "': expected 6 weights");
                 std::copy(w.begin(), w.end(), cfg.match.weights.begin());
             }},
            {"match.gate_angle_deg", [&](const std::string &v) { cfg.match.gates.angle_deg = to_double(key, v); }},
            {"match.gate_delay_ns", [&](const std::string &v) { cfg.match.gates.delay_ns = to_double(key, v); }},
            {"match.gate_gain_db", [&](const std::string &v) { cfg.match.gates.gain_db = to_double(key, v); }},
        };
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("unknown config key '" + key + "'");
        it->second(value);
    }

    inline void validate_config(const PipelineConfig &cfg)
    {
        validate_grid(cfg.grid);
        validate_scenario(cfg.scenario, cfg.constants);
        for (double w : cfg.match.weights)
            if (!(w > 0.0))
                throw ConfigError("matching weights must be positive");
        if (cfg.stages.empty())
            throw ConfigError("no processing stages selected");
        if (cfg.secl_clock.mode == ClockMode::piecewise_linear && cfg.secl_clock.knots.empty())
            throw ConfigError("clock.secl = piecewise_linear needs clock.knots");
        if (cfg.peaks.exclusion_bins >= cfg.constants.pdp_len)
            throw ConfigError("process.exclusion_bins must be smaller than the PDP length");
    }

    inline PipelineConfig parse_config(std::istream &in, const std::string &name = "config")
    {
        PipelineConfig cfg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.resize(hash);
            line = detail::trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
            try
            {
                set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(name + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        validate_config(cfg);
        return cfg;
    }

    inline PipelineConfig load_config(const std::filesystem::path &p)
    {
        std::ifstream in(p);
        if (!in)
            throw ConfigError("cannot open config file '" + p.string() + "'");
        return parse_config(in, p.string());
    }

    // Canonical key=value rendering; hashing it identifies the configuration of a run
    inline std::string canonical_config(const PipelineConfig &cfg)
    {
        auto num = [](double v)
        {
            char buf[64];
            const auto r = std::to_chars(buf, buf + sizeof(buf), v);
            return std::string(buf, r.ptr);
        };
        auto list = [&](const std::vector<double> &v)
        {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
                s += (i ? "," : "") + num(v[i]);
            return s;
        };
        auto mode = [](ClockMode m)
        { return m == ClockMode::none ? "none" : m == ClockMode::random_walk ? "random_walk" : "piecewise_linear"; };

        const auto &sc = cfg.scenario;
        std::ostringstream o;
        o << "seed = " << cfg.seed << '\n'
          << "scenario.n_paths = " << sc.n_paths << '\n'
          << "scenario.los_distance_m = " << num(sc.los_distance_m) << '\n'
          << "scenario.delay_min_bins = " << sc.delay_min_bins << '\n'
          << "scenario.delay_max_bins = " << sc.delay_max_bins << '\n'
          << "scenario.gain_min_db = " << num(sc.gain_min_db) << '\n'
          << "scenario.gain_max_db = " << num(sc.gain_max_db) << '\n'
          << "scenario.lever_arm_m = " << num(sc.lever_arm_m) << '\n'
          << "scenario.noise_floor_dbm = " << num(sc.noise_floor_dbm) << '\n'
          << "scenario.noise = " << (sc.noise == NoiseMode::random ? "random" : "constant") << '\n'
          << "scenario.leakage_db = " << num(sc.leakage_db) << '\n'
          << "scenario.hardware = " << (sc.hardware ? "default_spurs" : "none") << '\n'
          << "grid.tx_az = " << list(cfg.grid.tx_az) << '\n'
          << "grid.tx_el = " << list(cfg.grid.tx_el) << '\n'
          << "grid.rx_az = " << list(cfg.grid.rx_az) << '\n'
          << "grid.rx_el = " << list(cfg.grid.rx_el) << '\n'
          << "grid.reference = " << list({cfg.grid.reference.tx_az, cfg.grid.reference.tx_el, cfg.grid.reference.rx_az, cfg.grid.reference.rx_el}) << '\n'
          << "grid.reference_interval = " << cfg.grid.reference_interval << '\n'
          << "clock.sicl = " << mode(cfg.sicl_clock.mode) << '\n'
          << "clock.secl = " << mode(cfg.secl_clock.mode) << '\n'
          << "clock.rate_ns_per_hour = " << num(cfg.secl_clock.rate_ns_per_hour) << '\n'
          << "clock.step_period_s = " << num(cfg.secl_clock.step_period_s) << '\n';
        if (!cfg.secl_clock.knots.empty())
        {
            o << "clock.knots = ";
            for (std::size_t i = 0; i < cfg.secl_clock.knots.size(); ++i)
                o << (i ? "," : "") << num(cfg.secl_clock.knots[i].first) << ':' << num(cfg.secl_clock.knots[i].second);
            o << '\n';
        }
        o << "process.stages = ";
        for (std::size_t i = 0; i < cfg.stages.size(); ++i)
            o << (i ? "," : "") << to_string(cfg.stages[i]);
        o << '\n'
          << "process.threshold_db = " << num(cfg.peaks.threshold_db) << '\n'
          << "process.exclusion_bins = " << cfg.peaks.exclusion_bins << '\n'
          << "process.equalize = " << (cfg.equalize ? "true" : "false") << '\n'
          << "process.ccd_circular = " << (cfg.ccd.circular ? "true" : "false") << '\n'
          << "process.neighborhood_deg = " << num(cfg.cdedar.max_diff_deg) << '\n'
          << "process.max_sweeps = " << cfg.cdedar.max_sweeps << '\n'
          << "match.weights = " << list({cfg.match.weights.begin(), cfg.match.weights.end()}) << '\n'
          << "match.gate_angle_deg = " << num(cfg.match.gates.angle_deg) << '\n'
          << "match.gate_delay_ns = " << num(cfg.match.gates.delay_ns) << '\n'
          << "match.gate_gain_db = " << num(cfg.match.gates.gain_db) << '\n';
        return o.str();
    }
}

#endif
