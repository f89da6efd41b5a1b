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

#ifndef PADP_SOUNDER_SIM_HPP
#define PADP_SOUNDER_SIM_HPP

#include "padp/campaign.hpp"
#include "padp/error.hpp"
#include "padp/model.hpp"
#include "padp/parallel.hpp"
#include "padp/rng.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace padp
{
    // Horn antenna gain in dBi for a pointing offset (az, el) in degrees. Separable Gaussian
    // main lobe, 3 dB down at half the beamwidth in each plane, clamped at the back-lobe level.
    inline double antenna_gain(double az_offset_deg, double el_offset_deg, const SounderConstants &c)
    {
        const double az = wrapped_offset(az_offset_deg, 0.0) / (0.5 * c.beamwidth_az_deg);
        const double el = el_offset_deg / (0.5 * c.beamwidth_el_deg);
        const double g = c.boresight_gain_dbi - 3.0 * az * az - 3.0 * el * el;
        return std::max(g, c.back_lobe_gain_dbi);
    }

    namespace detail
    {
        inline std::array<double, 3> unit_vector(double az_deg, double el_deg)
        {
            const double az = az_deg * std::numbers::pi / 180.0;
            const double el = el_deg * std::numbers::pi / 180.0;
            return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
        }

        // 1 - cos(angle between boresight and path direction)
        inline double misalignment(double boresight_az, double boresight_el, double path_az, double path_el)
        {
            if (boresight_az == path_az && boresight_el == path_el)
                return 0.0;
            const auto u = unit_vector(boresight_az, boresight_el);
            const auto p = unit_vector(path_az, path_el);
            const double dot = u[0] * p[0] + u[1] * p[1] + u[2] * p[2];
            return std::clamp(1.0 - dot, 0.0, 2.0);
        }
    }

    // Extra flight time (ns) of `mpc` at orientation `o` relative to the aligned orientation.
    // Each antenna phase center sits `lever_arm_m` in front of its gimbal rotation center along
    // the boresight, so in the far field the path shortens by lever_arm * cos(misalignment).
    inline double rotation_delay_offset(const Mpc &mpc, const Orientation &o, double lever_arm_m)
    {
        if (lever_arm_m < 0.0)
            throw ConfigError("lever arm must be non-negative");
        const double extra_m = lever_arm_m * (detail::misalignment(o.tx_az, o.tx_el, mpc.aod_az, mpc.aod_el) +
                                              detail::misalignment(o.rx_az, o.rx_el, mpc.aoa_az, mpc.aoa_el));
        return extra_m / speed_of_light_m_per_ns;
    }

    enum class ClockMode
    {
        none,
        random_walk,
        piecewise_linear
    };

    struct ClockModel
    {
        ClockMode mode = ClockMode::none;
        double rate_ns_per_hour = 18.0; // expected |d| after one hour
        double step_period_s = 1.0;
        std::uint64_t seed = 0;
        std::vector<std::pair<double, double>> knots; // (time s, drift ns), piecewise_linear only
    };

    // Drift d_m (ns) at each timestamp, relative to the first timestamp (d_1 = 0).
    //
    // random_walk integrates a random walk of the clock rate offset: the drift is the cumulative
    // sum of a rate that is itself the cumulative sum of i.i.d. Gaussian steps, one per step
    // period. The step size is chosen so that E|d(t0 + 3600 s)| equals rate_ns_per_hour.
    inline std::vector<double> simulate_drift(const ClockModel &model, std::span<const double> timestamps)
    {
        std::vector<double> d(timestamps.size(), 0.0);
        if (timestamps.empty() || model.mode == ClockMode::none)
            return d;
        for (std::size_t i = 1; i < timestamps.size(); ++i)
            if (!(timestamps[i] >= timestamps[i - 1]))
                throw ConfigError("drift timestamps must be non-decreasing");

        const double t0 = timestamps.front();

        if (model.mode == ClockMode::piecewise_linear)
        {
            if (model.knots.empty())
                throw ConfigError("piecewise_linear clock needs at least one knot");
            auto eval = [&](double t)
            {
                const auto &k = model.knots;
                if (t <= k.front().first)
                    return k.front().second;
                for (std::size_t i = 1; i < k.size(); ++i)
                    if (t <= k[i].first)
                    {
                        const double w = (t - k[i - 1].first) / (k[i].first - k[i - 1].first);
                        return k[i - 1].second + w * (k[i].second - k[i - 1].second);
                    }
                return k.back().second;
            };
            const double base = eval(t0);
            for (std::size_t i = 0; i < timestamps.size(); ++i)
                d[i] = eval(timestamps[i]) - base;
            return d;
        }

        if (!(model.step_period_s > 0.0) || model.rate_ns_per_hour < 0.0)
            throw ConfigError("random_walk clock needs a positive step period and non-negative rate");

        // Var(D_n) = sigma^2 * sum_{k=1..n} k^2 for n steps
        const double n_hour = std::max(1.0, std::round(3600.0 / model.step_period_s));
        const double sum_sq = n_hour * (n_hour + 1.0) * (2.0 * n_hour + 1.0) / 6.0;
        const double sigma = model.rate_ns_per_hour / (std::sqrt(2.0 / std::numbers::pi) * std::sqrt(sum_sq));

        const double span_steps = (timestamps.back() - t0) / model.step_period_s;
        const std::size_t n_steps = std::size_t(std::ceil(span_steps)) + 1;
        std::vector<double> walk(n_steps + 1, 0.0);
        RandomStream rng(model.seed, StreamTag::drift);
        double rate = 0.0;
        for (std::size_t j = 1; j <= n_steps; ++j)
        {
            rate += sigma * rng.normal();
            walk[j] = walk[j - 1] + rate;
        }
        for (std::size_t i = 0; i < timestamps.size(); ++i)
        {
            const double u = (timestamps[i] - t0) / model.step_period_s;
            const std::size_t j = std::min(std::size_t(std::floor(u)), n_steps - 1);
            const double w = u - double(j);
            d[i] = walk[j] + w * (walk[j + 1] - walk[j]);
        }
        return d;
    }

    // Synthetic non-ideal hardware response: main tap at offset 0 (0 dB) plus spurs, applied
    // as a circular convolution of the linear-power delay profile.
    struct SpurTap
    {
        int offset_bins = 0;
        double relative_db = 0.0;

        friend bool operator==(const SpurTap &, const SpurTap &) = default;
    };

    struct HardwareResponse
    {
        std::vector<SpurTap> spurs;

        friend bool operator==(const HardwareResponse &, const HardwareResponse &) = default;
    };

    inline HardwareResponse default_spur_profile()
    {
        return {{{37, -22.0}, {74, -28.0}, {-53, -25.0}, {211, -31.0}}};
    }

    enum class NoiseMode
    {
        random,  // exponential power per bin around the floor
        constant // deterministic floor, for noise-free campaigns
    };

    struct ScenarioConfig
    {
        std::size_t n_paths = 100; // including the LOS path
        double los_distance_m = 2.0;
        int delay_min_bins = 12; // NLOS delay range
        int delay_max_bins = 400;
        double gain_min_db = -100.0; // NLOS path gain range
        double gain_max_db = -72.0;
        std::uint64_t seed = 1;
        double lever_arm_m = 0.20;
        double noise_floor_dbm = -103.0; // per-bin mean noise power
        NoiseMode noise = NoiseMode::random;
        double leakage_db = -13.0; // power in each adjacent bin relative to the path bin
        std::optional<HardwareResponse> hardware;
    };

    inline void validate_scenario(const ScenarioConfig &cfg, const SounderConstants &c)
    {
        const int last = int(c.pdp_len) - 1;
        if (cfg.n_paths < 1)
            throw ConfigError("scenario needs at least one path (the LOS path)");
        if (!(cfg.los_distance_m > 0.0))
            throw ConfigError("LOS distance must be positive");
        if (cfg.lever_arm_m < 0.0)
            throw ConfigError("lever arm must be non-negative");
        if (cfg.delay_min_bins < 0 || cfg.delay_max_bins > last || cfg.delay_min_bins > cfg.delay_max_bins)
            throw ConfigError("NLOS delay range must lie within [0, " + std::to_string(last) + "] bins");
        if (cfg.gain_min_db > cfg.gain_max_db)
            throw ConfigError("gain range is empty");
        const double los_bins = cfg.los_distance_m / speed_of_light_m_per_ns / c.delay_bin_ns();
        if (std::lround(los_bins) > last)
            throw ConfigError("LOS delay exceeds the delay window");
    }

    struct GroundTruth
    {
        std::vector<Mpc> paths;
        std::size_t los_index = 0;
        double los_distance_m = 0.0;
    };

    // Free-space path gain in dB at the given distance
    inline double free_space_gain_db(double distance_m, const SounderConstants &c)
    {
        return 20.0 * std::log10(c.wavelength_m() / (4.0 * std::numbers::pi * distance_m));
    }

    // Random channel on the scan grid: the LOS path at the reference orientation plus
    // n_paths - 1 NLOS paths with unique delay bins.
    inline GroundTruth generate_scenario(const ScenarioConfig &cfg, const ScanGrid &grid = default_grid(),
                                         const SounderConstants &c = {})
    {
        validate_scenario(cfg, c);
        validate_grid(grid);
        const double bin = c.delay_bin_ns();

        GroundTruth truth;
        truth.los_distance_m = cfg.los_distance_m;

        Mpc los;
        los.aod_az = grid.reference.tx_az;
        los.aod_el = grid.reference.tx_el;
        los.aoa_az = grid.reference.rx_az;
        los.aoa_el = grid.reference.rx_el;
        los.delay_ns = cfg.los_distance_m / speed_of_light_m_per_ns;
        los.delay_bin = int(std::lround(los.delay_ns / bin));
        los.gain_db = free_space_gain_db(cfg.los_distance_m, c);
        truth.paths.push_back(los);

        std::unordered_set<int> used{los.delay_bin};
        const std::size_t free_bins = std::size_t(cfg.delay_max_bins - cfg.delay_min_bins + 1) -
                                      ((los.delay_bin >= cfg.delay_min_bins && los.delay_bin <= cfg.delay_max_bins) ? 1 : 0);
        if (cfg.n_paths - 1 > free_bins)
            throw ConfigError("delay range too narrow for " + std::to_string(cfg.n_paths) + " paths with unique delay bins");

        RandomStream rng(cfg.seed, StreamTag::scenario);
        while (truth.paths.size() < cfg.n_paths)
        {
            Mpc p;
            p.aod_az = grid.tx_az[rng.below(grid.tx_az.size())];
            p.aod_el = grid.tx_el[rng.below(grid.tx_el.size())];
            p.aoa_az = grid.rx_az[rng.below(grid.rx_az.size())];
            p.aoa_el = grid.rx_el[rng.below(grid.rx_el.size())];
            p.delay_ns = rng.uniform(double(cfg.delay_min_bins) - 0.5, double(cfg.delay_max_bins) + 0.5) * bin;
            p.delay_bin = int(std::lround(p.delay_ns / bin));
            p.gain_db = rng.uniform(cfg.gain_min_db, cfg.gain_max_db);
            // rejection keeps delays unique at bin resolution
            if (p.delay_bin < cfg.delay_min_bins || p.delay_bin > cfg.delay_max_bins || !used.insert(p.delay_bin).second)
                continue;
            truth.paths.push_back(p);
        }
        return truth;
    }

    struct SynthesisStats
    {
        std::size_t dropped_paths = 0; // nominal bin outside the delay window
    };

    inline void apply_hardware_response(std::vector<double> &linear, const HardwareResponse &hw)
    {
        const long n = long(linear.size());
        std::vector<double> out = linear;
        for (const auto &tap : hw.spurs)
        {
            const double g = db_to_linear(tap.relative_db);
            for (long b = 0; b < n; ++b)
                out[std::size_t(((b + tap.offset_bins) % n + n) % n)] += g * linear[std::size_t(b)];
        }
        linear = std::move(out);
    }

    // PDP at one orientation. Each path contributes P_TX + gain + G_TX + G_RX at
    // bin round((tau_min + rotation offset + drift) / delay_bin), with a fixed leakage fraction in
    // the two adjacent bins. Paths add in linear power (no phase). The delay axis is circular, as
    // for a periodic sounding sequence, so drift of either sign keeps paths in the window; a path
    // whose drift-free bin falls outside the window is dropped and counted.
    inline PdpTrace synthesize_pdp(const GroundTruth &truth, const Orientation &o, double drift_ns,
                                   const ScenarioConfig &cfg, const SounderConstants &c,
                                   RandomStream &noise_rng, SynthesisStats *stats = nullptr)
    {
        const std::size_t n = c.pdp_len;
        const long nl = long(n);
        const double bin = c.delay_bin_ns();
        const double leak = db_to_linear(cfg.leakage_db);

        std::vector<double> paths_mw(n, 0.0);
        for (const auto &p : truth.paths)
        {
            const double g_tx = antenna_gain(wrapped_offset(o.tx_az, p.aod_az), o.tx_el - p.aod_el, c);
            const double g_rx = antenna_gain(wrapped_offset(o.rx_az, p.aoa_az), o.rx_el - p.aoa_el, c);
            const double p_mw = db_to_linear(c.tx_power_dbm + p.gain_db + g_tx + g_rx);

            const double nominal_ns = p.delay_ns + rotation_delay_offset(p, o, cfg.lever_arm_m);
            const long nominal_bin = std::lround(nominal_ns / bin);
            if (nominal_bin < 0 || nominal_bin >= nl)
            {
                if (stats)
                    ++stats->dropped_paths;
                continue;
            }
            const long b = std::lround((nominal_ns + drift_ns) / bin);
            auto at = [&](long k) -> double &
            { return paths_mw[std::size_t(((k % nl) + nl) % nl)]; };
            at(b) += p_mw;
            at(b - 1) += leak * p_mw;
            at(b + 1) += leak * p_mw;
        }

        if (cfg.hardware)
            apply_hardware_response(paths_mw, *cfg.hardware);

        const double floor_mw = db_to_linear(cfg.noise_floor_dbm);
        PdpTrace trace;
        trace.orientation = o;
        trace.power_dbm.resize(n);
        for (std::size_t k = 0; k < n; ++k)
        {
            const double noise = cfg.noise == NoiseMode::random ? floor_mw * noise_rng.exponential() : floor_mw;
            trace.power_dbm[k] = quantize_db(linear_to_db(paths_mw[k] + noise));
        }
        return trace;
    }

    // Calibration-cable measurement: a flat channel (single delta at `cable_bin`) seen through the
    // hardware response, plus the noise floor.
    inline PdpTrace synthesize_calibration_trace(const HardwareResponse &hw, const SounderConstants &c,
                                                 double cable_power_dbm, int cable_bin, double noise_floor_dbm,
                                                 RandomStream &noise_rng, NoiseMode noise = NoiseMode::random)
    {
        std::vector<double> lin(c.pdp_len, 0.0);
        lin[std::size_t(((cable_bin % long(c.pdp_len)) + long(c.pdp_len)) % long(c.pdp_len))] = db_to_linear(cable_power_dbm);
        apply_hardware_response(lin, hw);
        const double floor_mw = db_to_linear(noise_floor_dbm);
        PdpTrace t;
        t.power_dbm.resize(c.pdp_len);
        for (std::size_t k = 0; k < c.pdp_len; ++k)
        {
            const double nz = noise == NoiseMode::random ? floor_mw * noise_rng.exponential() : floor_mw;
            t.power_dbm[k] = quantize_db(linear_to_db(lin[k] + nz));
        }
        return t;
    }

    struct SimulatedCampaign
    {
        CampaignSet campaign;
        std::vector<double> drift_ns; // true drift per measurement, same order as campaign.measurements
        std::size_t dropped_paths = 0;
    };

    // Runs the scan sequence at one measurement per second. Noise streams are keyed by
    // (seed, sequence index), so two campaigns from the same scenario see identical noise.
    inline SimulatedCampaign run_campaign(const GroundTruth &truth, const ScanGrid &grid, const SounderConstants &c,
                                          const ClockModel &clock, const ScenarioConfig &cfg, std::string label,
                                          unsigned threads = 1)
    {
        validate_scenario(cfg, c);
        const auto seq = scan_order(grid);

        std::vector<double> timestamps(seq.size());
        for (std::size_t i = 0; i < seq.size(); ++i)
            timestamps[i] = double(seq[i].sequence);

        SimulatedCampaign out;
        out.drift_ns = simulate_drift(clock, timestamps);
        out.campaign.label = std::move(label);
        out.campaign.constants = c;
        out.campaign.grid = grid;
        out.campaign.measurements.resize(seq.size());

        std::vector<SynthesisStats> stats(seq.size());
        parallel_for(seq.size(), threads, [&](std::size_t i)
                     {
            RandomStream rng(cfg.seed, StreamTag::noise, seq[i].sequence);
            auto &m = out.campaign.measurements[i];
            m.entry = seq[i];
            m.trace = synthesize_pdp(truth, seq[i].orientation, out.drift_ns[i], cfg, c, rng, &stats[i]);
            m.trace.timestamp_s = timestamps[i]; });
        for (const auto &s : stats)
            out.dropped_paths += s.dropped_paths;
        return out;
    }
}

#endif
