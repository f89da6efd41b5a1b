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

#ifndef PADP_MPC_MATCHING_HPP
#define PADP_MPC_MATCHING_HPP

#include "padp/campaign.hpp"
#include "padp/error.hpp"
#include "padp/hungarian.hpp"
#include "padp/model.hpp"
#include "padp/mpc_extraction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace padp
{
    // Matching dimensions: AoD az, AoD el, AoA az, AoA el (deg), delay (ns), gain (dB)
    inline constexpr std::size_t match_dims = 6;

    // Per-dimension N_t x N_s matrices, row-major (target i, source j)
    struct DistanceSet
    {
        std::size_t targets = 0;
        std::size_t sources = 0;
        std::array<std::vector<double>, match_dims> d;

        double at(std::size_t l, std::size_t i, std::size_t j) const { return d[l][i * sources + j]; }
        double &at(std::size_t l, std::size_t i, std::size_t j) { return d[l][i * sources + j]; }
    };

    struct MatchGates
    {
        double angle_deg = 22.5;
        double delay_ns = 3.255; // five delay bins
        double gain_db = 4.0;
    };

    struct MatchParams
    {
        std::array<double, match_dims> weights{0.25, 0.25, 0.25, 0.25, 1.0, 1.0};
        MatchGates gates;
    };

    inline std::array<double, match_dims> mpc_distance(const Mpc &t, const Mpc &s)
    {
        return {angular_difference(t.aod_az, s.aod_az, Plane::azimuth),
                angular_difference(t.aod_el, s.aod_el, Plane::elevation),
                angular_difference(t.aoa_az, s.aoa_az, Plane::azimuth),
                angular_difference(t.aoa_el, s.aoa_el, Plane::elevation),
                std::abs(t.delay_ns - s.delay_ns),
                std::abs(t.gain_db - s.gain_db)};
    }

    inline DistanceSet raw_distances(const std::vector<Mpc> &target, const std::vector<Mpc> &source)
    {
        if (target.empty() || source.empty())
            throw DataError("cannot match an empty MPC set");
        DistanceSet ds;
        ds.targets = target.size();
        ds.sources = source.size();
        for (auto &v : ds.d)
            v.resize(ds.targets * ds.sources);
        for (std::size_t i = 0; i < ds.targets; ++i)
            for (std::size_t j = 0; j < ds.sources; ++j)
            {
                const auto d = mpc_distance(target[i], source[j]);
                for (std::size_t l = 0; l < match_dims; ++l)
                    ds.at(l, i, j) = d[l];
            }
        return ds;
    }

    // Min-max scaling over the targets of each source column; a constant column maps to 0
    inline DistanceSet normalize(const DistanceSet &raw)
    {
        DistanceSet out = raw;
        for (std::size_t l = 0; l < match_dims; ++l)
            for (std::size_t j = 0; j < raw.sources; ++j)
            {
                double lo = raw.at(l, 0, j), hi = lo;
                for (std::size_t i = 1; i < raw.targets; ++i)
                {
                    lo = std::min(lo, raw.at(l, i, j));
                    hi = std::max(hi, raw.at(l, i, j));
                }
                for (std::size_t i = 0; i < raw.targets; ++i)
                    out.at(l, i, j) = hi > lo ? (raw.at(l, i, j) - lo) / (hi - lo) : 0.0;
            }
        return out;
    }

    // Feasibility per pair, row-major; all bounds are strict
    inline std::vector<char> gate_validity(const DistanceSet &raw, const MatchGates &g = {})
    {
        std::vector<char> ok(raw.targets * raw.sources);
        for (std::size_t i = 0; i < raw.targets; ++i)
            for (std::size_t j = 0; j < raw.sources; ++j)
            {
                bool f = raw.at(4, i, j) < g.delay_ns && raw.at(5, i, j) < g.gain_db;
                for (std::size_t l = 0; l < 4; ++l)
                    f = f && raw.at(l, i, j) < g.angle_deg;
                ok[i * raw.sources + j] = f;
            }
        return ok;
    }

    inline CostMatrix weighted_cost(const DistanceSet &norm, const std::array<double, match_dims> &w,
                                    const std::vector<char> &feasible)
    {
        for (double x : w)
            if (!(x > 0.0))
                throw ConfigError("matching weights must be positive");
        if (feasible.size() != norm.targets * norm.sources)
            throw DataError("feasibility mask does not match the distance matrices");
        CostMatrix c(norm.targets, norm.sources);
        c.feasible = feasible;
        for (std::size_t i = 0; i < norm.targets; ++i)
            for (std::size_t j = 0; j < norm.sources; ++j)
            {
                if (!c.is_feasible(i, j))
                    continue;
                double s = 0.0;
                for (std::size_t l = 0; l < match_dims; ++l)
                    s += w[l] * norm.at(l, i, j) * norm.at(l, i, j);
                c.at(i, j) = std::sqrt(s);
            }
        return c;
    }

    struct MatchedPair
    {
        std::size_t target = 0;
        std::size_t source = 0;
        double cost = 0.0;
        std::array<double, match_dims> error{}; // raw per-dimension distance
    };

    struct MatchReport
    {
        std::string target_label;
        std::string source_label;
        std::size_t target_count = 0;
        std::size_t source_count = 0;
        std::vector<MatchedPair> pairs;
        std::vector<std::size_t> unassigned_targets;
        std::vector<std::size_t> unassigned_sources;
        std::size_t matched_count = 0;
        double matched_pct = 0.0;                // relative to the target count
        double missed_pct = 100.0;
        double matched_pct_source = 0.0;         // same pairs relative to the source count
        double matched_power_pct_target = 0.0;
        double matched_power_pct_source = 0.0;
        double total_cost = 0.0;
    };

    inline MatchReport compute_metrics(const Assignment &a, const std::vector<Mpc> &target, const std::vector<Mpc> &source,
                                       const CostMatrix *costs = nullptr)
    {
        MatchReport r;
        r.target_count = target.size();
        r.source_count = source.size();
        r.unassigned_targets = a.unassigned_rows;
        r.unassigned_sources = a.unassigned_cols;
        r.total_cost = a.total_cost;
        for (const auto &[i, j] : a.pairs)
        {
            MatchedPair p;
            p.target = i;
            p.source = j;
            p.cost = costs ? costs->at(i, j) : 0.0;
            p.error = mpc_distance(target[i], source[j]);
            r.pairs.push_back(p);
        }
        r.matched_count = r.pairs.size();
        if (!target.empty())
        {
            r.matched_pct = 100.0 * double(r.matched_count) / double(target.size());
            r.missed_pct = 100.0 - r.matched_pct;
        }
        if (!source.empty())
            r.matched_pct_source = 100.0 * double(r.matched_count) / double(source.size());

        auto power_pct = [&](const std::vector<Mpc> &set, bool is_target)
        {
            double all = 0.0, hit = 0.0;
            for (const auto &m : set)
                all += db_to_linear(m.gain_db);
            for (const auto &p : r.pairs)
                hit += db_to_linear(set[is_target ? p.target : p.source].gain_db);
            return all > 0.0 ? 100.0 * hit / all : 0.0;
        };
        r.matched_power_pct_target = power_pct(target, true);
        r.matched_power_pct_source = power_pct(source, false);
        return r;
    }

    inline std::vector<Mpc> mpcs_of(const ExtractedMpcSet &set)
    {
        std::vector<Mpc> out;
        out.reserve(set.mpcs.size());
        for (const auto &e : set.mpcs)
            out.push_back(e.mpc);
        return out;
    }

    // Full matching of a source set against a target set
    inline MatchReport match_mpcs(const std::vector<Mpc> &target, const std::vector<Mpc> &source, const MatchParams &params = {})
    {
        if (target.empty() || source.empty())
        {
            Assignment a;
            for (std::size_t i = 0; i < target.size(); ++i)
                a.unassigned_rows.push_back(i);
            for (std::size_t j = 0; j < source.size(); ++j)
                a.unassigned_cols.push_back(j);
            return compute_metrics(a, target, source);
        }
        const auto raw = raw_distances(target, source);
        const auto costs = weighted_cost(normalize(raw), params.weights, gate_validity(raw, params.gates));
        return compute_metrics(solve_assignment(costs), target, source, &costs);
    }

    inline MatchReport match_mpcs(const ExtractedMpcSet &target, const ExtractedMpcSet &source, const MatchParams &params = {})
    {
        auto r = match_mpcs(mpcs_of(target), mpcs_of(source), params);
        r.target_label = target.label;
        r.source_label = source.label;
        return r;
    }
}

#endif
