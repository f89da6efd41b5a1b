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

#ifndef PADP_DELAY_CORRECTION_HPP
#define PADP_DELAY_CORRECTION_HPP

#include "padp/error.hpp"
#include "padp/model.hpp"
#include "padp/pdp_processing.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace padp
{
    // Drift measured on the reference measurements, in delay bins relative to the first one
    struct DriftTrack
    {
        std::vector<std::size_t> positions; // sequence index of reference k
        std::vector<int> tau_ref;           // strongest-peak bin of reference k
        std::vector<int> d_ref;             // tau_ref[k] - tau_ref[0], wrapped into (-pdp_len/2, pdp_len/2]
        std::vector<int> estimate;          // interpolated drift per measurement, sequence order

        std::size_t size() const { return positions.size(); }
    };

    // Signed difference a - b on a circular axis of length n, in (-n/2, n/2]
    inline int circular_difference(int a, int b, std::size_t n)
    {
        const int len = int(n);
        int d = ((a - b) % len + len) % len;
        if (d > len / 2)
            d -= len;
        return d;
    }

    // Linear interpolation between the bracketing references, rounded half away from zero
    inline int estimate_drift(const DriftTrack &track, std::size_t position)
    {
        const auto &pos = track.positions;
        if (pos.empty() || position < pos.front() || position > pos.back())
            throw DataError("measurement " + std::to_string(position) + " is not bracketed by reference measurements");
        const std::size_t b = std::size_t(std::lower_bound(pos.begin(), pos.end(), position) - pos.begin());
        if (pos[b] == position)
            return track.d_ref[b];
        const std::size_t a = b - 1;
        const double frac = double(position - pos[a]) / double(pos[b] - pos[a]);
        const double d = double(track.d_ref[a]) + (double(track.d_ref[b]) - double(track.d_ref[a])) * frac;
        return int(std::lround(d));
    }

    inline DriftTrack track_reference_drift(const PeakTable &table)
    {
        DriftTrack track;
        for (std::size_t k = 0; k < table.entries.size(); ++k)
        {
            const auto &e = table.entries[k];
            if (!e.is_reference())
                continue;
            const auto &peaks = table.peaks[k];
            if (peaks.empty())
                throw DataError("reference measurement k=" + std::to_string(*e.reference + 1) + " (sequence " +
                                std::to_string(e.sequence) + ") has no peaks");
            const auto best = std::max_element(peaks.begin(), peaks.end(), [](const PeakRecord &a, const PeakRecord &b)
                                               { return a.power_dbm < b.power_dbm; });
            if (!track.positions.empty() && e.sequence <= track.positions.back())
                throw DataError("reference measurements are not in sequence order");
            track.positions.push_back(e.sequence);
            track.tau_ref.push_back(best->delay_bin);
        }
        if (track.positions.size() < 2)
            throw DataError("campaign needs at least two reference measurements, found " + std::to_string(track.positions.size()));
        for (int t : track.tau_ref)
            track.d_ref.push_back(circular_difference(t, track.tau_ref.front(), table.pdp_len));

        track.estimate.resize(table.entries.size());
        for (std::size_t k = 0; k < table.entries.size(); ++k)
            track.estimate[k] = estimate_drift(track, table.entries[k].sequence);
        return track;
    }

    struct CcdOptions
    {
        // The sounding sequence is periodic, so a peak pushed past either end of the window by drift
        // reappears at the other end and the correction wraps it back. Without wrapping, corrected
        // delays outside the window are flagged invalid and excluded downstream.
        bool circular = true;
    };

    struct CcdStats
    {
        std::size_t invalid_peaks = 0; // corrected delay left the window (non-circular mode)
    };

    // Subtracts the per-measurement drift estimate. Also resets the CDEDAR result to the CCD result.
    inline CcdStats apply_ccd(PeakTable &table, const DriftTrack &track, const CcdOptions &opt = {})
    {
        if (track.estimate.size() != table.peaks.size())
            throw DataError("drift track does not cover the campaign");
        const int len = int(table.pdp_len);
        CcdStats stats;
        for (std::size_t k = 0; k < table.peaks.size(); ++k)
            for (auto &p : table.peaks[k])
            {
                p.ccd_bin = p.delay_bin - track.estimate[k];
                if (opt.circular)
                    p.ccd_bin = ((p.ccd_bin % len) + len) % len;
                p.corrected_bin = p.ccd_bin;
                p.valid = p.ccd_bin >= 0 && p.ccd_bin < len;
                if (!p.valid)
                    ++stats.invalid_peaks;
            }
        return stats;
    }

    // Channel measurements whose orientation is within max_diff_deg of each other in all four planes
    class Neighborhood
    {
    public:
        Neighborhood(const PeakTable &table, double max_diff_deg = 20.0)
        {
            std::vector<double> axes[4];
            for (const auto &e : table.entries)
                if (e.channel)
                {
                    const auto &o = e.orientation;
                    const double v[4] = {o.tx_az, o.tx_el, o.rx_az, o.rx_el};
                    for (int a = 0; a < 4; ++a)
                        axes[a].push_back(v[a]);
                }
            for (int a = 0; a < 4; ++a)
            {
                std::sort(axes[a].begin(), axes[a].end());
                axes[a].erase(std::unique(axes[a].begin(), axes[a].end()), axes[a].end());
                values_[a] = axes[a];
                const Plane plane = (a % 2 == 0) ? Plane::azimuth : Plane::elevation;
                close_[a].resize(axes[a].size());
                for (std::size_t i = 0; i < axes[a].size(); ++i)
                    for (std::size_t j = 0; j < axes[a].size(); ++j)
                        if (angular_difference(axes[a][i], axes[a][j], plane) <= max_diff_deg + 1e-9)
                            close_[a][i].push_back(j);
            }

            std::size_t cells = 1;
            for (int a = 0; a < 4; ++a)
                cells *= values_[a].size();
            cell_to_channel_.assign(cells, npos);

            std::size_t channels = 0;
            for (const auto &e : table.entries)
                if (e.channel)
                    channels = std::max(channels, *e.channel + 1);
            channel_cell_.assign(channels, npos);
            for (const auto &e : table.entries)
                if (e.channel)
                {
                    const std::size_t c = cell(e.orientation);
                    if (cell_to_channel_[c] != npos)
                        throw DataError("two channel measurements share orientation (m=" + std::to_string(cell_to_channel_[c]) +
                                        ", m=" + std::to_string(*e.channel) + ")");
                    cell_to_channel_[c] = *e.channel;
                    channel_cell_[*e.channel] = c;
                }
        }

        // Sorted channel indices in the neighborhood of channel m (including m)
        std::vector<std::size_t> of(std::size_t m) const
        {
            if (m >= channel_cell_.size() || channel_cell_[m] == npos)
                throw DataError("no channel measurement m=" + std::to_string(m));
            std::size_t idx[4], rest = channel_cell_[m];
            for (int a = 3; a >= 0; --a)
            {
                idx[a] = rest % values_[a].size();
                rest /= values_[a].size();
            }
            std::vector<std::size_t> out;
            for (std::size_t i0 : close_[0][idx[0]])
                for (std::size_t i1 : close_[1][idx[1]])
                    for (std::size_t i2 : close_[2][idx[2]])
                        for (std::size_t i3 : close_[3][idx[3]])
                        {
                            const std::size_t ch = cell_to_channel_[flat(i0, i1, i2, i3)];
                            if (ch != npos)
                                out.push_back(ch);
                        }
            std::sort(out.begin(), out.end());
            return out;
        }

    private:
        static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

        std::size_t flat(std::size_t i0, std::size_t i1, std::size_t i2, std::size_t i3) const
        {
            return ((i0 * values_[1].size() + i1) * values_[2].size() + i2) * values_[3].size() + i3;
        }

        std::size_t cell(const Orientation &o) const
        {
            const double v[4] = {o.tx_az, o.tx_el, o.rx_az, o.rx_el};
            std::size_t idx[4];
            for (int a = 0; a < 4; ++a)
                idx[a] = std::size_t(std::lower_bound(values_[a].begin(), values_[a].end(), v[a]) - values_[a].begin());
            return flat(idx[0], idx[1], idx[2], idx[3]);
        }

        std::vector<double> values_[4];
        std::vector<std::vector<std::size_t>> close_[4];
        std::vector<std::size_t> cell_to_channel_;
        std::vector<std::size_t> channel_cell_;
    };

    struct CdedarStats
    {
        std::size_t sweeps = 0; // including the final sweep without changes
        std::size_t moves = 0;  // single-bin decrements applied
        std::size_t moved_peaks = 0;
    };

    struct CdedarOptions
    {
        double max_diff_deg = 20.0;
        std::size_t max_sweeps = 10;
        int max_total_shift = 2;
    };

    // In-place sweeps over channel measurements (ascending m, then peak index). A peak moves one bin
    // earlier when the strongest peak of the neighborhood at its current delay or one bin earlier
    // sits one bin earlier; equal power keeps the peak where it is. References are not touched.
    inline CdedarStats apply_cdedar(PeakTable &table, const CdedarOptions &opt = {})
    {
        const Neighborhood hood(table, opt.max_diff_deg);

        std::vector<std::size_t> row_of_channel;
        for (std::size_t k = 0; k < table.entries.size(); ++k)
            if (const auto &ch = table.entries[k].channel)
            {
                if (*ch >= row_of_channel.size())
                    row_of_channel.resize(*ch + 1, std::numeric_limits<std::size_t>::max());
                row_of_channel[*ch] = k;
            }

        std::vector<std::vector<std::size_t>> neighbor_rows(row_of_channel.size());
        for (std::size_t m = 0; m < row_of_channel.size(); ++m)
        {
            if (row_of_channel[m] == std::numeric_limits<std::size_t>::max())
                continue;
            for (std::size_t n : hood.of(m))
                neighbor_rows[m].push_back(row_of_channel[n]);
        }

        std::vector<std::vector<int>> start(table.peaks.size());
        for (std::size_t k = 0; k < table.peaks.size(); ++k)
            for (const auto &p : table.peaks[k])
                start[k].push_back(p.corrected_bin);

        CdedarStats stats;
        for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep)
        {
            stats.sweeps = sweep;
            bool changed = false;
            for (std::size_t m = 0; m < row_of_channel.size(); ++m)
            {
                const std::size_t row = row_of_channel[m];
                if (row == std::numeric_limits<std::size_t>::max())
                    continue;
                for (auto &p : table.peaks[row])
                {
                    if (!p.valid || p.ccd_bin - p.corrected_bin >= opt.max_total_shift)
                        continue;
                    const int tau = p.corrected_bin;
                    double best_power = -std::numeric_limits<double>::infinity();
                    int best_delay = tau;
                    for (std::size_t nr : neighbor_rows[m])
                        for (const auto &q : table.peaks[nr])
                        {
                            if (!q.valid || (q.corrected_bin != tau && q.corrected_bin != tau - 1))
                                continue;
                            if (q.power_dbm > best_power || (q.power_dbm == best_power && q.corrected_bin > best_delay))
                            {
                                best_power = q.power_dbm;
                                best_delay = q.corrected_bin;
                            }
                        }
                    if (best_delay == tau - 1)
                    {
                        p.corrected_bin = tau - 1;
                        ++stats.moves;
                        changed = true;
                    }
                }
            }
            if (!changed)
            {
                for (std::size_t k = 0; k < table.peaks.size(); ++k)
                    for (std::size_t i = 0; i < table.peaks[k].size(); ++i)
                        if (table.peaks[k][i].corrected_bin != start[k][i])
                            ++stats.moved_peaks;
                return stats;
            }
        }
        throw DataError("CDEDAR did not converge within " + std::to_string(opt.max_sweeps) + " sweeps");
    }

    enum class Stage
    {
        raw,
        ccd,
        cdedar,
        ccd_cdedar
    };

    inline std::string to_string(Stage s)
    {
        switch (s)
        {
        case Stage::raw:
            return "raw";
        case Stage::ccd:
            return "ccd";
        case Stage::cdedar:
            return "cdedar";
        case Stage::ccd_cdedar:
            return "ccd+cdedar";
        }
        return "raw";
    }

    inline Stage parse_stage(const std::string &s)
    {
        for (Stage st : {Stage::raw, Stage::ccd, Stage::cdedar, Stage::ccd_cdedar})
            if (to_string(st) == s)
                return st;
        throw ConfigError("unknown stage '" + s + "' (expected raw, ccd, cdedar or ccd+cdedar)");
    }

    inline bool uses_ccd(Stage s) { return s == Stage::ccd || s == Stage::ccd_cdedar; }
    inline bool uses_cdedar(Stage s) { return s == Stage::cdedar || s == Stage::ccd_cdedar; }

    struct CorrectionResult
    {
        PeakTable table;
        std::optional<DriftTrack> track;
        CcdStats ccd;
        CdedarStats cdedar;
    };

    // Runs the requested correction chain on a fresh copy of the extracted peaks
    inline CorrectionResult correct(const PeakTable &peaks, Stage stage, const CdedarOptions &opt = {},
                                    const CcdOptions &ccd_opt = {})
    {
        CorrectionResult r;
        r.table = peaks;
        for (auto &row : r.table.peaks)
            for (auto &p : row)
            {
                p.ccd_bin = p.corrected_bin = p.delay_bin;
                p.valid = true;
            }
        if (uses_ccd(stage))
        {
            r.track = track_reference_drift(r.table);
            r.ccd = apply_ccd(r.table, *r.track, ccd_opt);
        }
        if (uses_cdedar(stage))
            r.cdedar = apply_cdedar(r.table, opt);
        return r;
    }
}

#endif
