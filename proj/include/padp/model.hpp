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

#ifndef PADP_MODEL_HPP
#define PADP_MODEL_HPP

#include "padp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace padp
{
    inline constexpr double speed_of_light_m_per_ns = 0.299792458;

    // Gimbal factory limits of the PTU used by the sounder
    inline constexpr double azimuth_limit_deg = 167.98;
    inline constexpr double elevation_min_deg = -90.0;
    inline constexpr double elevation_max_deg = 30.0;

    enum class Plane
    {
        azimuth,
        elevation
    };

    // Antenna pointing of both gimbals for one measurement, in degrees.
    // Angles are the exact decimal values of the scan grid, so equality is meaningful.
    struct Orientation
    {
        double tx_az = 0.0;
        double tx_el = 0.0;
        double rx_az = 0.0;
        double rx_el = 0.0;

        friend bool operator==(const Orientation &, const Orientation &) = default;
    };

    // Sounder constants for the 2 GHz bandwidth mode
    struct SounderConstants
    {
        double sample_rate_gsps = 3.072;
        std::size_t pdp_len = 2048;
        double tx_power_dbm = -10.0;
        double boresight_gain_dbi = 17.0;
        double beamwidth_az_deg = 24.0;
        double beamwidth_el_deg = 26.0;
        double back_lobe_gain_dbi = -10.0;
        double carrier_hz = 28.0e9;

        // 2x oversampled sequence, one delay bin is two ADC samples
        double delay_bin_ns() const { return 2.0 / sample_rate_gsps; }
        double max_delay_ns() const { return delay_bin_ns() * double(pdp_len); }
        double wavelength_m() const { return 299792458.0 / carrier_hz; }

        friend bool operator==(const SounderConstants &, const SounderConstants &) = default;
    };

    // Six-dimensional multipath component descriptor. Gain is the path gain in dB
    // (negative for attenuation), delay is kept both in ns and as the integer bin.
    struct Mpc
    {
        double aod_az = 0.0;
        double aod_el = 0.0;
        double aoa_az = 0.0;
        double aoa_el = 0.0;
        double delay_ns = 0.0;
        int delay_bin = 0;
        double gain_db = 0.0;

        friend bool operator==(const Mpc &, const Mpc &) = default;
    };

    struct ScanGrid
    {
        std::vector<double> tx_az;
        std::vector<double> tx_el;
        std::vector<double> rx_az;
        std::vector<double> rx_el;
        Orientation reference{};
        std::size_t reference_interval = 300;

        std::size_t channel_count() const { return tx_az.size() * tx_el.size() * rx_az.size() * rx_el.size(); }

        // K = start + end + one after every full interval that is not the last measurement
        std::size_t reference_count() const
        {
            const std::size_t m = channel_count();
            if (m == 0 || reference_interval == 0)
                return 2;
            return 2 + (m - 1) / reference_interval;
        }

        friend bool operator==(const ScanGrid &, const ScanGrid &) = default;
    };

    // {-167.98, -160, -140, ..., 160, 167.98}
    inline std::vector<double> default_azimuths()
    {
        std::vector<double> az{-azimuth_limit_deg};
        for (int a = -160; a <= 160; a += 20)
            az.push_back(double(a));
        az.push_back(azimuth_limit_deg);
        return az;
    }

    inline ScanGrid default_grid()
    {
        ScanGrid g;
        g.tx_az = default_azimuths();
        g.rx_az = default_azimuths();
        g.tx_el = {-20.0, 0.0, 20.0};
        g.rx_el = {-20.0, 0.0, 20.0};
        return g;
    }

    inline void validate_grid(const ScanGrid &g)
    {
        auto check = [](const std::vector<double> &list, const char *name, Plane plane)
        {
            if (list.empty())
                throw ConfigError(std::string("scan grid list '") + name + "' is empty");
            for (double a : list)
            {
                const bool ok = plane == Plane::azimuth
                                    ? (a >= -azimuth_limit_deg && a <= azimuth_limit_deg)
                                    : (a >= elevation_min_deg && a <= elevation_max_deg);
                if (!ok || !std::isfinite(a))
                    throw ConfigError(std::string("scan grid list '") + name + "' has angle outside gimbal limits: " + std::to_string(a));
            }
        };
        check(g.tx_az, "tx_az", Plane::azimuth);
        check(g.tx_el, "tx_el", Plane::elevation);
        check(g.rx_az, "rx_az", Plane::azimuth);
        check(g.rx_el, "rx_el", Plane::elevation);
        if (g.reference_interval == 0)
            throw ConfigError("scan grid reference_interval must be positive");
    }

    // Minimal non-negative angular difference; azimuth wraps on the circle.
    inline double angular_difference(double a, double b, Plane plane)
    {
        double d = std::abs(a - b);
        if (plane == Plane::azimuth)
        {
            d = std::fmod(d, 360.0);
            d = std::min(d, 360.0 - d);
        }
        return d;
    }

    // Signed azimuth offset a - b wrapped into (-180, 180]
    inline double wrapped_offset(double a, double b)
    {
        double d = std::fmod(a - b, 360.0);
        if (d > 180.0)
            d -= 360.0;
        else if (d <= -180.0)
            d += 360.0;
        return d;
    }

    struct ScanEntry
    {
        std::size_t sequence = 0;                // position in the full measurement sequence (one per second)
        std::optional<std::size_t> channel;      // channel measurement index m, empty for references
        std::optional<std::size_t> reference;    // reference index k, empty for channel measurements
        Orientation orientation{};

        bool is_reference() const { return reference.has_value(); }

        friend bool operator==(const ScanEntry &, const ScanEntry &) = default;
    };

    // Elevation-major sweep where azimuth direction alternates after every elevation step.
    inline std::vector<std::pair<double, double>> boustrophedon(const std::vector<double> &az, const std::vector<double> &el)
    {
        std::vector<std::pair<double, double>> out;
        out.reserve(az.size() * el.size());
        for (std::size_t e = 0; e < el.size(); ++e)
        {
            if (e % 2 == 0)
                for (std::size_t a = 0; a < az.size(); ++a)
                    out.emplace_back(az[a], el[e]);
            else
                for (std::size_t a = az.size(); a-- > 0;)
                    out.emplace_back(az[a], el[e]);
        }
        return out;
    }

    // Full measurement sequence: reference, channel measurements with a reference revisit after
    // every `reference_interval` of them, and a closing reference. RX runs through all of its
    // combinations before TX advances.
    inline std::vector<ScanEntry> scan_order(const ScanGrid &grid)
    {
        validate_grid(grid);

        auto sorted = [](std::vector<double> v)
        {
            std::sort(v.begin(), v.end());
            return v;
        };
        const auto tx = boustrophedon(sorted(grid.tx_az), sorted(grid.tx_el));
        const auto rx = boustrophedon(sorted(grid.rx_az), sorted(grid.rx_el));
        const std::size_t total_channels = tx.size() * rx.size();

        std::vector<ScanEntry> seq;
        seq.reserve(total_channels + grid.reference_count());
        std::size_t k = 0, m = 0;

        auto push_reference = [&]
        {
            ScanEntry e;
            e.sequence = seq.size();
            e.reference = k++;
            e.orientation = grid.reference;
            seq.push_back(e);
        };

        push_reference();
        for (const auto &[tx_az, tx_el] : tx)
            for (const auto &[rx_az, rx_el] : rx)
            {
                ScanEntry e;
                e.sequence = seq.size();
                e.channel = m++;
                e.orientation = {tx_az, tx_el, rx_az, rx_el};
                seq.push_back(e);
                if (m % grid.reference_interval == 0 && m != total_channels)
                    push_reference();
            }
        push_reference();
        return seq;
    }
}

#endif
