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

#ifndef PADP_MPC_EXTRACTION_HPP
#define PADP_MPC_EXTRACTION_HPP

#include "padp/model.hpp"
#include "padp/pdp_processing.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace padp
{
    // Paths weaker than this cannot be measured by the sounder
    inline constexpr double max_measurable_path_loss_db = 185.0;

    struct ExtractedMpc
    {
        Mpc mpc;
        std::size_t measurement = 0; // sequence index of the winning observation
        std::size_t channel = 0;     // m of the winning observation
        std::size_t peak = 0;        // i of the winning observation
        double power_dbm = 0.0;

        friend bool operator==(const ExtractedMpc &, const ExtractedMpc &) = default;
    };

    struct ExtractedMpcSet
    {
        std::string label; // campaign and stage, e.g. "SECL ccd+cdedar"
        std::vector<ExtractedMpc> mpcs; // ascending delay bin
        std::size_t dropped_below_limit = 0;

        friend bool operator==(const ExtractedMpcSet &, const ExtractedMpcSet &) = default;
    };

    // One MPC per distinct corrected delay bin, taken from the strongest observation in that bin.
    // Angles are the gimbal orientation of that observation. Ties go to the smaller m.
    inline ExtractedMpcSet extract_mpcs(const PeakTable &table, const SounderConstants &c, std::string label = {})
    {
        std::map<int, const PeakRecord *> bins;
        std::vector<const PeakRecord *> order;
        for (std::size_t k = 0; k < table.peaks.size(); ++k)
            for (const auto &p : table.peaks[k])
                if (p.channel && p.valid)
                    order.push_back(&p);
        std::sort(order.begin(), order.end(), [](const PeakRecord *a, const PeakRecord *b)
                  { return *a->channel != *b->channel ? *a->channel < *b->channel : a->index < b->index; });
        for (const PeakRecord *p : order)
        {
            auto &best = bins[p->corrected_bin];
            if (!best || p->power_dbm > best->power_dbm)
                best = p;
        }

        ExtractedMpcSet out;
        out.label = std::move(label);
        const double bin_ns = c.delay_bin_ns();
        for (const auto &[bin, best] : bins)
        {
            const PeakRecord &p = *best;
            ExtractedMpc e;
            e.mpc.aod_az = p.orientation.tx_az;
            e.mpc.aod_el = p.orientation.tx_el;
            e.mpc.aoa_az = p.orientation.rx_az;
            e.mpc.aoa_el = p.orientation.rx_el;
            e.mpc.delay_bin = bin;
            e.mpc.delay_ns = double(bin) * bin_ns;
            e.mpc.gain_db = -c.tx_power_dbm - 2.0 * c.boresight_gain_dbi + p.power_dbm;
            e.measurement = p.measurement;
            e.channel = *p.channel;
            e.peak = p.index;
            e.power_dbm = p.power_dbm;
            if (e.mpc.gain_db < -max_measurable_path_loss_db)
            {
                ++out.dropped_below_limit;
                continue;
            }
            out.mpcs.push_back(e);
        }
        return out;
    }
}

#endif
