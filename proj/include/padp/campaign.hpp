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

#ifndef PADP_CAMPAIGN_HPP
#define PADP_CAMPAIGN_HPP

#include "padp/model.hpp"

#include <string>
#include <vector>

namespace padp
{
    // One power-delay profile, pdp_len samples in dBm per delay bin
    struct PdpTrace
    {
        std::vector<double> power_dbm;
        Orientation orientation{};
        double timestamp_s = 0.0;

        friend bool operator==(const PdpTrace &, const PdpTrace &) = default;
    };

    struct Measurement
    {
        ScanEntry entry;
        PdpTrace trace;

        bool is_reference() const { return entry.is_reference(); }

        friend bool operator==(const Measurement &, const Measurement &) = default;
    };

    // Ordered measurements of one campaign (channel measurements interleaved with references)
    struct CampaignSet
    {
        std::string label; // e.g. SICL or SECL
        SounderConstants constants;
        ScanGrid grid;
        std::vector<Measurement> measurements;

        friend bool operator==(const CampaignSet &, const CampaignSet &) = default;
    };

    // Power values are stored on a 1e-4 dB grid so that the text formats round-trip bit-exactly
    inline double quantize_db(double v) { return std::round(v * 1e4) / 1e4; }

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
}

#endif
