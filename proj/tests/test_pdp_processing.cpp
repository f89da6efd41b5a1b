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

#include "padp/pdp_processing.hpp"
#include "padp/sounder_sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace padp;

namespace
{
    const SounderConstants C;

    PdpTrace flat_trace(double dbm, std::size_t n = 2048)
    {
        PdpTrace t;
        t.power_dbm.assign(n, dbm);
        return t;
    }

    // Reference local-maximum scan: plateau of equal values bounded by lower values (or the
    // trace ends), reported at its first bin
    std::vector<int> brute_force_maxima(const std::vector<double> &p, double threshold)
    {
        std::vector<int> out;
        const int n = int(p.size());
        for (int k = 0; k < n; ++k)
        {
            if (p[std::size_t(k)] < threshold)
                continue;
            if (k > 0 && p[std::size_t(k - 1)] >= p[std::size_t(k)])
                continue; // not the first bin of a rise
            int e = k;
            while (e + 1 < n && p[std::size_t(e + 1)] == p[std::size_t(k)])
                ++e;
            if (e + 1 < n && p[std::size_t(e + 1)] > p[std::size_t(k)])
                continue;
            out.push_back(k);
        }
        return out;
    }

    // Six paths at aligned orientation, bins and aggregated powers of the example LOS PDP
    struct Planted
    {
        int bin;
        double power_dbm;
    };
    const std::vector<Planted> example_peaks = {{10, -41.9}, {32, -80.4}, {47, -72.8}, {53, -80.1}, {70, -78.1}, {74, -78.9}};

    PdpTrace example_trace(std::uint64_t seed)
    {
        ScenarioConfig cfg;
        const double leak_gain = 10.0 * std::log10(1.0 + 2.0 * db_to_linear(cfg.leakage_db));
        GroundTruth truth;
        for (const auto &p : example_peaks)
        {
            Mpc m;
            m.delay_bin = p.bin;
            m.delay_ns = p.bin * C.delay_bin_ns();
            // path gain such that peak bin plus both leakage bins sum to the listed power
            m.gain_db = p.power_dbm - C.tx_power_dbm - 2.0 * C.boresight_gain_dbi - leak_gain;
            truth.paths.push_back(m);
        }
        RandomStream rng(seed, StreamTag::noise);
        return synthesize_pdp(truth, {0, 0, 0, 0}, 0.0, cfg, C, rng);
    }
}

// ---------------------------------------------------------------------------------------------
// noise_floor

TEST(NoiseFloor, FlatTrace)
{
    EXPECT_NEAR(noise_floor(flat_trace(-95.0)), -95.0, 1e-12);
}

TEST(NoiseFloor, ExcludesBinsNearStrongest)
{
    auto t = flat_trace(-100.0, 200);
    t.power_dbm[100] = -40.0;
    t.power_dbm[140] = -60.0; // within 50 bins, ignored
    EXPECT_NEAR(noise_floor(t, 50), -100.0, 1e-12);
    // average is linear: one bin 10 dB up among 10
    auto u = flat_trace(-100.0, 10);
    u.power_dbm[0] = -90.0;
    u.power_dbm[9] = -30.0;
    const double expect = 10.0 * std::log10((1e-9 + 8e-10) / 9.0);
    EXPECT_NEAR(noise_floor(u, 0), expect, 1e-9);
}

TEST(NoiseFloor, Errors)
{
    EXPECT_THROW(noise_floor(PdpTrace{}), DataError);
    EXPECT_THROW(noise_floor(flat_trace(-90, 20), 50), DataError);
}

// ---------------------------------------------------------------------------------------------
// extract_peaks

TEST(ExtractPeaks, ExamplePdpSixPeaks)
{
    const auto peaks = extract_peaks(example_trace(4));
    ASSERT_EQ(peaks.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i)
    {
        EXPECT_EQ(peaks[i].index, i);
        EXPECT_EQ(peaks[i].delay_bin, example_peaks[i].bin);
        EXPECT_NEAR(peaks[i].power_dbm, example_peaks[i].power_dbm, 0.2);
    }
    EXPECT_NEAR(peaks[0].delay_ns, 6.51, 0.005);
    EXPECT_NEAR(peaks[1].delay_ns, 20.83, 0.005);
    EXPECT_NEAR(peaks[5].delay_ns, 48.18, 0.005);
}

TEST(ExtractPeaks, PureNoiseHasNoPeaks)
{
    GroundTruth empty;
    ScenarioConfig cfg;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        RandomStream rng(seed, StreamTag::noise);
        EXPECT_TRUE(extract_peaks(synthesize_pdp(empty, {}, 0.0, cfg, C, rng)).empty()) << seed;
    }
}

TEST(ExtractPeaks, MatchesBruteForceScan)
{
    RandomStream rng(77, StreamTag::scenario);
    for (int t = 0; t < 300; ++t)
    {
        // coarse values make plateaus common
        auto trace = flat_trace(-100.0, 300);
        for (auto &v : trace.power_dbm)
            v = -100.0 + std::floor(rng.uniform() * 4.0);
        const int paths = int(rng.below(6));
        for (int i = 0; i < paths; ++i)
        {
            const std::size_t b = rng.below(300);
            trace.power_dbm[b] = std::floor(-70.0 + 10.0 * rng.uniform());
            if (rng.uniform() < 0.5 && b + 1 < 300)
                trace.power_dbm[b + 1] = trace.power_dbm[b]; // adjacent twin
        }
        const PeakOptions opt{20.0, 20};
        const auto peaks = extract_peaks(trace, opt);
        const auto expect = brute_force_maxima(trace.power_dbm, noise_floor(trace, 20) + 20.0);
        ASSERT_EQ(peaks.size(), expect.size()) << t;
        for (std::size_t i = 0; i < peaks.size(); ++i)
            EXPECT_EQ(peaks[i].delay_bin, expect[i]);
    }
}

TEST(ExtractPeaks, TwoPathsOneBinApart)
{
    auto t = flat_trace(-110.0, 400);
    t.power_dbm[200] = -60.0;
    t.power_dbm[201] = -65.0;
    auto peaks = extract_peaks(t);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_EQ(peaks[0].delay_bin, 200);
    t.power_dbm[201] = -60.0; // plateau, lowest bin wins
    peaks = extract_peaks(t);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_EQ(peaks[0].delay_bin, 200);
    t.power_dbm[202] = -50.0;
    peaks = extract_peaks(t);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_EQ(peaks[0].delay_bin, 202);
}

TEST(ExtractPeaks, TraceEdgesCanBePeaks)
{
    auto t = flat_trace(-110.0, 400);
    t.power_dbm[0] = -60.0;
    t.power_dbm[399] = -61.0;
    const auto peaks = extract_peaks(t);
    ASSERT_EQ(peaks.size(), 2u);
    EXPECT_EQ(peaks[0].delay_bin, 0);
    EXPECT_EQ(peaks[1].delay_bin, 399);
}

TEST(ExtractPeaks, AggregatesAdjacentBins)
{
    auto t = flat_trace(-120.0, 400);
    t.power_dbm[100] = -60.0;
    t.power_dbm[99] = -63.0;
    t.power_dbm[101] = -70.0;
    const auto peaks = extract_peaks(t);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_NEAR(peaks[0].power_dbm, 10.0 * std::log10(1e-6 + db_to_linear(-63.0) + 1e-7), 1e-12);
}

TEST(ExtractPeaks, InvariantUnderConstantOffset)
{
    const auto base = example_trace(9);
    const auto a = extract_peaks(base);
    for (double off : {-30.0, 7.5, 40.0})
    {
        auto shifted = base;
        for (auto &v : shifted.power_dbm)
            v += off;
        const auto b = extract_peaks(shifted);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            EXPECT_EQ(a[i].delay_bin, b[i].delay_bin);
            EXPECT_NEAR(b[i].power_dbm - a[i].power_dbm, off, 1e-9);
        }
    }
}

TEST(ExtractPeaks, AggregatedPowerAtLeastRawBin)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        const auto t = example_trace(seed);
        for (const auto &p : extract_peaks(t))
            EXPECT_GT(p.power_dbm, t.power_dbm[std::size_t(p.delay_bin)]);
    }
}

TEST(ExtractPeaks, NoMorePeaksThanPlantedPaths)
{
    const auto g = default_grid();
    ScenarioConfig cfg;
    cfg.n_paths = 40;
    const auto truth = generate_scenario(cfg, g);
    std::size_t k = 0;
    for (const auto &e : scan_order(g))
    {
        if (k++ % 7)
            continue;
        RandomStream rng(cfg.seed, StreamTag::noise, e.sequence);
        EXPECT_LE(extract_peaks(synthesize_pdp(truth, e.orientation, 0.0, cfg, C, rng)).size(), truth.paths.size());
    }
}

// ---------------------------------------------------------------------------------------------
// friis_power

TEST(Friis, TwoMetreLink)
{
    EXPECT_NEAR(friis_power(-10, 17, 17, 2.0, 28e9), -43.4, 0.05);
}

TEST(Friis, InverseSquare)
{
    EXPECT_NEAR(friis_power(-10, 17, 17, 2.0, 28e9) - friis_power(-10, 17, 17, 4.0, 28e9), 20.0 * std::log10(2.0), 1e-12);
    EXPECT_NEAR(20.0 * std::log10(2.0), 6.02, 0.001);
}

TEST(Friis, UnitFreeSpaceTerm)
{
    const double f = 28e9;
    const double d = 299792458.0 / f / (4.0 * std::numbers::pi);
    EXPECT_NEAR(friis_power(-10, 17, 17, d, f), 24.0, 1e-12);
}

TEST(Friis, MonotoneAndAdditive)
{
    double prev = friis_power(0, 0, 0, 0.1, 28e9);
    for (double d = 0.2; d < 100.0; d *= 1.3)
    {
        const double p = friis_power(0, 0, 0, d, 28e9);
        EXPECT_LT(p, prev);
        prev = p;
        EXPECT_NEAR(friis_power(3, 0, 0, d, 28e9) - p, 3.0, 1e-12);
        EXPECT_NEAR(friis_power(0, 5, 0, d, 28e9) - p, 5.0, 1e-12);
        EXPECT_NEAR(friis_power(0, 0, -2, d, 28e9) - p, -2.0, 1e-12);
    }
}

TEST(Friis, NonPositiveDistance)
{
    EXPECT_THROW(friis_power(-10, 17, 17, 0.0, 28e9), ConfigError);
    EXPECT_THROW(friis_power(-10, 17, 17, -1.0, 28e9), ConfigError);
}

// ---------------------------------------------------------------------------------------------
// equalizer

namespace
{
    PdpTrace calibration(const HardwareResponse &hw, std::uint64_t seed = 1)
    {
        RandomStream rng(seed, StreamTag::calibration);
        return synthesize_calibration_trace(hw, C, -30.0, 10, -103.0, rng);
    }

    PdpTrace distorted_los(std::uint64_t seed)
    {
        ScenarioConfig cfg;
        cfg.n_paths = 1;
        cfg.hardware = default_spur_profile();
        const auto truth = generate_scenario(cfg);
        RandomStream rng(seed, StreamTag::noise);
        return synthesize_pdp(truth, {0, 0, 0, 0}, 0.0, cfg, C, rng);
    }
}

TEST(Equalizer, FlatHardwareGivesIdentity)
{
    const auto eq = design_equalizer(calibration(HardwareResponse{}));
    EXPECT_TRUE(eq.identity);
    for (const auto &v : eq.correction)
    {
        EXPECT_NEAR(10.0 * std::log10(std::abs(v)), 0.0, 1e-9);
    }
}

TEST(Equalizer, IdentityIsBitExact)
{
    const auto t = example_trace(2);
    EXPECT_EQ(apply_equalizer(t, identity_equalizer(2048)), t);
}

TEST(Equalizer, NoDominantResponseIsCalibrationError)
{
    EXPECT_THROW(design_equalizer(flat_trace(-100.0)), CalibrationError);
    EXPECT_THROW(design_equalizer(PdpTrace{}), CalibrationError);
    GroundTruth empty;
    ScenarioConfig cfg;
    RandomStream rng(1, StreamTag::noise);
    EXPECT_THROW(design_equalizer(synthesize_pdp(empty, {}, 0.0, cfg, C, rng)), CalibrationError);
}

TEST(Equalizer, LengthMismatch)
{
    EXPECT_THROW(apply_equalizer(flat_trace(-100.0, 100), identity_equalizer(2048)), DataError);
    const auto eq = design_equalizer(calibration(default_spur_profile()));
    EXPECT_THROW(apply_equalizer(flat_trace(-100.0, 1024), eq), DataError);
}

TEST(Equalizer, CalibrationResponseCollapsesToOneTap)
{
    const auto cal = calibration(default_spur_profile());
    const auto eq = design_equalizer(cal);
    EXPECT_FALSE(eq.identity);
    const auto out = apply_equalizer(cal, eq);
    const auto peak = std::size_t(std::max_element(out.power_dbm.begin(), out.power_dbm.end()) - out.power_dbm.begin());
    EXPECT_EQ(peak, 10u);
    for (std::size_t k = 0; k < out.power_dbm.size(); ++k)
        if (k < 9 || k > 11)
        {
            EXPECT_LE(out.power_dbm[k], out.power_dbm[peak] - 40.0) << k;
        }
}

TEST(Equalizer, SpursReducedByTwentyDb)
{
    const auto eq = design_equalizer(calibration(default_spur_profile()));
    const auto before = distorted_los(3);
    const auto after = apply_equalizer(before, eq);
    for (const auto &s : default_spur_profile().spurs)
    {
        const std::size_t b = std::size_t((10 + s.offset_bins + 2048) % 2048);
        EXPECT_GE(before.power_dbm[b] - after.power_dbm[b], 20.0) << s.offset_bins;
    }
    // the spurs no longer show up as peaks
    EXPECT_GT(extract_peaks(before).size(), 1u);
    EXPECT_EQ(extract_peaks(after).size(), 1u);
}

TEST(Equalizer, LosPowerCloseToFriisAfterEqualization)
{
    const auto eq = design_equalizer(calibration(default_spur_profile(), 5));
    const auto peaks = extract_peaks(apply_equalizer(distorted_los(8), eq));
    ASSERT_FALSE(peaks.empty());
    EXPECT_EQ(peaks[0].delay_bin, 10);
    EXPECT_LE(std::abs(peaks[0].power_dbm - friis_power(-10, 17, 17, 2.0, 28e9)), 1.5);
}

// ---------------------------------------------------------------------------------------------
// campaign peaks

TEST(CampaignPeaks, ThreadCountDoesNotChangeResults)
{
    ScenarioConfig cfg;
    cfg.n_paths = 50;
    ScanGrid g = default_grid();
    g.tx_az = {-20.0, 0.0, 20.0};
    const auto truth = generate_scenario(cfg, g);
    const auto sim = run_campaign(truth, g, C, {}, cfg, "SICL", 4);
    const auto a = extract_campaign_peaks(sim.campaign, {}, nullptr, 1);
    const auto b = extract_campaign_peaks(sim.campaign, {}, nullptr, 6);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.entries.size(), sim.campaign.measurements.size());
    for (std::size_t k = 0; k < a.peaks.size(); ++k)
        for (std::size_t i = 0; i < a.peaks[k].size(); ++i)
        {
            const auto &p = a.peaks[k][i];
            EXPECT_EQ(p.measurement, k);
            EXPECT_EQ(p.index, i);
            EXPECT_EQ(p.channel, a.entries[k].channel);
            if (i)
            {
                EXPECT_GT(p.delay_bin, a.peaks[k][i - 1].delay_bin);
            }
        }
}
