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

#ifndef PADP_PDP_PROCESSING_HPP
#define PADP_PDP_PROCESSING_HPP

#include "padp/campaign.hpp"
#include "padp/error.hpp"
#include "padp/model.hpp"
#include "padp/parallel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace padp
{
    // Extracted PDP peak. ccd_bin and corrected_bin start equal to delay_bin and are
    // rewritten by the delay-correction stages.
    struct PeakRecord
    {
        std::size_t measurement = 0;        // sequence index within the campaign
        std::optional<std::size_t> channel; // channel measurement index m, empty for references
        std::size_t index = 0;              // peak index i within the measurement, by delay
        int delay_bin = 0;
        double delay_ns = 0.0;
        double power_dbm = 0.0; // peak bin plus its two neighbours, linear sum
        Orientation orientation{};
        int ccd_bin = 0;
        int corrected_bin = 0;
        bool valid = true;

        friend bool operator==(const PeakRecord &, const PeakRecord &) = default;
    };

    struct PeakOptions
    {
        double threshold_db = 20.0;
        std::size_t exclusion_bins = 50; // noise floor ignores bins this close to the strongest bin
    };

    // Linear-domain mean (in dBm) of the bins farther than `exclusion_bins` from the strongest bin
    inline double noise_floor(const PdpTrace &trace, std::size_t exclusion_bins = 50)
    {
        const auto &p = trace.power_dbm;
        if (p.empty())
            throw DataError("noise floor of an empty trace");
        const std::size_t peak = std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < p.size(); ++k)
        {
            const std::size_t dist = k > peak ? k - peak : peak - k;
            if (dist > exclusion_bins)
            {
                sum += db_to_linear(p[k]);
                ++count;
            }
        }
        if (count == 0)
            throw DataError("noise floor exclusion window covers the whole trace");
        return linear_to_db(sum / double(count));
    }

    // Local maxima of the raw trace at least threshold_db above the noise floor, ordered by delay.
    // A plateau counts once, at its lowest bin.
    inline std::vector<PeakRecord> extract_peaks(const PdpTrace &trace, const PeakOptions &opt = {},
                                                 double delay_bin_ns = SounderConstants{}.delay_bin_ns())
    {
        const auto &p = trace.power_dbm;
        std::vector<PeakRecord> peaks;
        if (p.empty())
            return peaks;
        const double threshold = noise_floor(trace, opt.exclusion_bins) + opt.threshold_db;
        const std::size_t n = p.size();

        std::size_t k = 0;
        while (k < n)
        {
            std::size_t end = k; // plateau [k, end]
            while (end + 1 < n && p[end + 1] == p[k])
                ++end;
            const bool left_lower = k == 0 || p[k - 1] < p[k];
            const bool right_lower = end + 1 == n || p[end + 1] < p[k];
            if (left_lower && right_lower && p[k] >= threshold)
            {
                double agg = db_to_linear(p[k]);
                if (k > 0)
                    agg += db_to_linear(p[k - 1]);
                if (k + 1 < n)
                    agg += db_to_linear(p[k + 1]);
                PeakRecord r;
                r.index = peaks.size();
                r.delay_bin = int(k);
                r.delay_ns = double(k) * delay_bin_ns;
                r.power_dbm = linear_to_db(agg);
                r.orientation = trace.orientation;
                r.ccd_bin = r.corrected_bin = r.delay_bin;
                peaks.push_back(r);
            }
            k = end + 1;
        }
        return peaks;
    }

    // Friis free-space received power in dBm
    inline double friis_power(double p_tx_dbm, double g_tx_dbi, double g_rx_dbi, double distance_m, double carrier_hz)
    {
        if (!(distance_m > 0.0))
            throw ConfigError("Friis distance must be positive");
        if (!(carrier_hz > 0.0))
            throw ConfigError("carrier frequency must be positive");
        const double lambda = 299792458.0 / carrier_hz;
        return p_tx_dbm + g_tx_dbi + g_rx_dbi + 20.0 * std::log10(lambda / (4.0 * std::numbers::pi * distance_m));
    }

    // Frequency-domain correction for the linear-power delay profile (r2c layout, pdp_len/2+1 points)
    struct EqualizerProfile
    {
        std::vector<std::complex<double>> correction;
        std::size_t pdp_len = 0;
        bool identity = false;
        int calibration_peak_bin = 0;
        double regularization_db = -40.0;
    };

    inline EqualizerProfile identity_equalizer(std::size_t pdp_len)
    {
        EqualizerProfile eq;
        eq.pdp_len = pdp_len;
        eq.identity = true;
        eq.correction.assign(pdp_len / 2 + 1, {1.0, 0.0});
        return eq;
    }

    namespace detail
    {
        // FFTW planning is not thread-safe; execution with the new-array interface is.
        inline std::mutex &fftw_planner_mutex()
        {
            static std::mutex m;
            return m;
        }

        struct FftwDeleter
        {
            void operator()(void *p) const { fftw_free(p); }
        };

        // Forward r2c of `x`, returns pdp_len/2+1 complex points
        inline std::vector<std::complex<double>> rfft(const std::vector<double> &x)
        {
            const int n = int(x.size());
            std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(std::size_t(n)));
            std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(std::size_t(n / 2 + 1)));
            std::copy(x.begin(), x.end(), in.get());
            fftw_plan plan;
            {
                std::lock_guard lock(fftw_planner_mutex());
                plan = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
            }
            fftw_execute(plan);
            {
                std::lock_guard lock(fftw_planner_mutex());
                fftw_destroy_plan(plan);
            }
            std::vector<std::complex<double>> y(std::size_t(n / 2 + 1));
            for (std::size_t k = 0; k < y.size(); ++k)
                y[k] = {out.get()[k][0], out.get()[k][1]};
            return y;
        }

        // Inverse c2r, normalized
        inline std::vector<double> irfft(const std::vector<std::complex<double>> &y, std::size_t n)
        {
            std::unique_ptr<fftw_complex, FftwDeleter> in(fftw_alloc_complex(n / 2 + 1));
            std::unique_ptr<double, FftwDeleter> out(fftw_alloc_real(n));
            for (std::size_t k = 0; k < n / 2 + 1; ++k)
            {
                in.get()[k][0] = y[k].real();
                in.get()[k][1] = y[k].imag();
            }
            fftw_plan plan;
            {
                std::lock_guard lock(fftw_planner_mutex());
                plan = fftw_plan_dft_c2r_1d(int(n), in.get(), out.get(), FFTW_ESTIMATE);
            }
            fftw_execute(plan);
            {
                std::lock_guard lock(fftw_planner_mutex());
                fftw_destroy_plan(plan);
            }
            std::vector<double> x(out.get(), out.get() + n);
            for (auto &v : x)
                v /= double(n);
            return x;
        }
    }

    // Regularized inverse of the hardware response measured through a flat calibration cable.
    // The response is gated at `gate_db` above the noise floor, shifted so the cable tap sits at
    // delay 0 and normalized to unit main tap, so the equalizer neither moves nor rescales the
    // channel. |H|^2 is floored at `regularization_db` below its peak.
    inline EqualizerProfile design_equalizer(const PdpTrace &cal_trace, double regularization_db = -40.0,
                                             double gate_db = 20.0, std::size_t exclusion_bins = 50)
    {
        const auto &p = cal_trace.power_dbm;
        if (p.size() < 2)
            throw CalibrationError("calibration trace is empty");
        const double floor_db = noise_floor(cal_trace, exclusion_bins);
        const std::size_t peak = std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
        if (!(p[peak] - floor_db >= gate_db))
            throw CalibrationError("calibration trace has no dominant response above the noise floor");

        const std::size_t n = p.size();
        const double floor_mw = db_to_linear(floor_db);
        const double gate_mw = db_to_linear(floor_db + gate_db);
        const double main_mw = db_to_linear(p[peak]) - floor_mw;
        std::vector<double> response(n, 0.0);
        bool spurs = false;
        for (std::size_t k = 0; k < n; ++k)
        {
            const double v = db_to_linear(p[k]);
            if (v >= gate_mw)
            {
                response[(k + n - peak) % n] = (v - floor_mw) / main_mw;
                spurs = spurs || k != peak;
            }
        }

        if (!spurs)
        {
            auto eq = identity_equalizer(n);
            eq.calibration_peak_bin = int(peak);
            eq.regularization_db = regularization_db;
            return eq;
        }

        const auto h = detail::rfft(response);
        double max_mag2 = 0.0;
        for (const auto &v : h)
            max_mag2 = std::max(max_mag2, std::norm(v));
        const double lambda = max_mag2 * db_to_linear(regularization_db);

        EqualizerProfile eq;
        eq.pdp_len = n;
        eq.calibration_peak_bin = int(peak);
        eq.regularization_db = regularization_db;
        eq.correction.resize(h.size());
        for (std::size_t k = 0; k < h.size(); ++k)
            eq.correction[k] = std::conj(h[k]) / std::max(std::norm(h[k]), lambda);
        return eq;
    }

    inline PdpTrace apply_equalizer(const PdpTrace &trace, const EqualizerProfile &eq)
    {
        if (trace.power_dbm.size() != eq.pdp_len || eq.correction.size() != eq.pdp_len / 2 + 1)
            throw DataError("equalizer length " + std::to_string(eq.pdp_len) + " does not match trace length " +
                            std::to_string(trace.power_dbm.size()));
        if (eq.identity)
            return trace;

        std::vector<double> lin(trace.power_dbm.size());
        double min_mw = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < lin.size(); ++k)
        {
            lin[k] = db_to_linear(trace.power_dbm[k]);
            min_mw = std::min(min_mw, lin[k]);
        }
        auto spec = detail::rfft(lin);
        for (std::size_t k = 0; k < spec.size(); ++k)
            spec[k] *= eq.correction[k];
        const auto eqd = detail::irfft(spec, lin.size());

        // the inverse can undershoot slightly on noise-only bins; power must stay positive
        const double clamp_mw = 0.01 * min_mw;
        PdpTrace out = trace;
        for (std::size_t k = 0; k < eqd.size(); ++k)
            out.power_dbm[k] = quantize_db(linear_to_db(std::max(eqd[k], clamp_mw)));
        return out;
    }
    // Peaks of a whole campaign, one list per measurement in sequence order
    struct PeakTable
    {
        std::vector<ScanEntry> entries;
        std::vector<std::vector<PeakRecord>> peaks;
        std::size_t pdp_len = 0;
        double delay_bin_ns = 0.0;

        std::size_t peak_count() const
        {
            std::size_t n = 0;
            for (const auto &p : peaks)
                n += p.size();
            return n;
        }

        friend bool operator==(const PeakTable &, const PeakTable &) = default;
    };

    inline PeakTable extract_campaign_peaks(const CampaignSet &campaign, const PeakOptions &opt = {},
                                            const EqualizerProfile *eq = nullptr, unsigned threads = 1)
    {
        PeakTable table;
        table.pdp_len = campaign.constants.pdp_len;
        table.delay_bin_ns = campaign.constants.delay_bin_ns();
        const auto &ms = campaign.measurements;
        table.entries.resize(ms.size());
        table.peaks.resize(ms.size());
        parallel_for(ms.size(), threads, [&](std::size_t k)
                     {
            const auto &meas = ms[k];
            if (meas.trace.power_dbm.size() != table.pdp_len)
                throw DataError("measurement " + std::to_string(meas.entry.sequence) + " has " +
                                std::to_string(meas.trace.power_dbm.size()) + " samples, expected " +
                                std::to_string(table.pdp_len));
            auto peaks = eq ? extract_peaks(apply_equalizer(meas.trace, *eq), opt, table.delay_bin_ns)
                            : extract_peaks(meas.trace, opt, table.delay_bin_ns);
            for (auto &p : peaks)
            {
                p.measurement = meas.entry.sequence;
                p.channel = meas.entry.channel;
            }
            table.entries[k] = meas.entry;
            table.peaks[k] = std::move(peaks); });
        return table;
    }
}

#endif
