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

#ifndef PADP_IO_HPP
#define PADP_IO_HPP

#include "padp/campaign.hpp"
#include "padp/delay_correction.hpp"
#include "padp/error.hpp"
#include "padp/model.hpp"
#include "padp/mpc_extraction.hpp"
#include "padp/mpc_matching.hpp"
#include "padp/pdp_processing.hpp"
#include "padp/sounder_sim.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <vector>

namespace padp
{
    inline constexpr std::string_view campaign_magic = "# padp-campaign v1 ";
    inline constexpr std::string_view peaks_magic = "# padp peaks v1";
    inline constexpr std::string_view mpcs_magic = "# padp mpcs v1";
    inline constexpr std::string_view truth_magic = "# padp ground-truth v1";
    inline constexpr std::string_view drift_magic = "# padp drift v1";
    inline constexpr std::string_view drift_track_magic = "# padp drift-track v1";
    inline constexpr std::string_view changes_magic = "# padp cdedar-changes v1";

    // ---------------------------------------------------------------------------------------------
    // Text helpers

    // Shortest decimal that parses back to the same double
    inline std::string format_double(double v)
    {
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, r.ptr);
    }

    inline std::string format_fixed4(double v)
    {
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 4);
        std::string s(buf, r.ptr);
        return s == "-0.0000" ? "0.0000" : s;
    }

    inline double parse_double(std::string_view s, const std::string &where)
    {
        double v = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw DataError(where + ": cannot parse number '" + std::string(s) + "'");
        return v;
    }

    template <typename Int>
    inline Int parse_int(std::string_view s, const std::string &where)
    {
        Int v{};
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw DataError(where + ": cannot parse integer '" + std::string(s) + "'");
        return v;
    }

    inline std::vector<std::string_view> split(std::string_view line, char sep)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (true)
        {
            const std::size_t p = line.find(sep, start);
            out.push_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
            if (p == std::string_view::npos)
                break;
            start = p + 1;
        }
        return out;
    }

    inline std::vector<std::string_view> split_ws(std::string_view line)
    {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < line.size())
        {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
                ++i;
            const std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
                ++i;
            if (i > start)
                out.push_back(line.substr(start, i - start));
        }
        return out;
    }

    inline std::vector<std::string> read_lines(std::istream &in)
    {
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line))
        {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            lines.push_back(std::move(line));
        }
        return lines;
    }

    inline std::string read_file(const std::filesystem::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        if (!in)
            throw DataError("cannot open '" + p.string() + "' for reading");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    // Writes via a temporary file in the same directory and renames it into place
    inline void write_file_atomic(const std::filesystem::path &p, const std::string &content)
    {
        if (p.has_parent_path())
            std::filesystem::create_directories(p.parent_path());
        auto tmp = p;
        tmp += ".tmp." + std::to_string(::getpid());
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw DataError("cannot open '" + tmp.string() + "' for writing");
            out << content;
            out.flush();
            if (!out)
                throw DataError("failed writing '" + tmp.string() + "'");
        }
        std::error_code ec;
        std::filesystem::rename(tmp, p, ec);
        if (ec)
        {
            std::filesystem::remove(tmp);
            throw DataError("cannot move '" + tmp.string() + "' to '" + p.string() + "': " + ec.message());
        }
    }

    inline std::uint64_t fnv1a64(std::string_view data)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : data)
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    inline std::string hex64(std::uint64_t v)
    {
        static const char *digits = "0123456789abcdef";
        std::string s(16, '0');
        for (int i = 15; i >= 0; --i, v >>= 4)
            s[std::size_t(i)] = digits[v & 0xf];
        return s;
    }

    // Checks the versioned first line of a CSV-style file and returns the lines after it
    inline std::vector<std::string> expect_magic(std::istream &in, std::string_view magic, const std::string &what)
    {
        auto lines = read_lines(in);
        if (lines.empty() || lines.front() != magic)
            throw DataError(what + ": missing or unsupported header, expected '" + std::string(magic) + "'");
        lines.erase(lines.begin());
        return lines;
    }

    // "# key: value" metadata line
    inline std::string meta_value(const std::string &line, std::string_view key, const std::string &what)
    {
        const std::string prefix = "# " + std::string(key) + ": ";
        if (line.rfind(prefix, 0) != 0)
            throw DataError(what + ": expected '" + prefix + "...' line");
        return line.substr(prefix.size());
    }

    inline std::string_view field(const std::vector<std::string_view> &f, std::size_t i, const std::string &where)
    {
        if (i >= f.size())
            throw DataError(where + ": missing column " + std::to_string(i + 1));
        return f[i];
    }

    // ---------------------------------------------------------------------------------------------
    // JSON views of the configuration types

    inline nlohmann::json to_json(const SounderConstants &c)
    {
        return {{"sample_rate_gsps", c.sample_rate_gsps}, {"pdp_len", c.pdp_len}, {"tx_power_dbm", c.tx_power_dbm},
                {"boresight_gain_dbi", c.boresight_gain_dbi}, {"beamwidth_az_deg", c.beamwidth_az_deg},
                {"beamwidth_el_deg", c.beamwidth_el_deg}, {"back_lobe_gain_dbi", c.back_lobe_gain_dbi},
                {"carrier_hz", c.carrier_hz}};
    }

    inline SounderConstants constants_from_json(const nlohmann::json &j)
    {
        SounderConstants c;
        c.sample_rate_gsps = j.at("sample_rate_gsps").get<double>();
        c.pdp_len = j.at("pdp_len").get<std::size_t>();
        c.tx_power_dbm = j.at("tx_power_dbm").get<double>();
        c.boresight_gain_dbi = j.at("boresight_gain_dbi").get<double>();
        c.beamwidth_az_deg = j.at("beamwidth_az_deg").get<double>();
        c.beamwidth_el_deg = j.at("beamwidth_el_deg").get<double>();
        c.back_lobe_gain_dbi = j.at("back_lobe_gain_dbi").get<double>();
        c.carrier_hz = j.at("carrier_hz").get<double>();
        return c;
    }

    inline nlohmann::json to_json(const Orientation &o)
    {
        return {{"tx_az", o.tx_az}, {"tx_el", o.tx_el}, {"rx_az", o.rx_az}, {"rx_el", o.rx_el}};
    }

    inline Orientation orientation_from_json(const nlohmann::json &j)
    {
        return {j.at("tx_az").get<double>(), j.at("tx_el").get<double>(), j.at("rx_az").get<double>(), j.at("rx_el").get<double>()};
    }

    inline nlohmann::json to_json(const ScanGrid &g)
    {
        return {{"tx_az", g.tx_az}, {"tx_el", g.tx_el}, {"rx_az", g.rx_az}, {"rx_el", g.rx_el},
                {"reference", to_json(g.reference)}, {"reference_interval", g.reference_interval}};
    }

    inline ScanGrid grid_from_json(const nlohmann::json &j)
    {
        ScanGrid g;
        g.tx_az = j.at("tx_az").get<std::vector<double>>();
        g.tx_el = j.at("tx_el").get<std::vector<double>>();
        g.rx_az = j.at("rx_az").get<std::vector<double>>();
        g.rx_el = j.at("rx_el").get<std::vector<double>>();
        g.reference = orientation_from_json(j.at("reference"));
        g.reference_interval = j.at("reference_interval").get<std::size_t>();
        return g;
    }

    // ---------------------------------------------------------------------------------------------
    // Campaign files: one header line with the constants and grid as JSON, then one line per
    // measurement: sequence tx_az tx_el rx_az rx_el timestamp is_reference p_0 ... p_{L-1}

    inline void write_campaign(std::ostream &out, const CampaignSet &c)
    {
        const nlohmann::json header = {{"label", c.label}, {"constants", to_json(c.constants)}, {"grid", to_json(c.grid)},
                                       {"measurements", c.measurements.size()}};
        out << campaign_magic << header.dump() << '\n';
        std::string line;
        for (const auto &m : c.measurements)
        {
            const auto &o = m.trace.orientation;
            line.clear();
            line += std::to_string(m.entry.sequence);
            for (double v : {o.tx_az, o.tx_el, o.rx_az, o.rx_el, m.trace.timestamp_s})
            {
                line += ' ';
                line += format_double(v);
            }
            line += m.is_reference() ? " 1" : " 0";
            for (double v : m.trace.power_dbm)
            {
                line += ' ';
                line += format_fixed4(v);
            }
            line += '\n';
            out << line;
        }
    }

    inline CampaignSet read_campaign(std::istream &in, const std::string &name = "campaign")
    {
        std::string first;
        if (!std::getline(in, first) || first.rfind(std::string(campaign_magic), 0) != 0)
            throw DataError(name + ": not a padp campaign file (expected '" + std::string(campaign_magic) + "...')");
        CampaignSet c;
        std::size_t expected = 0;
        try
        {
            const auto header = nlohmann::json::parse(first.substr(campaign_magic.size()));
            c.label = header.at("label").get<std::string>();
            c.constants = constants_from_json(header.at("constants"));
            c.grid = grid_from_json(header.at("grid"));
            expected = header.at("measurements").get<std::size_t>();
        }
        catch (const nlohmann::json::exception &e)
        {
            throw DataError(name + ": malformed header: " + e.what());
        }

        std::size_t channel = 0, reference = 0, lineno = 1;
        std::string line;
        while (std::getline(in, line))
        {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            const std::string where = name + " record " + std::to_string(c.measurements.size() + 1) + " (line " + std::to_string(lineno) + ")";
            const auto f = split_ws(line);
            if (f.size() != 7 + c.constants.pdp_len)
                throw DataError(where + ": expected " + std::to_string(7 + c.constants.pdp_len) + " fields, found " + std::to_string(f.size()));
            Measurement m;
            m.entry.sequence = parse_int<std::size_t>(f[0], where);
            m.trace.orientation = {parse_double(f[1], where), parse_double(f[2], where), parse_double(f[3], where), parse_double(f[4], where)};
            m.entry.orientation = m.trace.orientation;
            m.trace.timestamp_s = parse_double(f[5], where);
            if (f[6] == "1")
                m.entry.reference = reference++;
            else if (f[6] == "0")
                m.entry.channel = channel++;
            else
                throw DataError(where + ": is_reference must be 0 or 1");
            m.trace.power_dbm.resize(c.constants.pdp_len);
            for (std::size_t k = 0; k < c.constants.pdp_len; ++k)
            {
                const double v = parse_double(f[7 + k], where);
                if (!std::isfinite(v))
                    throw DataError(where + ": non-finite power value");
                m.trace.power_dbm[k] = v;
            }
            if (!c.measurements.empty() && !(m.trace.timestamp_s > c.measurements.back().trace.timestamp_s))
                throw DataError(where + ": timestamps must be strictly increasing");
            c.measurements.push_back(std::move(m));
        }
        if (c.measurements.size() != expected)
            throw DataError(name + ": header announces " + std::to_string(expected) + " measurements, file has " +
                            std::to_string(c.measurements.size()));
        return c;
    }

    // ---------------------------------------------------------------------------------------------
    // Peak lists

    inline std::vector<PeakRecord> flatten(const PeakTable &t)
    {
        std::vector<PeakRecord> out;
        out.reserve(t.peak_count());
        for (const auto &row : t.peaks)
            out.insert(out.end(), row.begin(), row.end());
        return out;
    }

    inline void write_peaks(std::ostream &out, const std::vector<PeakRecord> &peaks)
    {
        out << peaks_magic << '\n'
            << "measurement,channel,index,delay_bin,delay_ns,power_dbm,tx_az,tx_el,rx_az,rx_el,ccd_bin,corrected_bin,valid\n";
        for (const auto &p : peaks)
        {
            const auto &o = p.orientation;
            out << p.measurement << ',' << (p.channel ? std::to_string(*p.channel) : std::string()) << ',' << p.index << ','
                << p.delay_bin << ',' << format_double(p.delay_ns) << ',' << format_double(p.power_dbm) << ','
                << format_double(o.tx_az) << ',' << format_double(o.tx_el) << ',' << format_double(o.rx_az) << ','
                << format_double(o.rx_el) << ',' << p.ccd_bin << ',' << p.corrected_bin << ',' << (p.valid ? 1 : 0) << '\n';
        }
    }

    inline std::vector<PeakRecord> read_peaks(std::istream &in, const std::string &name = "peaks")
    {
        auto lines = expect_magic(in, peaks_magic, name);
        if (lines.empty())
            throw DataError(name + ": missing column header");
        std::vector<PeakRecord> out;
        for (std::size_t r = 1; r < lines.size(); ++r)
        {
            if (lines[r].empty())
                continue;
            const std::string where = name + " record " + std::to_string(r) + " (line " + std::to_string(r + 2) + ")";
            const auto f = split(lines[r], ',');
            if (f.size() != 13)
                throw DataError(where + ": expected 13 columns, found " + std::to_string(f.size()));
            PeakRecord p;
            p.measurement = parse_int<std::size_t>(f[0], where);
            if (!f[1].empty())
                p.channel = parse_int<std::size_t>(f[1], where);
            p.index = parse_int<std::size_t>(f[2], where);
            p.delay_bin = parse_int<int>(f[3], where);
            p.delay_ns = parse_double(f[4], where);
            p.power_dbm = parse_double(f[5], where);
            p.orientation = {parse_double(f[6], where), parse_double(f[7], where), parse_double(f[8], where), parse_double(f[9], where)};
            p.ccd_bin = parse_int<int>(f[10], where);
            p.corrected_bin = parse_int<int>(f[11], where);
            p.valid = parse_int<int>(f[12], where) != 0;
            out.push_back(p);
        }
        return out;
    }

    // ---------------------------------------------------------------------------------------------
    // MPC sets

    inline void write_mpcs(std::ostream &out, const ExtractedMpcSet &s)
    {
        out << mpcs_magic << '\n'
            << "# label: " << s.label << '\n'
            << "# dropped_below_limit: " << s.dropped_below_limit << '\n'
            << "delay_bin,delay_ns,gain_db,aod_az,aod_el,aoa_az,aoa_el,measurement,channel,peak,power_dbm\n";
        for (const auto &e : s.mpcs)
        {
            const auto &m = e.mpc;
            out << m.delay_bin << ',' << format_double(m.delay_ns) << ',' << format_double(m.gain_db) << ','
                << format_double(m.aod_az) << ',' << format_double(m.aod_el) << ',' << format_double(m.aoa_az) << ','
                << format_double(m.aoa_el) << ',' << e.measurement << ',' << e.channel << ',' << e.peak << ','
                << format_double(e.power_dbm) << '\n';
        }
    }

    inline ExtractedMpcSet read_mpcs(std::istream &in, const std::string &name = "mpcs")
    {
        auto lines = expect_magic(in, mpcs_magic, name);
        if (lines.size() < 3)
            throw DataError(name + ": truncated header");
        ExtractedMpcSet s;
        s.label = meta_value(lines[0], "label", name);
        s.dropped_below_limit = parse_int<std::size_t>(meta_value(lines[1], "dropped_below_limit", name), name);
        for (std::size_t r = 3; r < lines.size(); ++r)
        {
            if (lines[r].empty())
                continue;
            const std::string where = name + " record " + std::to_string(r - 2) + " (line " + std::to_string(r + 2) + ")";
            const auto f = split(lines[r], ',');
            if (f.size() != 11)
                throw DataError(where + ": expected 11 columns, found " + std::to_string(f.size()));
            ExtractedMpc e;
            e.mpc.delay_bin = parse_int<int>(f[0], where);
            e.mpc.delay_ns = parse_double(f[1], where);
            e.mpc.gain_db = parse_double(f[2], where);
            e.mpc.aod_az = parse_double(f[3], where);
            e.mpc.aod_el = parse_double(f[4], where);
            e.mpc.aoa_az = parse_double(f[5], where);
            e.mpc.aoa_el = parse_double(f[6], where);
            e.measurement = parse_int<std::size_t>(f[7], where);
            e.channel = parse_int<std::size_t>(f[8], where);
            e.peak = parse_int<std::size_t>(f[9], where);
            e.power_dbm = parse_double(f[10], where);
            s.mpcs.push_back(e);
        }
        return s;
    }

    // ---------------------------------------------------------------------------------------------
    // Ground truth

    inline void write_ground_truth(std::ostream &out, const GroundTruth &t)
    {
        out << truth_magic << '\n'
            << "# los_index: " << t.los_index << '\n'
            << "# los_distance_m: " << format_double(t.los_distance_m) << '\n'
            << "path,delay_bin,delay_ns,gain_db,aod_az,aod_el,aoa_az,aoa_el\n";
        for (std::size_t n = 0; n < t.paths.size(); ++n)
        {
            const auto &m = t.paths[n];
            out << n << ',' << m.delay_bin << ',' << format_double(m.delay_ns) << ',' << format_double(m.gain_db) << ','
                << format_double(m.aod_az) << ',' << format_double(m.aod_el) << ',' << format_double(m.aoa_az) << ','
                << format_double(m.aoa_el) << '\n';
        }
    }

    inline GroundTruth read_ground_truth(std::istream &in, const std::string &name = "ground truth")
    {
        auto lines = expect_magic(in, truth_magic, name);
        if (lines.size() < 3)
            throw DataError(name + ": truncated header");
        GroundTruth t;
        t.los_index = parse_int<std::size_t>(meta_value(lines[0], "los_index", name), name);
        t.los_distance_m = parse_double(meta_value(lines[1], "los_distance_m", name), name);
        for (std::size_t r = 3; r < lines.size(); ++r)
        {
            if (lines[r].empty())
                continue;
            const std::string where = name + " record " + std::to_string(r - 2);
            const auto f = split(lines[r], ',');
            if (f.size() != 8)
                throw DataError(where + ": expected 8 columns, found " + std::to_string(f.size()));
            Mpc m;
            m.delay_bin = parse_int<int>(f[1], where);
            m.delay_ns = parse_double(f[2], where);
            m.gain_db = parse_double(f[3], where);
            m.aod_az = parse_double(f[4], where);
            m.aod_el = parse_double(f[5], where);
            m.aoa_az = parse_double(f[6], where);
            m.aoa_el = parse_double(f[7], where);
            t.paths.push_back(m);
        }
        return t;
    }

    // ---------------------------------------------------------------------------------------------
    // Audit files

    // Simulator drift per measurement
    inline void write_drift(std::ostream &out, const CampaignSet &c, const std::vector<double> &drift_ns)
    {
        if (drift_ns.size() != c.measurements.size())
            throw DataError("drift vector does not match the campaign");
        const double bin = c.constants.delay_bin_ns();
        out << drift_magic << '\n' << "sequence,timestamp_s,is_reference,drift_ns,drift_bins\n";
        for (std::size_t k = 0; k < drift_ns.size(); ++k)
        {
            const auto &m = c.measurements[k];
            out << m.entry.sequence << ',' << format_double(m.trace.timestamp_s) << ',' << (m.is_reference() ? 1 : 0) << ','
                << format_double(drift_ns[k]) << ',' << format_double(drift_ns[k] / bin) << '\n';
        }
    }

    // Reference drift table
    inline void write_drift_track(std::ostream &out, const DriftTrack &t, double delay_bin_ns)
    {
        out << drift_track_magic << '\n' << "k,sequence,tau_ref_bin,d_ref_bins,d_ref_ns\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            out << k + 1 << ',' << t.positions[k] << ',' << t.tau_ref[k] << ',' << t.d_ref[k] << ','
                << format_double(t.d_ref[k] * delay_bin_ns) << '\n';
    }

    // Peaks whose delay changed during correction
    inline void write_change_ledger(std::ostream &out, const PeakTable &t)
    {
        out << changes_magic << '\n' << "measurement,channel,index,delay_bin,ccd_bin,corrected_bin,cdedar_shift\n";
        for (const auto &row : t.peaks)
            for (const auto &p : row)
                if (p.corrected_bin != p.delay_bin || p.ccd_bin != p.delay_bin)
                    out << p.measurement << ',' << (p.channel ? std::to_string(*p.channel) : std::string()) << ','
                        << p.index << ',' << p.delay_bin << ',' << p.ccd_bin << ',' << p.corrected_bin << ','
                        << p.ccd_bin - p.corrected_bin << '\n';
    }

    // ---------------------------------------------------------------------------------------------
    // Match reports

    inline nlohmann::json to_json(const MatchReport &r)
    {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto &p : r.pairs)
            pairs.push_back({{"target", p.target}, {"source", p.source}, {"cost", p.cost}, {"error", p.error}});
        return {{"target_label", r.target_label},
                {"source_label", r.source_label},
                {"target_count", r.target_count},
                {"source_count", r.source_count},
                {"matched_count", r.matched_count},
                {"matched_pct", r.matched_pct},
                {"missed_pct", r.missed_pct},
                {"matched_pct_source", r.matched_pct_source},
                {"matched_power_pct_target", r.matched_power_pct_target},
                {"matched_power_pct_source", r.matched_power_pct_source},
                {"total_cost", r.total_cost},
                {"unassigned_targets", r.unassigned_targets},
                {"unassigned_sources", r.unassigned_sources},
                {"pairs", pairs}};
    }

    inline MatchReport match_report_from_json(const nlohmann::json &j)
    {
        MatchReport r;
        r.target_label = j.at("target_label").get<std::string>();
        r.source_label = j.at("source_label").get<std::string>();
        r.target_count = j.at("target_count").get<std::size_t>();
        r.source_count = j.at("source_count").get<std::size_t>();
        r.matched_count = j.at("matched_count").get<std::size_t>();
        r.matched_pct = j.at("matched_pct").get<double>();
        r.missed_pct = j.at("missed_pct").get<double>();
        r.matched_pct_source = j.at("matched_pct_source").get<double>();
        r.matched_power_pct_target = j.at("matched_power_pct_target").get<double>();
        r.matched_power_pct_source = j.at("matched_power_pct_source").get<double>();
        r.total_cost = j.at("total_cost").get<double>();
        r.unassigned_targets = j.at("unassigned_targets").get<std::vector<std::size_t>>();
        r.unassigned_sources = j.at("unassigned_sources").get<std::vector<std::size_t>>();
        for (const auto &p : j.at("pairs"))
        {
            MatchedPair mp;
            mp.target = p.at("target").get<std::size_t>();
            mp.source = p.at("source").get<std::size_t>();
            mp.cost = p.at("cost").get<double>();
            mp.error = p.at("error").get<std::array<double, match_dims>>();
            r.pairs.push_back(mp);
        }
        return r;
    }

    // Human-readable summary, one row per report
    inline std::string format_match_table(const std::vector<MatchReport> &reports)
    {
        std::ostringstream out;
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-28s %8s %8s %10s %10s %12s %12s %12s\n", "source", "N_target", "N_source", "matched",
                      "matched %", "missed %", "power % (t)", "power % (s)");
        out << buf;
        for (const auto &r : reports)
        {
            std::snprintf(buf, sizeof(buf), "%-28s %8zu %8zu %10zu %10.2f %12.2f %12.2f %12.2f\n", r.source_label.c_str(),
                          r.target_count, r.source_count, r.matched_count, r.matched_pct, r.missed_pct,
                          r.matched_power_pct_target, r.matched_power_pct_source);
            out << buf;
        }
        return out.str();
    }

    // Per-dimension histograms of the matched-pair errors. Delay in bins, gain in 0.5 dB steps,
    // angles in grid-sized steps.
    inline std::string format_error_histograms(const MatchReport &r, double delay_bin_ns)
    {
        static const char *names[match_dims] = {"aod_az_deg", "aod_el_deg", "aoa_az_deg", "aoa_el_deg", "delay_bins", "gain_db"};
        const double width[match_dims] = {20.0, 20.0, 20.0, 20.0, 1.0, 0.5};
        std::ostringstream out;
        out << "dimension,bin_lower,bin_upper,count\n";
        for (std::size_t l = 0; l < match_dims; ++l)
        {
            std::vector<std::size_t> counts;
            for (const auto &p : r.pairs)
            {
                double v = p.error[l];
                if (l == 4)
                    v = std::round(v / delay_bin_ns);
                const std::size_t b = l == 4 ? std::size_t(v) : std::size_t(std::floor(v / width[l] + 1e-9));
                if (b >= counts.size())
                    counts.resize(b + 1, 0);
                ++counts[b];
            }
            for (std::size_t b = 0; b < counts.size(); ++b)
                out << names[l] << ',' << format_double(double(b) * width[l]) << ',' << format_double(double(b + 1) * width[l])
                    << ',' << counts[b] << '\n';
        }
        return out.str();
    }

    // Convenience wrappers for whole files

    template <typename Writer>
    inline std::string to_text(Writer &&w)
    {
        std::ostringstream out;
        w(out);
        return out.str();
    }
}

#endif
