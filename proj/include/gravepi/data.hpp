/*
* Copyright (C) 2026 gravepi contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/

#pragma once

#include "gravepi/climate.hpp"
#include "gravepi/csv.hpp"
#include "gravepi/errors.hpp"
#include "gravepi/integrate.hpp"
#include "gravepi/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gravepi::data {

enum class RegionClass { coast_north, coast_central, coast_south, mountain_north, mountain_central, mountain_south, jungle };

inline std::string to_string(RegionClass r)
{
    switch (r) {
    case RegionClass::coast_north:
        return "Coast-N";
    case RegionClass::coast_central:
        return "Coast-C";
    case RegionClass::coast_south:
        return "Coast-S";
    case RegionClass::mountain_north:
        return "Mountain-N";
    case RegionClass::mountain_central:
        return "Mountain-C";
    case RegionClass::mountain_south:
        return "Mountain-S";
    case RegionClass::jungle:
        return "Jungle";
    }
    return "?";
}

/// Accepts the canonical spelling ("Coast-N") and loose variants such as
/// "coast north", "Mountain_central" or "jungle", case-insensitively.
inline RegionClass parse_region(const std::string& text, std::size_t line = 0)
{
    std::string key;
    for (char c : text) {
        if (c != ' ' && c != '-' && c != '_') {
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (key == "jungle") {
        return RegionClass::jungle;
    }
    static const std::vector<std::pair<std::string, std::array<RegionClass, 3>>> bases = {
        {"coast", {RegionClass::coast_north, RegionClass::coast_central, RegionClass::coast_south}},
        {"mountain", {RegionClass::mountain_north, RegionClass::mountain_central, RegionClass::mountain_south}},
    };
    static const std::vector<std::vector<std::string>> tags = {
        {"n", "north", "northern"}, {"c", "central"}, {"s", "south", "southern"}};
    for (const auto& [base, classes] : bases) {
        if (key.rfind(base, 0) != 0) {
            continue;
        }
        const std::string tag = key.substr(base.size());
        for (std::size_t t = 0; t < tags.size(); ++t) {
            if (std::find(tags[t].begin(), tags[t].end(), tag) != tags[t].end()) {
                return classes[t];
            }
        }
    }
    throw VocabularyError("unknown region class '" + text + "'", line);
}

struct ProvinceRecord {
    std::string province_id;
    std::string name;
    RegionClass region = RegionClass::jungle;
    double population  = 0.0; ///< 1994 census head-count
    double lat         = 0.0;
    double lon         = 0.0;

    bool operator==(const ProvinceRecord&) const = default;
};

inline const std::vector<std::string> province_header = {"province_id", "name", "region_class", "population", "lat", "lon"};

inline std::vector<ProvinceRecord> parse_provinces(const csv::Table& table)
{
    table.require_header(province_header);
    std::vector<ProvinceRecord> out;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.line_numbers[r];
        ProvinceRecord p;
        p.province_id = row[0];
        p.name        = row[1];
        p.region      = parse_region(row[2], line);
        p.population  = csv::parse_double(row[3], line);
        p.lat         = csv::parse_double(row[4], line);
        p.lon         = csv::parse_double(row[5], line);
        if (p.province_id.empty()) {
            throw ParseError("empty province_id", line);
        }
        if (!seen.insert(p.province_id).second) {
            throw ValidationError("line " + std::to_string(line) + ": duplicate province_id '" + p.province_id + "'");
        }
        if (!(p.population > 0.0)) {
            throw ValidationError("line " + std::to_string(line) + ": province '" + p.province_id +
                                  "' needs a positive population");
        }
        if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
            throw ValidationError("line " + std::to_string(line) + ": province '" + p.province_id +
                                  "' has out-of-range coordinates");
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<ProvinceRecord> load_provinces(const std::string& path)
{
    return parse_provinces(csv::read_file(path));
}

inline void write_provinces(std::ostream& out, std::span<const ProvinceRecord> provinces)
{
    csv::Writer w(out);
    w.row(province_header);
    for (const auto& p : provinces) {
        w.row(p.province_id, p.name, to_string(p.region), p.population, p.lat, p.lon);
    }
}

struct PatchDefinition {
    std::string patch_id;
    std::vector<std::string> members; ///< province ids
    double lat        = 0.0;          ///< mean member latitude
    double lon        = 0.0;          ///< mean member longitude
    double population = 0.0;          ///< sum of member populations

    /// Geometry for the gravity model: x = longitude, y = latitude.
    PatchGeometry geometry() const { return {patch_id, population, lon, lat}; }
};

struct PatchPlan {
    std::vector<PatchDefinition> patches;
    std::vector<std::string> dropped; ///< provinces deliberately left out
    std::vector<std::string> warnings;

    std::vector<PatchGeometry> geometries() const
    {
        std::vector<PatchGeometry> g;
        for (const auto& p : patches) {
            g.push_back(p.geometry());
        }
        return g;
    }
};

enum class Scheme { three_patch, per_province, custom };

inline const std::array<std::string, 3> three_patch_ids = {"north_coast", "central_coast", "jungle"};

/// Patch of a province under the three-patch climate grouping; empty for
/// southern mountain provinces, which are dropped.
inline std::optional<std::string> three_patch_of(RegionClass r)
{
    switch (r) {
    case RegionClass::coast_north:
    case RegionClass::mountain_north:
        return three_patch_ids[0];
    case RegionClass::coast_central:
    case RegionClass::mountain_central:
    case RegionClass::coast_south:
        return three_patch_ids[1];
    case RegionClass::jungle:
        return three_patch_ids[2];
    case RegionClass::mountain_south:
        return std::nullopt;
    }
    return std::nullopt;
}

/// Groups provinces into patches. `mapping` (province_id -> patch_id) is used
/// by the custom scheme; provinces missing from it are dropped with a warning.
inline PatchPlan build_patches(std::span<const ProvinceRecord> provinces, Scheme scheme,
                               const std::map<std::string, std::string>& mapping = {})
{
    PatchPlan plan;
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ProvinceRecord*>> members;

    auto assign = [&](const std::string& patch, const ProvinceRecord& p) {
        if (!members.count(patch)) {
            order.push_back(patch);
        }
        members[patch].push_back(&p);
    };

    if (scheme == Scheme::three_patch) {
        for (const auto& id : three_patch_ids) {
            order.push_back(id);
            members[id];
        }
    }
    if (scheme == Scheme::custom) {
        std::set<std::string> known;
        for (const auto& p : provinces) {
            known.insert(p.province_id);
        }
        for (const auto& [pid, patch] : mapping) {
            if (!known.count(pid)) {
                throw ValidationError("mapping names unknown province '" + pid + "'");
            }
        }
    }
    for (const auto& p : provinces) {
        switch (scheme) {
        case Scheme::three_patch:
            if (auto patch = three_patch_of(p.region)) {
                members[*patch].push_back(&p);
            }
            else {
                plan.dropped.push_back(p.province_id);
                plan.warnings.push_back("dropping southern-mountain province '" + p.province_id + "'");
            }
            break;
        case Scheme::per_province:
            assign(p.province_id, p);
            break;
        case Scheme::custom: {
            auto it = mapping.find(p.province_id);
            if (it == mapping.end()) {
                plan.dropped.push_back(p.province_id);
                plan.warnings.push_back("province '" + p.province_id + "' is not in the mapping; dropped");
            }
            else {
                assign(it->second, p);
            }
            break;
        }
        }
    }

    for (const auto& id : order) {
        const auto& ms = members[id];
        if (ms.empty()) {
            throw StructuralError("patch '" + id + "' has no member provinces");
        }
        PatchDefinition def;
        def.patch_id = id;
        for (const auto* p : ms) {
            def.members.push_back(p->province_id);
            def.lat += p->lat;
            def.lon += p->lon;
            def.population += p->population;
        }
        def.lat /= static_cast<double>(ms.size());
        def.lon /= static_cast<double>(ms.size());
        plan.patches.push_back(std::move(def));
    }
    return plan;
}

inline void write_patch_mapping(std::ostream& out, const PatchPlan& plan)
{
    csv::Writer w(out);
    w.row("patch_id", "province_id");
    for (const auto& p : plan.patches) {
        for (const auto& m : p.members) {
            w.row(p.patch_id, m);
        }
    }
}

inline std::map<std::string, std::string> parse_patch_mapping(const csv::Table& table)
{
    table.require_header({"patch_id", "province_id"});
    std::map<std::string, std::string> mapping;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (!mapping.emplace(table.rows[r][1], table.rows[r][0]).second) {
            throw ValidationError("line " + std::to_string(table.line_numbers[r]) + ": province '" +
                                  table.rows[r][1] + "' is assigned to more than one patch");
        }
    }
    return mapping;
}

inline void write_centers(std::ostream& out, const PatchPlan& plan)
{
    csv::Writer w(out);
    w.row("patch_id", "lat", "lon", "population");
    for (const auto& p : plan.patches) {
        w.row(p.patch_id, p.lat, p.lon, p.population);
    }
}

/// Patch geometries from a centers.csv file.
inline std::vector<PatchGeometry> parse_centers(const csv::Table& table)
{
    table.require_header({"patch_id", "lat", "lon", "population"});
    std::vector<PatchGeometry> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.line_numbers[r];
        PatchGeometry g{row[0], csv::parse_double(row[3], line), csv::parse_double(row[2], line),
                        csv::parse_double(row[1], line)};
        if (!(g.population > 0.0)) {
            throw ValidationError("line " + std::to_string(line) + ": patch needs a positive population");
        }
        out.push_back(std::move(g));
    }
    return out;
}

/// Weekly case counts per province. Weeks are numbered from 1 (first week of 1994).
struct CaseSeries {
    std::size_t weeks = 0;
    std::vector<std::string> province_ids;
    std::vector<std::vector<long long>> counts; ///< counts[province][week - 1]

    long long total() const
    {
        long long t = 0;
        for (const auto& c : counts) {
            for (auto v : c) {
                t += v;
            }
        }
        return t;
    }
};

/// Long-format cases: week,province_id,count. Absent (week, province) pairs are zero.
inline CaseSeries parse_cases(const csv::Table& table)
{
    table.require_header({"week", "province_id", "count"});
    struct Entry {
        long long week;
        std::string province;
        long long count;
    };
    std::vector<Entry> entries;
    std::set<std::pair<long long, std::string>> seen;
    long long max_week = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.line_numbers[r];
        Entry e{csv::parse_int(row[0], line), row[1], csv::parse_int(row[2], line)};
        if (e.week < 1) {
            throw ParseError("week numbers start at 1", line);
        }
        if (e.count < 0) {
            throw ValidationError("line " + std::to_string(line) + ": negative case count");
        }
        if (!seen.emplace(e.week, e.province).second) {
            throw ValidationError("line " + std::to_string(line) + ": duplicate entry for week " +
                                  std::to_string(e.week) + ", province '" + e.province + "'");
        }
        max_week = std::max(max_week, e.week);
        entries.push_back(std::move(e));
    }
    CaseSeries cs;
    cs.weeks = static_cast<std::size_t>(max_week);
    std::map<std::string, std::size_t> index;
    for (const auto& e : entries) {
        if (!index.count(e.province)) {
            index[e.province] = cs.province_ids.size();
            cs.province_ids.push_back(e.province);
            cs.counts.emplace_back(cs.weeks, 0);
        }
        cs.counts[index[e.province]][static_cast<std::size_t>(e.week - 1)] = e.count;
    }
    return cs;
}

inline CaseSeries load_cases(const std::string& path)
{
    return parse_cases(csv::read_file(path));
}

/// Writes every (week, province) pair, zeros included, so re-reading yields
/// the same provinces in the same order.
inline void write_cases(std::ostream& out, const CaseSeries& cs)
{
    csv::Writer w(out);
    w.row("week", "province_id", "count");
    for (std::size_t week = 0; week < cs.weeks; ++week) {
        for (std::size_t p = 0; p < cs.province_ids.size(); ++p) {
            w.row(static_cast<long long>(week + 1), cs.province_ids[p], cs.counts[p][week]);
        }
    }
}

/// Per-patch weekly totals. Provinces with cases must belong to a patch or be
/// listed as dropped.
inline EpidemicSeries aggregate_cases(const CaseSeries& cases, const PatchPlan& plan)
{
    std::map<std::string, std::size_t> patch_of;
    for (std::size_t k = 0; k < plan.patches.size(); ++k) {
        for (const auto& m : plan.patches[k].members) {
            patch_of[m] = k;
        }
    }
    const std::set<std::string> dropped(plan.dropped.begin(), plan.dropped.end());

    EpidemicSeries out;
    out.provenance = Provenance::data;
    for (std::size_t w = 0; w < cases.weeks; ++w) {
        out.times.push_back(static_cast<double>(w + 1));
    }
    for (const auto& p : plan.patches) {
        out.patch_ids.push_back(p.patch_id);
    }
    out.values.assign(plan.patches.size(), std::vector<double>(cases.weeks, 0.0));
    for (std::size_t p = 0; p < cases.province_ids.size(); ++p) {
        const auto& id = cases.province_ids[p];
        auto it        = patch_of.find(id);
        if (it == patch_of.end()) {
            const bool has_cases = std::any_of(cases.counts[p].begin(), cases.counts[p].end(), [](auto c) { return c > 0; });
            if (has_cases && !dropped.count(id)) {
                throw UnmappedData("province '" + id + "' has cases but belongs to no patch");
            }
            continue;
        }
        for (std::size_t w = 0; w < cases.weeks; ++w) {
            out.values[it->second][w] += static_cast<double>(cases.counts[p][w]);
        }
    }
    return out;
}

/// Inclusive 1-based week range.
struct Window {
    std::size_t first;
    std::size_t last;
};

inline constexpr Window epidemic_2000_2001{350, 400};
/// 1 Jan 2002 falls in week 418 of a series starting in the first week of 1994.
inline constexpr Window seasonal_2002_2008{418, 780};

inline Window parse_window(const std::string& text)
{
    if (text == "epidemic_2000_2001") {
        return epidemic_2000_2001;
    }
    if (text == "seasonal_2002_2008") {
        return seasonal_2002_2008;
    }
    auto dash = text.find('-');
    if (dash == std::string::npos) {
        throw ConfigError("window must be a name or FIRST-LAST, got '" + text + "'");
    }
    try {
        return {static_cast<std::size_t>(std::stoul(text.substr(0, dash))),
                static_cast<std::size_t>(std::stoul(text.substr(dash + 1)))};
    }
    catch (const std::exception&) {
        throw ConfigError("window must be a name or FIRST-LAST, got '" + text + "'");
    }
}

/// Sub-series whose week numbers (series.times) lie in [first, last].
inline EpidemicSeries select_window(const EpidemicSeries& series, Window window)
{
    if (window.last < window.first) {
        throw BoundsError("window end " + std::to_string(window.last) + " precedes start " +
                          std::to_string(window.first));
    }
    if (series.length() == 0 || static_cast<double>(window.first) < series.times.front() ||
        static_cast<double>(window.last) > series.times.back()) {
        throw BoundsError("window " + std::to_string(window.first) + "-" + std::to_string(window.last) +
                          " lies outside the series");
    }
    EpidemicSeries out;
    out.patch_ids  = series.patch_ids;
    out.provenance = series.provenance;
    out.values.assign(series.patches(), {});
    for (std::size_t k = 0; k < series.length(); ++k) {
        const double t = series.times[k];
        if (t >= static_cast<double>(window.first) && t <= static_cast<double>(window.last)) {
            out.times.push_back(t);
            for (std::size_t p = 0; p < series.patches(); ++p) {
                out.values[p].push_back(series.values[p][k]);
            }
        }
    }
    return out;
}

/// Provinces with at least one case inside the window.
inline std::vector<std::string> provinces_with_cases(const CaseSeries& cases, Window window)
{
    std::vector<std::string> out;
    for (std::size_t p = 0; p < cases.province_ids.size(); ++p) {
        for (std::size_t w = window.first; w <= std::min(window.last, cases.weeks); ++w) {
            if (cases.counts[p][w - 1] > 0) {
                out.push_back(cases.province_ids[p]);
                break;
            }
        }
    }
    return out;
}

/// Wide-format series: time column followed by one column per patch.
inline void write_series(std::ostream& out, const EpidemicSeries& s, const std::string& time_label = "time")
{
    csv::Writer w(out);
    std::vector<std::string> header{time_label};
    header.insert(header.end(), s.patch_ids.begin(), s.patch_ids.end());
    w.row(header);
    for (std::size_t k = 0; k < s.length(); ++k) {
        std::vector<std::string> row{csv::format_number(s.times[k])};
        for (std::size_t p = 0; p < s.patches(); ++p) {
            row.push_back(csv::format_number(s.values[p][k]));
        }
        w.row(row);
    }
}

inline EpidemicSeries parse_series(const csv::Table& table, Provenance provenance = Provenance::data)
{
    if (table.header.size() < 2) {
        throw ParseError("series needs a time column and at least one patch column", 1);
    }
    EpidemicSeries s;
    s.provenance = provenance;
    s.patch_ids.assign(table.header.begin() + 1, table.header.end());
    s.values.assign(s.patch_ids.size(), {});
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto line = table.line_numbers[r];
        s.times.push_back(csv::parse_double(table.rows[r][0], line));
        for (std::size_t p = 0; p < s.patch_ids.size(); ++p) {
            s.values[p].push_back(csv::parse_double(table.rows[r][p + 1], line));
        }
    }
    return s;
}

/// Days since 1970-01-01 of an ISO-8601 calendar date (YYYY-MM-DD).
inline long long parse_iso_date(const std::string& text, std::size_t line = 0)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ParseError("expected an ISO date YYYY-MM-DD, got '" + text + "'", line);
    }
    const auto y = static_cast<int>(csv::parse_int(text.substr(0, 4), line));
    const auto m = static_cast<unsigned>(csv::parse_int(text.substr(5, 2), line));
    const auto d = static_cast<unsigned>(csv::parse_int(text.substr(8, 2), line));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
        throw ParseError("invalid calendar date '" + text + "'", line);
    }
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

inline std::string format_iso_date(long long days_since_epoch)
{
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days_since_epoch}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

/// climate.csv (date,patch_id,tmin_f) grouped by patch in order of first
/// appearance. Day numbers count from 1 January of each series' first year.
inline std::vector<climate::TemperatureSeries> parse_climate(const csv::Table& table)
{
    table.require_header({"date", "patch_id", "tmin_f"});
    std::vector<climate::TemperatureSeries> out;
    std::vector<std::vector<std::pair<long long, double>>> raw;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.line_numbers[r];
        const long long day = parse_iso_date(row[0], line);
        const double t      = csv::parse_double(row[2], line);
        auto it             = index.find(row[1]);
        if (it == index.end()) {
            it = index.emplace(row[1], out.size()).first;
            out.push_back({row[1], {}, {}});
            raw.emplace_back();
        }
        raw[it->second].emplace_back(day, t);
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        auto& r = raw[k];
        std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::chrono::year_month_day first{std::chrono::sys_days{std::chrono::days{r.front().first}}};
        const long long origin =
            std::chrono::sys_days{first.year() / std::chrono::January / 1}.time_since_epoch().count();
        for (const auto& [day, t] : r) {
            out[k].days.push_back(static_cast<double>(day - origin));
            out[k].tmin.push_back(t);
        }
        out[k].validate();
    }
    return out;
}

inline std::vector<climate::TemperatureSeries> load_climate(const std::string& path)
{
    return parse_climate(csv::read_file(path));
}

} // namespace gravepi::data
