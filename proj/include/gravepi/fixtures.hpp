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
#include "gravepi/data.hpp"
#include "gravepi/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

// Synthetic stand-ins for the provincial surveillance data: same schema and
// broad structure (endemic jungle, seasonal coast, one countrywide epidemic
// in weeks 350-400), generated from a seed.
namespace gravepi::fixtures {

struct RegionBlock {
    data::RegionClass region;
    std::size_t count;
    double lat_lo, lat_hi, lon_lo, lon_hi;
};

inline const std::vector<RegionBlock>& region_blocks()
{
    using R = data::RegionClass;
    static const std::vector<RegionBlock> blocks = {
        {R::coast_north, 12, -8.0, -3.5, -81.0, -78.5},   {R::mountain_north, 10, -9.0, -5.0, -79.0, -77.0},
        {R::coast_central, 14, -14.0, -9.0, -78.0, -75.5}, {R::mountain_central, 12, -13.0, -9.0, -76.5, -74.0},
        {R::coast_south, 2, -18.0, -15.0, -75.0, -70.5},   {R::jungle, 22, -13.0, -3.0, -76.0, -69.5},
        {R::mountain_south, 7, -17.0, -14.0, -73.0, -69.5},
    };
    return blocks;
}

/// Three-patch populations of the fixture (north coast, central coast, jungle).
inline constexpr std::array<double, 3> patch_populations = {7.6e6, 10.5e6, 2.8e6};
inline constexpr double southern_mountain_population     = 150000.0;

/// 79 provinces. Member populations are integers summing exactly to
/// patch_populations under the three-patch scheme; the first central-coast
/// province plays the capital and holds most of its patch.
inline std::vector<data::ProvinceRecord> provinces(std::uint64_t seed = 1)
{
    Rng rng = substream(seed, 1);
    std::vector<data::ProvinceRecord> out;
    std::array<std::vector<std::size_t>, 3> by_patch;
    for (const auto& block : region_blocks()) {
        for (std::size_t k = 0; k < block.count; ++k) {
            data::ProvinceRecord p;
            p.province_id = "P" + std::string(out.size() + 1 < 10 ? "00" : "0") + std::to_string(out.size() + 1);
            p.name        = data::to_string(block.region) + "_" + std::to_string(k + 1);
            p.region      = block.region;
            p.lat         = std::round(uniform(rng, block.lat_lo, block.lat_hi) * 1e4) / 1e4;
            p.lon         = std::round(uniform(rng, block.lon_lo, block.lon_hi) * 1e4) / 1e4;
            p.population  = southern_mountain_population;
            if (auto patch = data::three_patch_of(block.region)) {
                const auto idx = static_cast<std::size_t>(
                    std::find(data::three_patch_ids.begin(), data::three_patch_ids.end(), *patch) -
                    data::three_patch_ids.begin());
                by_patch[idx].push_back(out.size());
            }
            out.push_back(std::move(p));
        }
    }
    for (std::size_t patch = 0; patch < 3; ++patch) {
        const auto& members = by_patch[patch];
        std::vector<double> w(members.size());
        for (double& x : w) {
            x = uniform(rng, 0.2, 1.0);
        }
        double total = 0.0;
        for (double x : w) {
            total += x;
        }
        double remaining = patch_populations[patch];
        if (patch == 1) {
            // Capital: 60% of the central patch.
            const double capital = std::round(0.6 * patch_populations[patch]);
            out[members[0]].population = capital;
            remaining -= capital;
            total -= w[0];
            w[0] = 0.0;
        }
        double assigned = 0.0;
        std::size_t last = members.size() - 1;
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (patch == 1 && k == 0) {
                continue;
            }
            double pop = k == last ? remaining - assigned : std::round(remaining * w[k] / total);
            out[members[k]].population = pop;
            assigned += pop;
        }
    }
    return out;
}

inline double weeks_per_year()
{
    return 365.25 / 7.0;
}

/// Weekly counts for 780 weeks. Jungle provinces are endemic with a seasonal
/// peak; coastal and northern/central mountain provinces peak six weeks later
/// with no off-season cases; southern mountain provinces never report. During
/// weeks 350-400 only `epidemic_provinces` provinces report, each with a
/// single epidemic wave.
inline data::CaseSeries cases(std::span<const data::ProvinceRecord> provs, std::uint64_t seed = 1,
                              std::size_t epidemic_provinces = 49)
{
    constexpr std::size_t weeks = 780;
    using R                     = data::RegionClass;
    Rng rng                     = substream(seed, 2);

    std::vector<std::size_t> eligible;
    for (std::size_t p = 0; p < provs.size(); ++p) {
        if (provs[p].region != R::mountain_south) {
            eligible.push_back(p);
        }
    }
    if (epidemic_provinces > eligible.size()) {
        throw DomainError("not enough reporting provinces for the requested epidemic subset");
    }
    for (std::size_t k = eligible.size(); k > 1; --k) {
        std::swap(eligible[k - 1], eligible[uniform_index(rng, k)]);
    }
    std::vector<bool> in_epidemic(provs.size(), false);
    for (std::size_t k = 0; k < epidemic_provinces; ++k) {
        in_epidemic[eligible[k]] = true;
    }

    data::CaseSeries cs;
    cs.weeks = weeks;
    for (std::size_t p = 0; p < provs.size(); ++p) {
        const auto& prov = provs[p];
        cs.province_ids.push_back(prov.province_id);
        std::vector<long long> counts(weeks, 0);
        if (prov.region == R::mountain_south) {
            cs.counts.push_back(std::move(counts));
            continue;
        }
        const bool jungle     = prov.region == R::jungle;
        const double centre   = 372.0 + uniform(rng, -6.0, 6.0);
        const double lag      = jungle ? 0.0 : 6.0;
        for (std::size_t w = 1; w <= weeks; ++w) {
            const auto week = static_cast<double>(w);
            double mean     = 0.0;
            if (w >= data::epidemic_2000_2001.first && w <= data::epidemic_2000_2001.last) {
                if (in_epidemic[p]) {
                    const double z = (week - centre) / 5.0;
                    mean           = prov.population * 4e-5 * std::exp(-0.5 * z * z);
                }
            }
            else {
                const double phase = 2.0 * std::numbers::pi * (week - 10.0 - lag) / weeks_per_year();
                const double bump  = std::pow(0.5 * (1.0 + std::cos(phase)), 6.0);
                const double level = w >= data::seasonal_2002_2008.first ? 1.0 : 0.3;
                mean               = prov.population * level * (jungle ? 2e-6 + 1.2e-5 * bump : 8e-6 * bump);
            }
            if (mean > 0.0) {
                std::poisson_distribution<long long> dist(mean);
                counts[w - 1] = dist(rng);
            }
            if (in_epidemic[p] && w == static_cast<std::size_t>(std::lround(centre))) {
                counts[w - 1] = std::max<long long>(1, counts[w - 1]);
            }
        }
        cs.counts.push_back(std::move(counts));
    }
    return cs;
}

struct ClimateSpec {
    std::string patch_id;
    double t0;
    double eps;
};

/// Sinusoid parameters of the three climate patches (mean level and amplitude, F).
inline const std::vector<ClimateSpec>& reference_climate()
{
    static const std::vector<ClimateSpec> specs = {
        {"north_coast", 63.5454, 3.5680}, {"central_coast", 65.3771, 4.5169}, {"jungle", 74.3880, 0.1353}};
    return specs;
}

/// Daily series T0 + eps sin(2 pi t / 365) + N(0, sigma^2) for one year,
/// t counted from 1 January.
inline climate::TemperatureSeries temperature(const ClimateSpec& spec, double sigma, std::uint64_t seed,
                                              std::size_t days = 365)
{
    std::uint64_t key = 1469598103934665603ull; // FNV-1a, stable across platforms
    for (unsigned char c : spec.patch_id) {
        key = (key ^ c) * 1099511628211ull;
    }
    Rng rng = substream(seed, key);
    climate::TemperatureSeries s;
    s.label = spec.patch_id;
    for (std::size_t d = 0; d < days; ++d) {
        const auto t = static_cast<double>(d);
        double v     = spec.t0 + spec.eps * std::sin(2.0 * std::numbers::pi * t / 365.0);
        if (sigma > 0.0) {
            v += normal(rng, 0.0, sigma);
        }
        s.days.push_back(t);
        s.tmin.push_back(v);
    }
    return s;
}

/// climate.csv rows for `series`, dated from 1 January of `year`.
inline void write_climate(std::ostream& out, std::span<const climate::TemperatureSeries> series, int year = 2005)
{
    csv::Writer w(out);
    w.row("date", "patch_id", "tmin_f");
    const std::chrono::year_month_day jan1{std::chrono::year{year}, std::chrono::January, std::chrono::day{1}};
    const long long origin = std::chrono::sys_days{jan1}.time_since_epoch().count();
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.days.size(); ++k) {
            w.row(data::format_iso_date(origin + static_cast<long long>(s.days[k])), s.label, s.tmin[k]);
        }
    }
}

} // namespace gravepi::fixtures
