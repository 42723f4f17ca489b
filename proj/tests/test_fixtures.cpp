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

#include "gravepi/fixtures.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

using namespace gravepi;

TEST(Fixtures, ProvincesMatchThePatchPopulations)
{
    auto p = fixtures::provinces(1);
    ASSERT_EQ(p.size(), 79u);
    std::map<data::RegionClass, int> counts;
    for (const auto& r : p) {
        ++counts[r.region];
        EXPECT_EQ(r.population, std::round(r.population));
    }
    EXPECT_EQ(counts[data::RegionClass::jungle], 22);
    EXPECT_EQ(counts[data::RegionClass::mountain_south], 7);
    auto plan = data::build_patches(p, data::Scheme::three_patch);
    ASSERT_EQ(plan.patches.size(), 3u);
    EXPECT_EQ(plan.patches[0].population, 7.6e6);
    EXPECT_EQ(plan.patches[1].population, 10.5e6);
    EXPECT_EQ(plan.patches[2].population, 2.8e6);
    EXPECT_EQ(plan.dropped.size(), 7u);
    std::ostringstream os;
    data::write_provinces(os, p);
    std::istringstream in(os.str());
    EXPECT_EQ(data::parse_provinces(csv::parse(in)), p);
}

TEST(Fixtures, CasesHaveTheDocumentedShape)
{
    auto p  = fixtures::provinces(1);
    auto cs = fixtures::cases(p, 1);
    EXPECT_EQ(cs.weeks, 780u);
    EXPECT_EQ(data::provinces_with_cases(cs, data::epidemic_2000_2001).size(), 49u);
    auto plan = data::build_patches(p, data::Scheme::three_patch);
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k].region == data::RegionClass::mountain_south) {
            for (auto c : cs.counts[k]) {
                EXPECT_EQ(c, 0);
            }
        }
    }
    auto agg    = data::aggregate_cases(cs, plan);
    auto season = data::select_window(agg, data::seasonal_2002_2008);
    // Jungle cases never stop; coastal off-season weeks are near zero.
    const auto& jungle = season.values[agg.index_of("jungle")];
    EXPECT_GT(*std::min_element(jungle.begin(), jungle.end()), 0.0);
    const auto& coast = season.values[agg.index_of("north_coast")];
    EXPECT_EQ(*std::min_element(coast.begin(), coast.end()), 0.0);
    // Coast peaks trail jungle peaks by about six weeks.
    const std::size_t year = 52;
    long lag_sum = 0;
    for (std::size_t y = 0; y + year <= jungle.size(); y += year) {
        auto jp = std::max_element(jungle.begin() + y, jungle.begin() + y + year) - jungle.begin();
        auto cp = std::max_element(coast.begin() + y, coast.begin() + y + year) - coast.begin();
        lag_sum += cp - jp;
    }
    EXPECT_NEAR(static_cast<double>(lag_sum) / 6.0, 6.0, 2.0);

    std::ostringstream os;
    data::write_cases(os, cs);
    std::istringstream in(os.str());
    auto back = data::parse_cases(csv::parse(in));
    EXPECT_EQ(back.province_ids, cs.province_ids);
    EXPECT_EQ(back.counts, cs.counts);
}

TEST(Fixtures, ClimateCsvRoundTrip)
{
    std::vector<climate::TemperatureSeries> s;
    for (const auto& ref : fixtures::reference_climate()) {
        s.push_back(fixtures::temperature(ref, 1.0, 5));
    }
    std::ostringstream os;
    fixtures::write_climate(os, s);
    std::istringstream in(os.str());
    auto back = data::parse_climate(csv::parse(in));
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(back[k].label, s[k].label);
        EXPECT_EQ(back[k].days, s[k].days);
        EXPECT_EQ(back[k].tmin, s[k].tmin);
    }
}

TEST(Fixtures, Deterministic)
{
    auto a = fixtures::provinces(3), b = fixtures::provinces(3);
    EXPECT_EQ(a, b);
    EXPECT_EQ(fixtures::cases(a, 3).counts, fixtures::cases(b, 3).counts);
}
