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

#include "gravepi/climate.hpp"
#include "gravepi/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gravepi;
using namespace gravepi::climate;

namespace {

TemperatureSeries sinusoid(double t0, double eps, std::size_t days = 365)
{
    TemperatureSeries s;
    s.label = "x";
    for (std::size_t d = 0; d < days; ++d) {
        s.days.push_back(static_cast<double>(d));
        s.tmin.push_back(t0 + eps * std::sin(2.0 * std::numbers::pi * static_cast<double>(d) / 365.0));
    }
    return s;
}

} // namespace

TEST(FitSinusoid, ExactRecovery)
{
    auto f = fit_sinusoid(sinusoid(70, 5));
    EXPECT_NEAR(f.t0, 70.0, 1e-9);
    EXPECT_NEAR(f.eps, 5.0, 1e-9);
    EXPECT_LT(f.residual_sse, 1e-9);
    EXPECT_TRUE(f.warnings.empty());
    for (const auto& ref : fixtures::reference_climate()) {
        auto g = fit_sinusoid(fixtures::temperature(ref, 0.0, 1));
        EXPECT_NEAR(g.t0, ref.t0, 1e-9 * ref.t0);
        EXPECT_NEAR(g.eps, ref.eps, 1e-9 * ref.t0);
        EXPECT_LT(g.residual_sse, 1e-9);
    }
}

TEST(FitSinusoid, FlatSeriesHasNoAmplitude)
{
    auto f = fit_sinusoid(sinusoid(74.4, 0));
    EXPECT_NEAR(f.t0, 74.4, 1e-9);
    EXPECT_NEAR(f.eps, 0.0, 1e-9);
    EXPECT_NEAR(*f.pct_variation, 0.0, 1e-9);
}

TEST(FitSinusoid, NegativeCoefficientKeepsSignInternally)
{
    auto f = fit_sinusoid(sinusoid(60, -3));
    EXPECT_NEAR(f.sine_coefficient, -3.0, 1e-9);
    EXPECT_NEAR(f.eps, 3.0, 1e-9);
    EXPECT_NEAR(f.at(365.0 / 4.0), 57.0, 1e-9);
}

TEST(FitSinusoid, ShiftCovariance)
{
    Rng rng = substream(77, 0);
    auto s  = sinusoid(65, 4);
    for (double& v : s.tmin) {
        v += normal(rng, 0.0, 1.0);
    }
    auto base = fit_sinusoid(s);
    for (double& v : s.tmin) {
        v += 10.0;
    }
    auto moved = fit_sinusoid(s);
    EXPECT_NEAR(moved.t0 - base.t0, 10.0, 1e-9);
    EXPECT_NEAR(moved.eps, base.eps, 1e-9);
}

TEST(FitSinusoid, MeanLevelUnbiasedUnderNoise)
{
    const auto& ref = fixtures::reference_climate()[0];
    double sum      = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        sum += fit_sinusoid(fixtures::temperature(ref, 1.0, 1000 + k)).t0;
    }
    EXPECT_NEAR(sum / 100.0, ref.t0, 0.1);
}

TEST(FitSinusoid, MissingDaysWarnOnLowCoverage)
{
    auto s = sinusoid(70, 5);
    TemperatureSeries sparse;
    sparse.label = "sparse";
    for (std::size_t k = 0; k < s.days.size(); k += 3) {
        sparse.days.push_back(s.days[k]);
        sparse.tmin.push_back(s.tmin[k]);
    }
    auto f = fit_sinusoid(sparse);
    EXPECT_NEAR(f.eps, 5.0, 1e-9);
    ASSERT_EQ(f.warnings.size(), 1u);
}

TEST(FitSinusoid, Errors)
{
    EXPECT_THROW(fit_sinusoid(sinusoid(70, 5, 2)), InsufficientData);
    EXPECT_THROW(fit_sinusoid(sinusoid(70, 5, 100)), InsufficientData);
    TemperatureSeries collinear{"c", {0.0, 182.5, 365.0}, {1.0, 2.0, 3.0}};
    EXPECT_THROW(fit_sinusoid(collinear), IllConditioned);
    TemperatureSeries unordered{"u", {0.0, 300.0, 200.0}, {1.0, 2.0, 3.0}};
    EXPECT_THROW(fit_sinusoid(unordered), ValidationError);
}

TEST(PctVariation, Formula)
{
    EXPECT_NEAR(pct_variation(63.5454, 3.5680), 5.6149, 1e-4);
    EXPECT_NEAR(pct_variation(74.3880, 0.1353), 0.18, 0.005);
    EXPECT_EQ(pct_variation(50.0, 0.0), 0.0);
    EXPECT_THROW(pct_variation(0.0, 1.0), DomainError);
    EXPECT_THROW(pct_variation(-3.0, 1.0), DomainError);
}
