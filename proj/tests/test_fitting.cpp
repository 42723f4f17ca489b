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

#include "gravepi/fitting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace gravepi;
using namespace gravepi::fit;

namespace {

// Three-patch seasonal model with the data-derived starting state replaced
// by an explicit one so generated data and fits share initial conditions.
ModelConfig three_patch_config(CouplingKind coupling = CouplingKind::identity)
{
    ModelConfig cfg;
    cfg.geoms  = {{"north_coast", 7.6e6, -80.0, -6.0}, {"central_coast", 1.05e7, -77.0, -12.0}, {"jungle", 2.8e6, -73.0, -6.0}};
    cfg.params.assign(3, DiseaseParams{});
    cfg.coupling = coupling;
    cfg.initial  = std::vector<PatchState>{seeded_state(7.6e6, 3, 5), seeded_state(1.05e7, 3, 5), seeded_state(2.8e6, 3, 5)};
    return cfg;
}

FitProblem generated_problem(std::size_t weeks, const ParamValues& truth)
{
    FitProblem p;
    p.model          = three_patch_config();
    p.observed       = simulate_incidence(p.model, truth, *p.model.initial, weeks);
    p.observed.provenance = Provenance::data;
    p.free_params    = {{"beta0", Sampler::uniform(0.2, 0.4)}};
    p.iterations     = 50;
    return p;
}

} // namespace

TEST(Objectives, WorkedExamples)
{
    EXPECT_EQ(least_squares(std::vector<double>{1, 2}, std::vector<double>{0, 0}), 5.0);
    EXPECT_EQ(least_squares(std::vector<double>{3, 3, 3}, std::vector<double>{1, 2, 3}), 5.0);
    EXPECT_EQ(pearson_chi2(std::vector<double>{4}, std::vector<double>{2}), 1.0);
    EXPECT_EQ(pearson_chi2(std::vector<double>{2}, std::vector<double>{4}), 2.0);
    EXPECT_EQ(pearson_chi2(std::vector<double>{0}, std::vector<double>{0}), 0.0);
    EXPECT_EQ(pearson_chi2(std::vector<double>{0}, std::vector<double>{1}), 1e6);
    EXPECT_THROW(least_squares(std::vector<double>{1}, std::vector<double>{1, 2}), StructuralError);
    EXPECT_THROW(pearson_chi2(std::vector<double>{1}, std::vector<double>{}), StructuralError);
}

TEST(Objectives, IdentitiesOnRandomSeries)
{
    Rng rng = substream(21, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 30);
        std::vector<double> m(n), d(n);
        for (std::size_t k = 0; k < n; ++k) {
            m[k] = uniform(rng, 0.0, 100.0);
            d[k] = uniform(rng, 0.0, 100.0);
        }
        EXPECT_EQ(least_squares(m, d), least_squares(d, m));
        EXPECT_EQ(least_squares(m, m), 0.0);
        EXPECT_EQ(pearson_chi2(m, m), 0.0);
        EXPECT_GE(pearson_chi2(m, d), 0.0);
        auto m2 = m, d2 = d;
        m2.push_back(17.0);
        d2.push_back(17.0);
        EXPECT_EQ(least_squares(m2, d2), least_squares(m, d));
        EXPECT_EQ(pearson_chi2(m2, d2), pearson_chi2(m, d));
    }
    EXPECT_EQ(parse_objective("chi2"), Objective::pearson_chi2);
    EXPECT_EQ(parse_objective("least_squares"), Objective::least_squares);
    EXPECT_THROW(parse_objective("l1"), ConfigError);
}

TEST(Samplers, Ranges)
{
    Rng rng = substream(1, 1);
    auto u = Sampler::uniform(0, 1), c = Sampler::circular(), l = Sampler::log_decade();
    std::set<int> decades;
    for (int k = 0; k < 10000; ++k) {
        const double x = u.draw(rng), y = c.draw(rng), z = l.draw(rng);
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
        EXPECT_GE(y, 0.0);
        EXPECT_LT(y, 365.0);
        EXPECT_GT(z, 0.0);
        EXPECT_LE(z, 1.0);
        decades.insert(static_cast<int>(std::floor(std::log10(z))));
    }
    EXPECT_GE(decades.size(), 8u);
    EXPECT_EQ(Sampler::fixed(0.3).draw(rng), 0.3);
}

TEST(Samplers, Parse)
{
    EXPECT_EQ(Sampler::parse("uniform(0.2,0.5)").b, 0.5);
    EXPECT_EQ(Sampler::parse("circular(0,365)").kind, Sampler::Kind::circular);
    EXPECT_EQ(Sampler::parse("log_decade(-10,0)").a, -10.0);
    EXPECT_EQ(Sampler::parse("fixed(1)").a, 1.0);
    for (const char* bad : {"gauss(0,1)", "uniform(1)", "uniform(2,1)", "log_decade(-1.5,0)", "uniform 0 1",
                            "uniform(a,b)", "circular(5,365)"}) {
        EXPECT_THROW(Sampler::parse(bad), ConfigError) << bad;
    }
    EXPECT_EQ(Sampler::parse(Sampler::uniform(0.25, 0.75).describe()).a, 0.25);
}

TEST(Samplers, SampleParamsIsDeterministic)
{
    std::vector<FreeParam> spec = {{"beta0", Sampler::uniform(0, 1)}, {"phi", Sampler::circular()}};
    Rng a = substream(4, 2), b = substream(4, 2);
    EXPECT_EQ(sample_params(spec, a), sample_params(spec, b));
}

TEST(CircularRange, Examples)
{
    using R = std::pair<double, double>;
    EXPECT_EQ(circular_range(std::vector<double>{10, 20, 30}), R(10, 30));
    EXPECT_EQ(circular_range(std::vector<double>{350, 5, 15}), R(350, 15));
    EXPECT_EQ(circular_range(std::vector<double>{291, 330, 20, 61}), R(291, 61));
    EXPECT_EQ(circular_range(std::vector<double>{42}), R(42, 42));
    EXPECT_THROW(circular_range(std::vector<double>{}), StructuralError);
}

TEST(Resolve, GlobalAndPerPatchValues)
{
    auto cfg = three_patch_config();
    auto r   = resolve(cfg, {{"beta0:jungle", 0.5}, {"beta0", 0.3}, {"eps", 0.1}, {"phi", 400}, {"beta_h", 0.4}});
    EXPECT_EQ(r.params[0].beta_v.beta0(), 0.3);
    EXPECT_EQ(r.params[2].beta_v.beta0(), 0.5);
    EXPECT_NEAR(r.params[1].beta_v.phi(), 35.0, 1e-12);
    EXPECT_EQ(r.params[1].beta_h, 0.4);
    EXPECT_EQ(r.coupling, CouplingMatrix::identity(3));
    EXPECT_THROW(resolve(cfg, {{"beta0:lima", 0.5}}), ConfigError);
    EXPECT_THROW(resolve(cfg, {{"zeta", 0.5}}), ConfigError);
    EXPECT_THROW(resolve(cfg, {{"beta0", 0.1}, {"eps", 0.2}}), DomainError);

    cfg.coupling               = CouplingKind::gravity;
    cfg.gravity_options.distance_mode = DistanceMode::haversine;
    auto g = resolve(cfg, {{"alpha", 1}, {"beta", 1}, {"gamma", 2}, {"theta", 1e-12}});
    EXPECT_EQ(g.coupling(0, 1), g.coupling(1, 0));
    EXPECT_GT(g.coupling(0, 1), 0.0);
    cfg.coupling = CouplingKind::uniform;
    EXPECT_EQ(resolve(cfg, {{"weight", 0.02}}).coupling(2, 0), 0.02);
}

TEST(InitialFromData, FirstObservedWeek)
{
    auto cfg     = three_patch_config();
    cfg.initial.reset();
    EpidemicSeries obs;
    obs.times     = {1, 2};
    obs.patch_ids = {"jungle", "central_coast", "north_coast"};
    obs.values    = {{7, 3}, {0, 1}, {2, 2}};
    auto init     = initial_from_data(cfg, obs);
    EXPECT_EQ(init[0].i_h, 2.0);
    EXPECT_EQ(init[1].i_h, 0.0);
    EXPECT_EQ(init[2].i_h, 7.0);
    EXPECT_EQ(init[2].s_h, 2.8e6 - 7.0);
    EXPECT_EQ(init[2].s_v, 3 * 2.8e6);
    obs.values = {{0, 9}, {0, 1}, {0, 2}};
    init       = initial_from_data(cfg, obs);
    EXPECT_EQ(init[2].i_h, 1.0);
}

TEST(Fit, DegenerateSamplerAtTruthScoresZero)
{
    auto p        = generated_problem(30, {{"beta0", 0.3}, {"eps", 0.1}});
    p.free_params = {{"beta0", Sampler::fixed(0.3)}, {"eps", Sampler::fixed(0.1)}};
    p.iterations  = 1;
    auto r        = fit::fit(p);
    EXPECT_EQ(r.best_score, 0.0);
    EXPECT_EQ(r.evaluations, 1u);
    ASSERT_EQ(r.diagnostics.size(), 3u);
    for (const auto& d : r.diagnostics) {
        EXPECT_EQ(d.peak_week_error, 0);
        EXPECT_DOUBLE_EQ(*d.magnitude_ratio, 1.0);
    }
}

TEST(Fit, DeterministicAndRanked)
{
    auto p     = generated_problem(30, {{"beta0", 0.3}});
    p.workers  = 3;
    auto a     = fit::fit(p);
    p.workers  = 1;
    auto b     = fit::fit(p);
    EXPECT_EQ(a.best_params, b.best_params);
    EXPECT_EQ(a.best_score, b.best_score);
    ASSERT_EQ(a.top_k.size(), 5u);
    for (std::size_t k = 0; k < a.top_k.size(); ++k) {
        EXPECT_EQ(a.top_k[k].params, b.top_k[k].params);
        EXPECT_EQ(a.top_k[k].iteration, b.top_k[k].iteration);
        if (k > 0) {
            EXPECT_LE(a.top_k[k - 1].score, a.top_k[k].score);
        }
    }
    EXPECT_EQ(a.best_score, a.top_k.front().score);
    EXPECT_EQ(a.evaluations, 50u);
}

TEST(Fit, MoreIterationsNeverScoreWorse)
{
    auto p       = generated_problem(30, {{"beta0", 0.3}, {"eps", 0.05}});
    p.free_params = {{"beta0", Sampler::uniform(0.2, 0.4)}, {"eps", Sampler::uniform(0, 0.1)}};
    p.objective   = Objective::pearson_chi2;
    p.iterations  = 20;
    auto small    = fit::fit(p);
    p.iterations  = 40;
    auto big      = fit::fit(p);
    EXPECT_LE(big.best_score, small.best_score);
}

TEST(Fit, RecoversTransmissionOfGeneratedData)
{
    auto p       = generated_problem(52, {{"beta0", 0.3}, {"eps", 0.1}});
    p.free_params = {{"beta0", Sampler::uniform(0, 1)}, {"eps", Sampler::fixed(0.1)}};
    p.iterations  = 400;
    auto r        = fit::fit(p);
    EXPECT_NEAR(*lookup(r.best_params, "beta0"), 0.3, 0.05);
    for (const auto& d : r.diagnostics) {
        EXPECT_LE(std::abs(d.peak_week_error), 1);
    }
}

TEST(Fit, CountsRejectedDrawsAndFailsWhenNothingScores)
{
    auto p        = generated_problem(10, {{"beta0", 0.3}});
    p.free_params = {{"beta0", Sampler::uniform(0, 0.1)}, {"eps", Sampler::uniform(0.2, 0.3)}};
    p.iterations  = 10;
    EXPECT_THROW(fit::fit(p), AllFailed);
    p.free_params = {{"beta0", Sampler::uniform(0, 0.4)}, {"eps", Sampler::uniform(0.0, 0.2)}};
    p.iterations  = 200;
    auto r        = fit::fit(p);
    EXPECT_GT(r.rejected, 0u);
    EXPECT_EQ(r.rejected + r.evaluations + r.failures, 200u);
}

TEST(Fit, AggregateScoresTheSum)
{
    auto p       = generated_problem(20, {{"beta0", 0.3}});
    p.aggregate  = true;
    p.free_params = {{"beta0", Sampler::fixed(0.32)}};
    p.iterations  = 1;
    auto r        = fit::fit(p);
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].series, "total");
    auto total_model = r.best_incidence.total().values[0];
    auto total_data  = p.observed.total().values[0];
    EXPECT_DOUBLE_EQ(r.best_score, least_squares(total_model, total_data));
}

TEST(Fit, ValidatesProblem)
{
    auto p = generated_problem(10, {{"beta0", 0.3}});
    p.free_params.clear();
    EXPECT_THROW(fit::fit(p), ConfigError);
    p            = generated_problem(10, {{"beta0", 0.3}});
    p.iterations = 0;
    EXPECT_THROW(fit::fit(p), ConfigError);
    p                   = generated_problem(10, {{"beta0", 0.3}});
    p.observed.values[0][3] = -1;
    EXPECT_THROW(fit::fit(p), ValidationError);
    p                = generated_problem(10, {{"beta0", 0.3}});
    p.scored_patches = {"lima"};
    EXPECT_THROW(fit::fit(p), StructuralError);
}

TEST(TwoStage, FixesThenReleasesExponents)
{
    auto p         = generated_problem(20, {{"beta0", 0.3}});
    p.model.gravity_options.distance_mode = DistanceMode::haversine;
    p.iterations   = 12;
    auto r = fit_two_stage_gravity(p, Sampler::uniform(0, 1), Sampler::log_decade(-14, -10), Sampler::uniform(0, 1),
                                   Sampler::uniform(0, 2));
    EXPECT_EQ(*lookup(r.stage1.best_params, "alpha"), 1.0);
    EXPECT_EQ(*lookup(r.stage1.best_params, "gamma"), 1.0);
    EXPECT_EQ(*lookup(r.stage2.best_params, "beta"), *lookup(r.stage1.best_params, "beta"));
    EXPECT_EQ(*lookup(r.stage2.best_params, "theta"), *lookup(r.stage1.best_params, "theta"));
    EXPECT_EQ(*lookup(r.stage2.best_params, "beta0"), *lookup(r.stage1.best_params, "beta0"));
    const double a = *lookup(r.stage2.best_params, "alpha");
    EXPECT_GE(a, 0.0);
    EXPECT_LT(a, 1.0);
}
