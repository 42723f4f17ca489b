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

#include "gravepi/gravity.hpp"
#include "gravepi/integrate.hpp"
#include "gravepi/parallel.hpp"
#include "gravepi/random.hpp"
#include "gravepi/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gravepi::synthetic {

inline constexpr double driver_population   = 8.0e6;
inline constexpr double follower_population = 1.0e5;
inline constexpr double half_width          = 100.0;

/// One large driver city at the origin and equal-sized followers scattered
/// uniformly over [-100, 100]^2. Patch ids are "1" (driver), "2", ...
struct Scenario {
    std::vector<PatchGeometry> geoms;
    std::string seed_patch = "1";
    double seed_count      = 1.0;
    std::uint64_t rng_seed = 0;

    const PatchGeometry& driver() const { return geoms.front(); }
};

inline Scenario generate_scenario(std::size_t n_followers, std::uint64_t rng_seed)
{
    if (n_followers < 1) {
        throw StructuralError("the synthetic scenario needs at least one follower city");
    }
    constexpr double min_separation = 1e-6;
    Scenario sc;
    sc.rng_seed = rng_seed;
    sc.geoms.push_back({"1", driver_population, 0.0, 0.0});
    Rng rng = substream(rng_seed, 0);
    while (sc.geoms.size() < n_followers + 1) {
        PatchGeometry g{std::to_string(sc.geoms.size() + 1), follower_population,
                        uniform(rng, -half_width, half_width), uniform(rng, -half_width, half_width)};
        bool clear = std::all_of(sc.geoms.begin(), sc.geoms.end(), [&](const auto& o) {
            return distance(g, o, DistanceMode::euclidean) >= min_separation;
        });
        if (clear) {
            sc.geoms.push_back(std::move(g));
        }
    }
    return sc;
}

struct RunOptions {
    double beta_v       = 0.3; ///< constant, no seasonality
    double beta_h       = 0.3;
    double horizon      = 2000.0; ///< days
    double dt           = 0.1;
    double sample_every = 1.0;
};

inline std::vector<DiseaseParams> scenario_params(const Scenario& sc, const RunOptions& opts)
{
    DiseaseParams p;
    p.beta_v = SeasonalBeta::constant(opts.beta_v);
    p.beta_h = opts.beta_h;
    return std::vector<DiseaseParams>(sc.geoms.size(), p);
}

/// Non-seasonal run seeded in the driver; returns the I_h curve of every city.
inline EpidemicSeries run(const Scenario& sc, const CouplingMatrix& coupling, const RunOptions& opts = {})
{
    if (coupling.size() != sc.geoms.size()) {
        throw StructuralError("coupling dimension does not match the scenario");
    }
    auto params = scenario_params(sc, opts);
    std::vector<PatchState> init;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < sc.geoms.size(); ++i) {
        const auto& g = sc.geoms[i];
        init.push_back(seeded_state(g.population, params[i].vector_ratio, g.patch_id == sc.seed_patch ? sc.seed_count : 0.0));
        ids.push_back(g.patch_id);
    }
    IntegrationOptions io;
    io.dt           = opts.dt;
    io.sample_every = opts.sample_every;
    io.seasonal     = false;
    io.patch_ids    = ids;
    return integrate(init, params, coupling, 0.0, opts.horizon, io).compartment(Compartment::i_h);
}

/// A gravity matrix rescaled so its largest off-diagonal weight equals `cap`.
struct ScaledCoupling {
    CouplingMatrix matrix;
    double factor;        ///< multiplier applied to the raw weights
    double implied_theta; ///< theta * factor
};

inline ScaledCoupling capped_gravity(const Scenario& sc, const GravityParams& params, double cap = 0.01)
{
    auto raw          = gravity_matrix(sc.geoms, params);
    const double peak = raw.max_off_diagonal();
    if (!(peak > 0.0)) {
        throw DomainError("gravity matrix has no positive off-diagonal weight to rescale");
    }
    const double factor = cap / peak;
    return {scale_off_diagonal(raw, factor, 1.0), factor, params.theta * factor};
}

struct CorrelationPoint {
    std::string patch_id;
    double distance;
    std::optional<double> correlation; ///< empty when a curve has zero variance
};

/// Pearson correlation of each non-reference curve with the reference curve
/// over the whole run, sorted by distance from the reference.
inline std::vector<CorrelationPoint> correlation_vs_distance(const EpidemicSeries& series,
                                                             std::span<const PatchGeometry> geoms,
                                                             const std::string& reference)
{
    if (series.length() < 2) {
        throw InsufficientData("correlation needs at least two time points");
    }
    const std::size_t ref = series.index_of(reference);
    auto ref_geom = std::find_if(geoms.begin(), geoms.end(), [&](const auto& g) { return g.patch_id == reference; });
    if (ref_geom == geoms.end()) {
        throw StructuralError("reference patch '" + reference + "' has no geometry");
    }
    std::vector<CorrelationPoint> out;
    for (const auto& g : geoms) {
        if (g.patch_id == reference) {
            continue;
        }
        const std::size_t k = series.index_of(g.patch_id);
        out.push_back({g.patch_id, distance(*ref_geom, g, DistanceMode::euclidean),
                       stats::pearson(series.values[k], series.values[ref])});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.distance < b.distance; });
    return out;
}

/// argmax_t I_i(t) - argmax_t I_ref(t) for every patch, ties resolved to the
/// earliest time. Empty for a patch whose curve never rises above zero.
inline std::vector<std::optional<double>> peak_delay(const EpidemicSeries& series, const std::string& reference)
{
    const std::size_t ref = series.index_of(reference);
    auto peak_time        = [&](const std::vector<double>& v) -> std::optional<double> {
        std::size_t k = stats::argmax(v);
        if (!(v[k] > 0.0)) {
            return std::nullopt;
        }
        return series.times[k];
    };
    auto ref_peak = peak_time(series.values[ref]);
    if (!ref_peak) {
        throw DomainError("reference curve '" + reference + "' has no peak");
    }
    std::vector<std::optional<double>> out;
    for (const auto& v : series.values) {
        auto p = peak_time(v);
        out.push_back(p ? std::optional<double>(*p - *ref_peak) : std::nullopt);
    }
    return out;
}

/// Mean of the defined correlations.
inline double mean_correlation(std::span<const CorrelationPoint> curve)
{
    std::vector<double> c;
    for (const auto& p : curve) {
        if (p.correlation) {
            c.push_back(*p.correlation);
        }
    }
    return c.empty() ? 0.0 : stats::mean(c);
}

/// Mean correlation of the nearer half minus that of the farther half
/// (the curve must be sorted by distance).
inline double decay_steepness(std::span<const CorrelationPoint> curve)
{
    const std::size_t half = curve.size() / 2;
    return mean_correlation(curve.first(half)) - mean_correlation(curve.subspan(curve.size() - half));
}

enum class SweepParam { alpha, gamma, theta };

inline SweepParam parse_sweep_param(const std::string& name)
{
    if (name == "alpha") {
        return SweepParam::alpha;
    }
    if (name == "gamma") {
        return SweepParam::gamma;
    }
    if (name == "theta") {
        return SweepParam::theta;
    }
    throw ConfigError("cannot sweep '" + name + "': expected alpha, gamma or theta");
}

struct SweepCurve {
    double value;
    CouplingMatrix coupling;
    std::vector<CorrelationPoint> curve;
};

struct SweepOptions {
    RunOptions run;
    double cap           = 0.01;       ///< largest off-diagonal weight of the `fixed` configuration
    double distance_unit = half_width; ///< length scale of the distance kernel
    std::size_t workers  = 1;
};

/// One correlation-vs-distance curve per value of the swept parameter.
///
/// The rescaling factor is fixed once from the `fixed` parameters (largest
/// off-diagonal weight = cap) and shared by every sweep point, so changes in
/// alpha, gamma and theta keep their effect on the weights. Distances are
/// measured in units of `distance_unit`, which is where curves of different
/// gamma cross. Entries are capped at 1 since they are visit probabilities.
inline std::vector<SweepCurve> parameter_sweep(const Scenario& sc, SweepParam which, std::span<const double> values,
                                               const GravityParams& fixed, const SweepOptions& opts = {})
{
    if (values.empty()) {
        throw StructuralError("sweep needs at least one value");
    }
    GravityOptions gopts;
    gopts.distance_unit = opts.distance_unit;
    const double peak   = gravity_matrix(sc.geoms, fixed, gopts).max_off_diagonal();
    if (!(peak > 0.0)) {
        throw DomainError("gravity matrix has no positive off-diagonal weight to rescale");
    }
    const double factor = opts.cap / peak;
    std::vector<std::optional<SweepCurve>> slots(values.size());
    parallel_for(values.size(), opts.workers, [&](std::size_t k) {
        GravityParams gp = fixed;
        switch (which) {
        case SweepParam::alpha:
            gp.alpha = values[k];
            break;
        case SweepParam::gamma:
            gp.gamma = values[k];
            break;
        case SweepParam::theta:
            gp.theta = values[k];
            break;
        }
        auto m      = scale_off_diagonal(gravity_matrix(sc.geoms, gp, gopts), factor, 1.0);
        auto series = run(sc, m, opts.run);
        slots[k]    = SweepCurve{values[k], m, correlation_vs_distance(series, sc.geoms, sc.driver().patch_id)};
    });
    std::vector<SweepCurve> out;
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

} // namespace gravepi::synthetic
