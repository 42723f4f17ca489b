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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gravepi::fit {

namespace detail {
inline void check_aligned(std::span<const double> model, std::span<const double> data)
{
    if (model.size() != data.size()) {
        throw StructuralError("model and data series differ in length (" + std::to_string(model.size()) + " vs " +
                              std::to_string(data.size()) + ")");
    }
}
} // namespace detail

/// S = sum (M_i - D_i)^2
inline double least_squares(std::span<const double> model, std::span<const double> data)
{
    detail::check_aligned(model, data);
    double s = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double r = model[i] - data[i];
        s += r * r;
    }
    return s;
}

inline constexpr double chi2_floor = 1e-6;

/// T = sum (M_i - D_i)^2 / max(M_i, floor). The floor keeps weeks with a zero
/// model prediction finite.
inline double pearson_chi2(std::span<const double> model, std::span<const double> data, double floor = chi2_floor)
{
    detail::check_aligned(model, data);
    double t = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double r = model[i] - data[i];
        t += r * r / std::max(model[i], floor);
    }
    return t;
}

enum class Objective { least_squares, pearson_chi2 };

inline Objective parse_objective(const std::string& name)
{
    if (name == "least_squares" || name == "ls") {
        return Objective::least_squares;
    }
    if (name == "pearson_chi2" || name == "chi2") {
        return Objective::pearson_chi2;
    }
    throw ConfigError("unknown objective '" + name + "'");
}

inline double score(Objective obj, std::span<const double> model, std::span<const double> data)
{
    return obj == Objective::least_squares ? least_squares(model, data) : pearson_chi2(model, data);
}

/// Distribution of one free parameter.
///   uniform(a,b)        a + (b-a) U,  U ~ [0,1)
///   circular(a,b)       same draw, for day offsets on a circle of length b-a
///   log_decade(lo,hi)   U * 10^k, U ~ (0,1], k uniform over the integers lo..hi
///   fixed(v)            always v
struct Sampler {
    enum class Kind { uniform, circular, log_decade, fixed };
    Kind kind = Kind::uniform;
    double a  = 0.0;
    double b  = 1.0;

    static Sampler uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
    static Sampler circular(double period = 365.0) { return {Kind::circular, 0.0, period}; }
    static Sampler log_decade(int lo_exp = -10, int hi_exp = 0)
    {
        return {Kind::log_decade, static_cast<double>(lo_exp), static_cast<double>(hi_exp)};
    }
    static Sampler fixed(double v) { return {Kind::fixed, v, v}; }

    double draw(Rng& rng) const
    {
        switch (kind) {
        case Kind::uniform:
        case Kind::circular:
            return gravepi::uniform(rng, a, b);
        case Kind::log_decade: {
            const auto decades = static_cast<std::uint64_t>(b - a) + 1;
            const double exp   = a + static_cast<double>(uniform_index(rng, decades));
            return (1.0 - uniform01(rng)) * std::pow(10.0, exp);
        }
        case Kind::fixed:
            return a;
        }
        return a;
    }

    /// Parses "uniform(0,1)", "circular(0,365)", "log_decade(-10,0)", "fixed(0.3)".
    static Sampler parse(const std::string& text)
    {
        auto open  = text.find('(');
        auto close = text.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open) {
            throw ConfigError("malformed sampler '" + text + "'");
        }
        const std::string name = text.substr(0, open);
        std::vector<double> args;
        std::stringstream ss(text.substr(open + 1, close - open - 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t used = 0;
                args.push_back(std::stod(tok, &used));
            }
            catch (const std::exception&) {
                throw ConfigError("bad sampler argument '" + tok + "' in '" + text + "'");
            }
        }
        auto need = [&](std::size_t n) {
            if (args.size() != n) {
                throw ConfigError("sampler '" + name + "' takes " + std::to_string(n) + " argument(s)");
            }
        };
        if (name == "uniform") {
            need(2);
            if (!(args[1] >= args[0])) {
                throw ConfigError("uniform sampler needs lo <= hi");
            }
            return uniform(args[0], args[1]);
        }
        if (name == "circular") {
            need(2);
            if (args[0] != 0.0 || !(args[1] > 0.0)) {
                throw ConfigError("circular sampler must be circular(0,period)");
            }
            return circular(args[1]);
        }
        if (name == "log_decade") {
            need(2);
            if (args[0] != std::floor(args[0]) || args[1] != std::floor(args[1]) || args[1] < args[0]) {
                throw ConfigError("log_decade sampler needs integer exponents lo <= hi");
            }
            return log_decade(static_cast<int>(args[0]), static_cast<int>(args[1]));
        }
        if (name == "fixed") {
            need(1);
            return fixed(args[0]);
        }
        throw ConfigError("unknown sampler '" + name + "'");
    }

    std::string describe() const
    {
        std::ostringstream os;
        switch (kind) {
        case Kind::uniform:
            os << "uniform(" << a << "," << b << ")";
            break;
        case Kind::circular:
            os << "circular(0," << b << ")";
            break;
        case Kind::log_decade:
            os << "log_decade(" << a << "," << b << ")";
            break;
        case Kind::fixed:
            os << "fixed(" << a << ")";
            break;
        }
        return os.str();
    }
};

/// A parameter name with its sampler. Names: beta0, eps, phi, beta_h (disease,
/// all patches), alpha, beta, gamma, theta (gravity), weight (uniform coupling).
/// A ":<patch_id>" suffix restricts a disease parameter to one patch.
struct FreeParam {
    std::string name;
    Sampler sampler;
};

using ParamValues = std::vector<std::pair<std::string, double>>;

inline std::optional<double> lookup(const ParamValues& values, const std::string& name)
{
    for (const auto& [k, v] : values) {
        if (k == name) {
            return v;
        }
    }
    return std::nullopt;
}

inline ParamValues sample_params(std::span<const FreeParam> spec, Rng& rng)
{
    ParamValues out;
    out.reserve(spec.size());
    for (const auto& p : spec) {
        out.emplace_back(p.name, p.sampler.draw(rng));
    }
    return out;
}

enum class CouplingKind { identity, uniform, gravity };

/// Everything needed to turn parameter values into a simulated weekly series.
struct ModelConfig {
    std::vector<PatchGeometry> geoms;
    std::vector<DiseaseParams> params; ///< base values, one per patch
    bool seasonal         = true;
    CouplingKind coupling = CouplingKind::identity;
    double uniform_weight = 0.0;
    GravityParams gravity;
    GravityOptions gravity_options;
    std::optional<std::vector<PatchState>> initial; ///< overrides the data-derived start
    double dt      = 0.1;
    double t_start = 0.0; ///< model time [days] at the start of the first observed week
};

/// Concrete model after applying sampled values.
struct ResolvedModel {
    std::vector<DiseaseParams> params;
    CouplingMatrix coupling;
};

inline ResolvedModel resolve(const ModelConfig& cfg, const ParamValues& values)
{
    const std::size_t n = cfg.geoms.size();
    if (cfg.params.size() != n) {
        throw StructuralError("model config needs one parameter set per patch");
    }
    GravityParams gp      = cfg.gravity;
    double uniform_weight = cfg.uniform_weight;

    struct Seasonal {
        double beta0, eps, phi;
    };
    std::vector<Seasonal> season(n);
    std::vector<DiseaseParams> params = cfg.params;
    for (std::size_t i = 0; i < n; ++i) {
        season[i] = {params[i].beta_v.beta0(), params[i].beta_v.eps(), params[i].beta_v.phi()};
    }

    auto set_disease = [&](std::size_t i, const std::string& key, double v) {
        if (key == "beta0") {
            season[i].beta0 = v;
        }
        else if (key == "eps") {
            season[i].eps = v;
        }
        else if (key == "phi") {
            season[i].phi = v;
        }
        else if (key == "beta_h") {
            params[i].beta_h = v;
        }
        else {
            throw ConfigError("unknown per-patch parameter '" + key + "'");
        }
    };

    // Global names first so ":<patch>" overrides win regardless of order.
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& [name, v] : values) {
            auto colon = name.find(':');
            if ((colon != std::string::npos) != (pass == 1)) {
                continue;
            }
            if (colon != std::string::npos) {
                const std::string key = name.substr(0, colon);
                const std::string pid = name.substr(colon + 1);
                auto it = std::find_if(cfg.geoms.begin(), cfg.geoms.end(), [&](const auto& g) { return g.patch_id == pid; });
                if (it == cfg.geoms.end()) {
                    throw ConfigError("parameter '" + name + "' names an unknown patch");
                }
                set_disease(static_cast<std::size_t>(it - cfg.geoms.begin()), key, v);
                continue;
            }
            if (name == "alpha") {
                gp.alpha = v;
            }
            else if (name == "beta") {
                gp.beta = v;
            }
            else if (name == "gamma") {
                gp.gamma = v;
            }
            else if (name == "theta") {
                gp.theta = v;
            }
            else if (name == "weight") {
                uniform_weight = v;
            }
            else {
                for (std::size_t i = 0; i < n; ++i) {
                    set_disease(i, name, v);
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        params[i].beta_v = SeasonalBeta(season[i].beta0, season[i].eps, season[i].phi);
    }

    switch (cfg.coupling) {
    case CouplingKind::identity:
        return {std::move(params), CouplingMatrix::identity(n)};
    case CouplingKind::uniform:
        return {std::move(params), uniform_matrix(n, uniform_weight, cfg.gravity_options.diagonal)};
    case CouplingKind::gravity:
        return {std::move(params), gravity_matrix(cfg.geoms, gp, cfg.gravity_options)};
    }
    throw ConfigError("unknown coupling kind");
}

/// Starting state: I_h(0) from the first observed week (capped at the
/// population), one infected host in the busiest patch when every first week
/// is zero, exposed and recovered empty, vectors fully susceptible.
inline std::vector<PatchState> initial_from_data(const ModelConfig& cfg, const EpidemicSeries& observed)
{
    const std::size_t n = cfg.geoms.size();
    std::vector<double> seed(n, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = observed.index_of(cfg.geoms[i].patch_id);
        seed[i]             = std::min(observed.values[k].empty() ? 0.0 : observed.values[k][0], cfg.geoms[i].population);
        any                 = any || seed[i] > 0.0;
    }
    if (!any) {
        std::size_t busiest = 0;
        double best         = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = observed.values[observed.index_of(cfg.geoms[i].patch_id)];
            double total  = std::accumulate(v.begin(), v.end(), 0.0);
            if (total > best) {
                best    = total;
                busiest = i;
            }
        }
        seed[busiest] = 1.0;
    }
    std::vector<PatchState> init;
    for (std::size_t i = 0; i < n; ++i) {
        init.push_back(seeded_state(cfg.geoms[i].population, cfg.params[i].vector_ratio, seed[i]));
    }
    return init;
}

/// Weekly incidence for `weeks` weeks of the model defined by cfg + values.
inline EpidemicSeries simulate_incidence(const ModelConfig& cfg, const ParamValues& values,
                                         std::span<const PatchState> initial, std::size_t weeks)
{
    auto model = resolve(cfg, values);
    IntegrationOptions io;
    io.dt           = cfg.dt;
    io.sample_every = 1.0;
    io.seasonal     = cfg.seasonal;
    for (const auto& g : cfg.geoms) {
        io.patch_ids.push_back(g.patch_id);
    }
    auto traj = integrate(initial, model.params, model.coupling, cfg.t_start,
                          cfg.t_start + 7.0 * static_cast<double>(weeks), io);
    return weekly_incidence(traj);
}

struct FitProblem {
    EpidemicSeries observed; ///< weekly counts; patch ids must match the model geometries
    ModelConfig model;
    std::vector<FreeParam> free_params;
    std::size_t iterations = 10000;
    Objective objective    = Objective::least_squares;
    std::uint64_t rng_seed = 20140601;
    std::size_t top_k      = 5;
    bool aggregate         = false;          ///< score the sum over scored patches
    std::vector<std::string> scored_patches; ///< empty = every patch
    std::size_t workers = 1;

    void validate() const
    {
        if (iterations < 1) {
            throw ConfigError("a fit needs at least one iteration");
        }
        if (free_params.empty()) {
            throw ConfigError("a fit needs at least one free parameter");
        }
        if (observed.length() == 0) {
            throw InsufficientData("observed series is empty");
        }
        for (const auto& v : observed.values) {
            for (double x : v) {
                if (!(x >= 0.0)) {
                    throw ValidationError("observed counts must be nonnegative");
                }
            }
        }
        for (const auto& g : model.geoms) {
            observed.index_of(g.patch_id);
        }
        for (const auto& id : scored_patches) {
            observed.index_of(id);
        }
    }
};

struct Candidate {
    ParamValues params;
    double score;
    std::size_t iteration;
};

/// Peak-position and size mismatch of the best trajectory against one data series.
struct PeakDiagnostic {
    std::string series;
    long peak_week_error;                  ///< model peak week - data peak week
    std::optional<double> magnitude_ratio; ///< model peak / data peak, empty when the data never rise
};

struct FitResult {
    ParamValues best_params;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<Candidate> top_k; ///< ascending by score
    std::size_t evaluations = 0;  ///< iterations that produced a score
    std::size_t failures    = 0;  ///< numerical blowups
    std::size_t rejected    = 0;  ///< draws outside the model's parameter domain
    std::vector<std::string> failure_log;
    EpidemicSeries best_incidence;
    std::vector<PeakDiagnostic> diagnostics;
};

namespace detail {

struct ScoredSeries {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> model;
    std::vector<std::vector<double>> data;
};

inline ScoredSeries scored_series(const FitProblem& p, const EpidemicSeries& model)
{
    std::vector<std::string> ids = p.scored_patches;
    if (ids.empty()) {
        for (const auto& g : p.model.geoms) {
            ids.push_back(g.patch_id);
        }
    }
    ScoredSeries out;
    if (p.aggregate) {
        std::vector<double> m(p.observed.length(), 0.0), d(p.observed.length(), 0.0);
        for (const auto& id : ids) {
            const auto& mv = model.values[model.index_of(id)];
            const auto& dv = p.observed.values[p.observed.index_of(id)];
            for (std::size_t k = 0; k < m.size(); ++k) {
                m[k] += mv[k];
                d[k] += dv[k];
            }
        }
        out.labels.push_back("total");
        out.model.push_back(std::move(m));
        out.data.push_back(std::move(d));
        return out;
    }
    for (const auto& id : ids) {
        out.labels.push_back(id);
        out.model.push_back(model.values[model.index_of(id)]);
        out.data.push_back(p.observed.values[p.observed.index_of(id)]);
    }
    return out;
}

inline double total_score(const FitProblem& p, const EpidemicSeries& model)
{
    auto s   = scored_series(p, model);
    double t = 0.0;
    for (std::size_t k = 0; k < s.model.size(); ++k) {
        t += score(p.objective, s.model[k], s.data[k]);
    }
    return t;
}

} // namespace detail

inline std::vector<PeakDiagnostic> peak_diagnostics(const FitProblem& p, const EpidemicSeries& model)
{
    auto s = detail::scored_series(p, model);
    std::vector<PeakDiagnostic> out;
    for (std::size_t k = 0; k < s.model.size(); ++k) {
        const auto mk = stats::argmax(s.model[k]);
        const auto dk = stats::argmax(s.data[k]);
        PeakDiagnostic d{s.labels[k], static_cast<long>(mk) - static_cast<long>(dk), std::nullopt};
        if (s.data[k][dk] > 0.0) {
            d.magnitude_ratio = s.model[k][mk] / s.data[k][dk];
        }
        out.push_back(std::move(d));
    }
    return out;
}

/// Random search: each iteration draws the free parameters from its own
/// substream of rng_seed, simulates, and scores weekly incidence against the
/// data. Failed iterations are skipped and counted.
inline FitResult fit(const FitProblem& problem)
{
    problem.validate();
    const std::size_t weeks = problem.observed.length();
    const auto initial      = problem.model.initial ? *problem.model.initial : initial_from_data(problem.model, problem.observed);

    enum class Outcome { scored, rejected, failed };
    struct Slot {
        Outcome outcome = Outcome::failed;
        ParamValues params;
        double score = 0.0;
        std::string message;
    };
    std::vector<Slot> slots(problem.iterations);

    parallel_for(problem.iterations, problem.workers, [&](std::size_t k) {
        Rng rng    = substream(problem.rng_seed, k);
        Slot& slot = slots[k];
        slot.params = sample_params(problem.free_params, rng);
        try {
            auto model   = simulate_incidence(problem.model, slot.params, initial, weeks);
            slot.score   = detail::total_score(problem, model);
            slot.outcome = std::isfinite(slot.score) ? Outcome::scored : Outcome::failed;
            if (slot.outcome == Outcome::failed) {
                slot.message = "non-finite score";
            }
        }
        catch (const NumericalBlowup& e) {
            slot.outcome = Outcome::failed;
            slot.message = e.what();
        }
        catch (const DomainError& e) {
            slot.outcome = Outcome::rejected;
            slot.message = e.what();
        }
        catch (const OverflowError& e) {
            slot.outcome = Outcome::failed;
            slot.message = e.what();
        }
    });

    FitResult result;
    std::vector<Candidate> ranked;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        auto& s = slots[k];
        switch (s.outcome) {
        case Outcome::scored:
            ++result.evaluations;
            ranked.push_back({std::move(s.params), s.score, k});
            break;
        case Outcome::rejected:
            ++result.rejected;
            break;
        case Outcome::failed:
            ++result.failures;
            result.failure_log.push_back("iteration " + std::to_string(k) + ": " + s.message);
            break;
        }
    }
    if (ranked.empty()) {
        std::string msg = "all " + std::to_string(problem.iterations) + " iterations failed";
        if (!result.failure_log.empty()) {
            msg += "; first: " + result.failure_log.front();
        }
        else if (result.rejected > 0) {
            msg += "; every draw fell outside the parameter domain";
        }
        throw AllFailed(msg);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.score < b.score || (a.score == b.score && a.iteration < b.iteration);
    });
    ranked.resize(std::min(ranked.size(), std::max<std::size_t>(1, problem.top_k)));
    result.top_k          = std::move(ranked);
    result.best_params    = result.top_k.front().params;
    result.best_score     = result.top_k.front().score;
    result.best_incidence = simulate_incidence(problem.model, result.best_params, initial, weeks);
    result.diagnostics    = peak_diagnostics(problem, result.best_incidence);
    return result;
}

struct TwoStageResult {
    FitResult stage1; ///< alpha = gamma = 1 held fixed; beta, theta free
    FitResult stage2; ///< beta, theta and every stage-1 parameter fixed at the stage-1 best; alpha, gamma free
};

/// Gravity-linked fit in two stages. `problem.free_params` lists the disease
/// parameters searched in stage 1 alongside beta and theta.
inline TwoStageResult fit_two_stage_gravity(FitProblem problem, const Sampler& beta, const Sampler& theta,
                                            const Sampler& alpha, const Sampler& gamma)
{
    problem.model.coupling = CouplingKind::gravity;
    FitProblem first       = problem;
    std::erase_if(first.free_params, [](const auto& p) {
        return p.name == "alpha" || p.name == "beta" || p.name == "gamma" || p.name == "theta";
    });
    first.free_params.push_back({"alpha", Sampler::fixed(1.0)});
    first.free_params.push_back({"gamma", Sampler::fixed(1.0)});
    first.free_params.push_back({"beta", beta});
    first.free_params.push_back({"theta", theta});

    TwoStageResult out;
    out.stage1 = fit(first);

    FitProblem second = first;
    second.free_params.clear();
    for (const auto& [name, v] : out.stage1.best_params) {
        if (name != "alpha" && name != "gamma") {
            second.free_params.push_back({name, Sampler::fixed(v)});
        }
    }
    second.free_params.push_back({"alpha", alpha});
    second.free_params.push_back({"gamma", gamma});
    second.rng_seed = splitmix64(problem.rng_seed);
    out.stage2      = fit(second);
    return out;
}

/// Shortest arc of the circle [0, period) containing every value, as
/// (start, end); end < start means the arc wraps through zero.
inline std::pair<double, double> circular_range(std::span<const double> values, double period = 365.0)
{
    if (values.empty()) {
        throw StructuralError("circular range of an empty list");
    }
    std::vector<double> v(values.begin(), values.end());
    for (double& x : v) {
        x = std::fmod(x, period);
        if (x < 0.0) {
            x += period;
        }
    }
    std::sort(v.begin(), v.end());
    // The arc starts right after the widest gap between neighbours.
    std::size_t after = 0;
    double widest     = v.front() + period - v.back();
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] - v[k - 1] > widest) {
            widest = v[k] - v[k - 1];
            after  = k;
        }
    }
    return {v[after], v[(after + v.size() - 1) % v.size()]};
}

} // namespace gravepi::fit
