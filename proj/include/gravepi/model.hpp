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

#include "gravepi/coupling.hpp"
#include "gravepi/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace gravepi {

/// Compartment values of one patch at one time. Vectors follow S -> E -> I,
/// hosts follow S -> E -> I -> R.
struct PatchState {
    double s_v = 0.0;
    double e_v = 0.0;
    double i_v = 0.0;
    double s_h = 0.0;
    double e_h = 0.0;
    double i_h = 0.0;
    double r_h = 0.0;

    static constexpr std::size_t size = 7;

    double vectors() const noexcept { return s_v + e_v + i_v; }
    double hosts() const noexcept { return s_h + e_h + i_h + r_h; }

    std::array<double, size> as_array() const noexcept { return {s_v, e_v, i_v, s_h, e_h, i_h, r_h}; }
    static PatchState from_array(std::span<const double, size> a) noexcept
    {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }

    bool operator==(const PatchState&) const = default;
};

enum class Compartment { s_v, e_v, i_v, s_h, e_h, i_h, r_h };

inline std::string to_string(Compartment c)
{
    static constexpr std::array<const char*, 7> names = {"S_v", "E_v", "I_v", "S_h", "E_h", "I_h", "R_h"};
    return names[static_cast<std::size_t>(c)];
}

/// beta_v(t) = beta0 + eps * sin(2*pi*(t + phi)/365), phi a day offset.
class SeasonalBeta {
public:
    SeasonalBeta() = default;

    SeasonalBeta(double beta0, double eps = 0.0, double phi = 0.0)
        : beta0_(beta0)
        , eps_(eps)
        , phi_(wrap_day(phi))
    {
        if (!(beta0 >= 0.0) || !(eps >= 0.0) || !std::isfinite(beta0) || !std::isfinite(eps)) {
            throw DomainError("seasonal transmission needs finite beta0 >= 0 and eps >= 0");
        }
        if (beta0 - eps < 0.0) {
            throw DomainError("seasonal transmission would go negative: beta0 - eps < 0");
        }
        if (!std::isfinite(phi)) {
            throw DomainError("seasonal phase must be finite");
        }
    }

    static SeasonalBeta constant(double beta) { return SeasonalBeta(beta, 0.0, 0.0); }

    double beta0() const noexcept { return beta0_; }
    double eps() const noexcept { return eps_; }
    double phi() const noexcept { return phi_; }

    double at(double t) const noexcept
    {
        return beta0_ + eps_ * std::sin(2.0 * std::numbers::pi * (t + phi_) / 365.0);
    }

    static double wrap_day(double day) noexcept
    {
        double w = std::fmod(day, 365.0);
        return w < 0.0 ? w + 365.0 : w;
    }

    bool operator==(const SeasonalBeta&) const = default;

private:
    double beta0_ = 0.0;
    double eps_   = 0.0;
    double phi_   = 0.0;
};

/// Epidemiological rates of one patch, all per day. Defaults are the
/// standard dengue values; the host demographic rate assumes a 70-year lifespan.
struct DiseaseParams {
    SeasonalBeta beta_v = SeasonalBeta::constant(0.3); ///< host -> vector transmission
    double beta_h       = 0.3;                         ///< vector -> host transmission
    double lambda       = 1.0 / 5.5;                   ///< host E -> I
    double delta        = 1.0 / 4.0;                   ///< host recovery
    double kappa        = 1.0 / 5.5;                   ///< vector E -> I
    double mu_v         = 1.0 / 10.5;                  ///< vector birth = death
    double mu_h         = 1.0 / (70.0 * 365.0);        ///< host birth = death
    double vector_ratio = 3.0;                         ///< N_v / N_h

    void validate() const
    {
        for (double r : {beta_h, lambda, delta, kappa, mu_v, mu_h}) {
            if (!(r >= 0.0) || !std::isfinite(r)) {
                throw DomainError("disease rates must be finite and nonnegative");
            }
        }
        if (!(vector_ratio > 0.0) || !std::isfinite(vector_ratio)) {
            throw DomainError("vector ratio must be positive");
        }
    }

    /// Transmission rate used by the model variant.
    double vector_transmission(double t, bool seasonal) const noexcept
    {
        return seasonal ? beta_v.at(t) : beta_v.beta0();
    }
};

/// Location and size of one patch.
struct PatchGeometry {
    std::string patch_id;
    double population = 0.0; ///< host head-count
    double x          = 0.0; ///< abscissa, or longitude in degrees
    double y          = 0.0; ///< ordinate, or latitude in degrees

    void validate() const
    {
        if (!(population > 0.0) || !std::isfinite(population)) {
            throw DomainError("patch '" + patch_id + "' needs a positive population");
        }
    }
};

/// Initial state with `infected` hosts in I_h, everyone else susceptible and
/// a fully susceptible vector population of vector_ratio * population.
inline PatchState seeded_state(double population, double vector_ratio, double infected)
{
    if (!(population > 0.0) || infected < 0.0 || infected > population) {
        throw DomainError("seeded state needs population > 0 and 0 <= infected <= population");
    }
    PatchState s;
    s.s_h = population - infected;
    s.i_h = infected;
    s.s_v = vector_ratio * population;
    return s;
}

namespace detail {

/// Right-hand side over flat arrays laid out patch-major, 7 values per patch.
/// No validation: callers check shapes once.
class SystemKernel {
public:
    SystemKernel(std::span<const DiseaseParams> params, const CouplingMatrix& coupling, bool seasonal)
        : params_(params)
        , coupling_(coupling)
        , seasonal_(seasonal)
        , prevalence_(params.size())
    {
    }

    std::size_t patches() const noexcept { return params_.size(); }

    void operator()(double t, std::span<const double> y, std::span<double> dy)
    {
        const std::size_t n = params_.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double* s = y.data() + 7 * j;
            prevalence_[j]  = s[5] / (s[3] + s[4] + s[5] + s[6]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const DiseaseParams& p = params_[i];
            const double* s        = y.data() + 7 * i;
            double* d              = dy.data() + 7 * i;
            const double s_v = s[0], e_v = s[1], i_v = s[2];
            const double s_h = s[3], e_h = s[4], i_h = s[5], r_h = s[6];
            const double n_v = s_v + e_v + i_v;
            const double n_h = s_h + e_h + i_h + r_h;

            auto row     = coupling_.row(i);
            double force = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                force += row[j] * prevalence_[j];
            }
            const double vector_infection = p.vector_transmission(t, seasonal_) * force * s_v;
            const double host_infection    = p.beta_h * row[i] * (i_v / n_v) * s_h;

            d[0] = p.mu_v * n_v - vector_infection - p.mu_v * s_v;
            d[1] = vector_infection - p.mu_v * e_v - p.kappa * e_v;
            d[2] = p.kappa * e_v - p.mu_v * i_v;
            d[3] = p.mu_h * n_h - host_infection - p.mu_h * s_h;
            d[4] = host_infection - p.lambda * e_h - p.mu_h * e_h;
            d[5] = p.lambda * e_h - p.delta * i_h - p.mu_h * i_h;
            d[6] = p.delta * i_h - p.mu_h * r_h;
        }
    }

private:
    std::span<const DiseaseParams> params_;
    const CouplingMatrix& coupling_;
    bool seasonal_;
    std::vector<double> prevalence_;
};

inline void check_shapes(std::size_t states, std::span<const DiseaseParams> params, const CouplingMatrix& coupling)
{
    if (states == 0) {
        throw StructuralError("at least one patch is required");
    }
    if (params.size() != states || coupling.size() != states) {
        throw StructuralError("patch count mismatch: " + std::to_string(states) + " states, " +
                              std::to_string(params.size()) + " parameter sets, " +
                              std::to_string(coupling.size()) + "x" + std::to_string(coupling.size()) +
                              " coupling");
    }
    for (const auto& p : params) {
        p.validate();
    }
}

inline void check_state(const PatchState& s, std::size_t patch)
{
    for (double v : s.as_array()) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DomainError("patch " + std::to_string(patch) + " has a negative or non-finite compartment");
        }
    }
    if (!(s.hosts() > 0.0) || !(s.vectors() > 0.0)) {
        throw DomainError("patch " + std::to_string(patch) + " needs positive host and vector totals");
    }
}

} // namespace detail

/// Time derivative of every patch's compartments.
///
/// Vectors in patch i are infected by hosts of every patch j weighted by row i
/// of the coupling matrix; hosts in patch i are infected only by local vectors,
/// scaled by the diagonal weight P_ii. With `seasonal` false the vector
/// transmission is the constant beta0.
inline std::vector<PatchState> rhs(double t, std::span<const PatchState> states, std::span<const DiseaseParams> params,
                                   const CouplingMatrix& coupling, bool seasonal)
{
    detail::check_shapes(states.size(), params, coupling);
    if (!(t >= 0.0)) {
        throw DomainError("time must be nonnegative");
    }
    std::vector<double> y;
    y.reserve(states.size() * PatchState::size);
    for (std::size_t i = 0; i < states.size(); ++i) {
        detail::check_state(states[i], i);
        auto a = states[i].as_array();
        y.insert(y.end(), a.begin(), a.end());
    }
    std::vector<double> dy(y.size());
    detail::SystemKernel kernel(params, coupling, seasonal);
    kernel(t, y, dy);

    std::vector<PatchState> out;
    out.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        out.push_back(PatchState::from_array(std::span<const double, 7>(dy.data() + 7 * i, 7)));
    }
    return out;
}

} // namespace gravepi
