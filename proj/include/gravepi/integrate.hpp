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

#include "gravepi/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace gravepi {

enum class Provenance { data, model };

/// Time-indexed scalar series per patch: weekly counts, prevalence curves, ...
struct EpidemicSeries {
    std::vector<double> times; ///< days, or 1-based week index for weekly series
    std::vector<std::string> patch_ids;
    std::vector<std::vector<double>> values; ///< values[patch][time]
    Provenance provenance = Provenance::model;

    std::size_t patches() const noexcept { return values.size(); }
    std::size_t length() const noexcept { return times.size(); }

    /// Index of `id` in patch_ids; throws when absent.
    std::size_t index_of(const std::string& id) const
    {
        auto it = std::find(patch_ids.begin(), patch_ids.end(), id);
        if (it == patch_ids.end()) {
            throw StructuralError("unknown patch '" + id + "'");
        }
        return static_cast<std::size_t>(it - patch_ids.begin());
    }

    /// Sum over patches as a single-patch series with id `total`.
    EpidemicSeries total(std::string id = "total") const
    {
        EpidemicSeries out;
        out.times      = times;
        out.patch_ids  = {std::move(id)};
        out.provenance = provenance;
        out.values.assign(1, std::vector<double>(times.size(), 0.0));
        for (const auto& v : values) {
            for (std::size_t k = 0; k < v.size(); ++k) {
                out.values[0][k] += v[k];
            }
        }
        return out;
    }
};

/// Full compartment trajectory produced by `integrate`.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<PatchState>> states; ///< states[sample][patch]
    std::vector<std::string> patch_ids;
    std::vector<double> host_progression; ///< lambda per patch, used for incidence

    std::size_t patches() const noexcept { return host_progression.size(); }
    std::size_t length() const noexcept { return times.size(); }

    EpidemicSeries compartment(Compartment c) const
    {
        EpidemicSeries out;
        out.times      = times;
        out.patch_ids  = patch_ids;
        out.provenance = Provenance::model;
        out.values.assign(patches(), std::vector<double>(times.size()));
        for (std::size_t k = 0; k < times.size(); ++k) {
            for (std::size_t i = 0; i < patches(); ++i) {
                out.values[i][k] = states[k][i].as_array()[static_cast<std::size_t>(c)];
            }
        }
        return out;
    }
};

struct IntegrationOptions {
    double dt           = 0.1; ///< nominal step [days]; shrunk so steps tile the span exactly
    double sample_every = 1.0; ///< output stride [days], rounded to whole steps
    bool seasonal       = true;
    std::vector<std::string> patch_ids; ///< optional labels, defaults to "0", "1", ...
};

/// Magnitude below which a negative compartment counts as rounding noise:
/// 1e-12 relative to the species total, with an absolute floor of 1e-12.
inline double negative_tolerance(double total) noexcept
{
    return 1e-12 * std::max(1.0, total);
}

/// Classic fixed-step fourth-order Runge-Kutta over [t0, t1].
///
/// Throws NumericalBlowup when a value turns non-finite or a compartment falls
/// below -negative_tolerance; both report the step time. Tiny negatives are
/// clamped to zero in the sampled output.
inline Trajectory integrate(std::span<const PatchState> initial, std::span<const DiseaseParams> params,
                            const CouplingMatrix& coupling, double t0, double t1, const IntegrationOptions& opts = {})
{
    detail::check_shapes(initial.size(), params, coupling);
    if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) {
        throw DomainError("step size must be positive");
    }
    if (!(t1 > t0)) {
        throw DomainError("integration span needs t1 > t0");
    }
    if (!(opts.sample_every > 0.0)) {
        throw DomainError("sampling stride must be positive");
    }
    const std::size_t n = initial.size();
    for (std::size_t i = 0; i < n; ++i) {
        detail::check_state(initial[i], i);
    }

    const double span         = t1 - t0;
    const auto steps          = static_cast<std::size_t>(std::ceil(span / opts.dt - 1e-9));
    const double h            = span / static_cast<double>(steps);
    const std::size_t stride  = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.sample_every / h)));
    const std::size_t dim     = n * PatchState::size;

    Trajectory traj;
    traj.patch_ids = opts.patch_ids;
    if (traj.patch_ids.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            traj.patch_ids.push_back(std::to_string(i));
        }
    }
    else if (traj.patch_ids.size() != n) {
        throw StructuralError("patch id count does not match the number of patches");
    }
    for (const auto& p : params) {
        traj.host_progression.push_back(p.lambda);
    }

    std::vector<double> y(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    std::vector<double> tol(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        auto a = initial[i].as_array();
        std::copy(a.begin(), a.end(), y.begin() + static_cast<std::ptrdiff_t>(7 * i));
        tol[2 * i]     = negative_tolerance(initial[i].vectors());
        tol[2 * i + 1] = negative_tolerance(initial[i].hosts());
    }

    auto record = [&](double t) {
        std::vector<PatchState> snap;
        snap.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::array<double, 7> a;
            for (std::size_t c = 0; c < 7; ++c) {
                a[c] = std::max(0.0, y[7 * i + c]);
            }
            snap.push_back(PatchState::from_array(a));
        }
        traj.times.push_back(t);
        traj.states.push_back(std::move(snap));
    };

    auto check = [&](double t) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < 7; ++c) {
                double v = y[7 * i + c];
                if (!std::isfinite(v)) {
                    throw NumericalBlowup(t, "non-finite value in patch " + traj.patch_ids[i] + " " +
                                                 to_string(static_cast<Compartment>(c)));
                }
                if (v < -tol[2 * i + (c < 3 ? 0 : 1)]) {
                    throw NumericalBlowup(t, "negative value in patch " + traj.patch_ids[i] + " " +
                                                 to_string(static_cast<Compartment>(c)));
                }
            }
        }
    };

    detail::SystemKernel f(params, coupling, opts.seasonal);
    record(t0);
    for (std::size_t step = 0; step < steps; ++step) {
        const double t = t0 + static_cast<double>(step) * h;
        f(t, y, k1);
        for (std::size_t d = 0; d < dim; ++d) {
            tmp[d] = y[d] + 0.5 * h * k1[d];
        }
        f(t + 0.5 * h, tmp, k2);
        for (std::size_t d = 0; d < dim; ++d) {
            tmp[d] = y[d] + 0.5 * h * k2[d];
        }
        f(t + 0.5 * h, tmp, k3);
        for (std::size_t d = 0; d < dim; ++d) {
            tmp[d] = y[d] + h * k3[d];
        }
        f(t + h, tmp, k4);
        for (std::size_t d = 0; d < dim; ++d) {
            y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        const double t_next = t0 + static_cast<double>(step + 1) * h;
        check(t_next);
        if ((step + 1) % stride == 0 || step + 1 == steps) {
            record(step + 1 == steps ? t1 : t_next);
        }
    }
    return traj;
}

namespace detail {

/// Integral from times.front() to `a` of the piecewise-linear interpolant
/// through (times, f), given the cumulative trapezoid sums at the samples.
inline double cumulative_at(std::span<const double> times, std::span<const double> f, std::span<const double> cum,
                            double a)
{
    auto it = std::upper_bound(times.begin(), times.end(), a);
    if (it == times.begin()) {
        return 0.0;
    }
    auto k = static_cast<std::size_t>(it - times.begin()) - 1;
    if (k + 1 >= times.size()) {
        return cum.back();
    }
    const double w  = (a - times[k]) / (times[k + 1] - times[k]);
    const double fa = f[k] + w * (f[k + 1] - f[k]);
    return cum[k] + 0.5 * (a - times[k]) * (f[k] + fa);
}

} // namespace detail

/// New host infections per 7-day window: the trapezoid integral of lambda*E_h
/// over [t0 + 7w, t0 + 7(w+1)]. Weeks are numbered from 1 in `times`.
inline EpidemicSeries weekly_incidence(const Trajectory& traj)
{
    if (traj.length() < 2) {
        throw InsufficientData("trajectory has fewer than two samples");
    }
    const double t0    = traj.times.front();
    const double t_end = traj.times.back();
    for (std::size_t k = 1; k < traj.length(); ++k) {
        if (traj.times[k] - traj.times[k - 1] > 1.0 + 1e-9) {
            throw DomainError("weekly incidence needs samples at most one day apart");
        }
    }
    const auto weeks = static_cast<std::size_t>(std::floor((t_end - t0) / 7.0 + 1e-9));
    if (weeks == 0) {
        throw InsufficientData("trajectory is shorter than one week");
    }

    EpidemicSeries out;
    out.patch_ids  = traj.patch_ids;
    out.provenance = Provenance::model;
    for (std::size_t w = 0; w < weeks; ++w) {
        out.times.push_back(static_cast<double>(w + 1));
    }
    out.values.assign(traj.patches(), std::vector<double>(weeks));

    std::vector<double> f(traj.length()), cum(traj.length());
    for (std::size_t i = 0; i < traj.patches(); ++i) {
        for (std::size_t k = 0; k < traj.length(); ++k) {
            f[k] = traj.host_progression[i] * traj.states[k][i].e_h;
        }
        cum[0] = 0.0;
        for (std::size_t k = 1; k < traj.length(); ++k) {
            cum[k] = cum[k - 1] + 0.5 * (traj.times[k] - traj.times[k - 1]) * (f[k] + f[k - 1]);
        }
        double prev = 0.0;
        for (std::size_t w = 0; w < weeks; ++w) {
            double next        = detail::cumulative_at(traj.times, f, cum, t0 + 7.0 * static_cast<double>(w + 1));
            out.values[i][w]   = std::max(0.0, next - prev);
            prev               = next;
        }
    }
    return out;
}

} // namespace gravepi
