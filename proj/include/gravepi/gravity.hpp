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
#include "gravepi/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace gravepi {

/// Exponents and scale of the gravity interaction
/// P_ij = theta * n_i^alpha * n_j^beta / d_ij^gamma.
struct GravityParams {
    double alpha = 1.0; ///< source population exponent
    double beta  = 1.0; ///< destination population exponent
    double gamma = 2.0; ///< distance decay exponent
    double theta = 1.0; ///< scale

    void validate() const
    {
        if (!std::isfinite(alpha) || !std::isfinite(beta)) {
            throw DomainError("gravity exponents must be finite");
        }
        if (!(theta >= 0.0) || !std::isfinite(theta)) {
            throw DomainError("gravity scale theta must be finite and >= 0");
        }
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
            throw DomainError("gravity distance exponent gamma must be finite and >= 0");
        }
    }
};

enum class DistanceMode { euclidean, haversine };

inline constexpr double earth_radius_km = 6371.0;

/// Euclidean distance in grid units, or great-circle kilometres when the
/// coordinates are (x = longitude, y = latitude) in degrees.
inline double distance(const PatchGeometry& a, const PatchGeometry& b, DistanceMode mode)
{
    if (mode == DistanceMode::euclidean) {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return std::sqrt(dx * dx + dy * dy);
    }
    for (const auto* g : {&a, &b}) {
        if (!(g->y >= -90.0 && g->y <= 90.0) || !(g->x >= -180.0 && g->x <= 180.0)) {
            throw DomainError("patch '" + g->patch_id + "' has out-of-range latitude/longitude");
        }
    }
    constexpr double rad = std::numbers::pi / 180.0;
    const double lat1 = a.y * rad, lat2 = b.y * rad;
    const double dlat = (b.y - a.y) * rad;
    const double dlon = (b.x - a.x) * rad;
    const double s1   = std::sin(0.5 * dlat);
    const double s2   = std::sin(0.5 * dlon);
    const double h    = std::min(1.0, s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2);
    return 2.0 * earth_radius_km * std::asin(std::sqrt(h));
}

struct GravityOptions {
    DistanceMode distance_mode = DistanceMode::euclidean;
    double diagonal            = 1.0;
    double distance_unit       = 1.0;   ///< distances enter the kernel as d / distance_unit
    bool normalize_rows        = false; ///< divide each row by its sum (diagonal included)
};

/// Gravity-model coupling. Off-diagonal weights are built in log space as
/// theta * exp(alpha ln n_i + beta ln n_j - gamma ln d_ij).
inline CouplingMatrix gravity_matrix(std::span<const PatchGeometry> geoms, const GravityParams& params,
                                     const GravityOptions& opts = {})
{
    params.validate();
    const std::size_t n = geoms.size();
    if (n == 0) {
        throw StructuralError("gravity matrix needs at least one patch");
    }
    for (const auto& g : geoms) {
        g.validate();
    }
    if (!(opts.distance_unit > 0.0)) {
        throw DomainError("distance unit must be positive");
    }
    std::vector<double> e(n * n, 0.0);
    std::vector<double> log_pop(n);
    for (std::size_t i = 0; i < n; ++i) {
        log_pop[i] = std::log(geoms[i].population);
    }
    for (std::size_t i = 0; i < n; ++i) {
        e[i * n + i] = opts.diagonal;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(geoms[i], geoms[j], opts.distance_mode);
            if (!(d > 0.0)) {
                throw DegenerateDistance("patches '" + geoms[i].patch_id + "' and '" + geoms[j].patch_id +
                                         "' share a location");
            }
            const double log_d = std::log(d / opts.distance_unit);
            for (auto [r, c] : {std::pair{i, j}, std::pair{j, i}}) {
                const double w = params.theta * std::exp(params.alpha * log_pop[r] + params.beta * log_pop[c] -
                                                         params.gamma * log_d);
                if (!std::isfinite(w)) {
                    throw OverflowError(r, c,
                                        "gravity weight overflows for pair ('" + geoms[r].patch_id + "', '" +
                                            geoms[c].patch_id + "')");
                }
                e[r * n + c] = w;
            }
        }
    }
    if (opts.normalize_rows) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += e[i * n + j];
            }
            for (std::size_t j = 0; j < n; ++j) {
                e[i * n + j] /= s;
            }
        }
    }
    return CouplingMatrix(n, std::move(e));
}

/// Every off-diagonal entry equals `weight`.
inline CouplingMatrix uniform_matrix(std::size_t n, double weight, double diagonal = 1.0)
{
    if (n == 0) {
        throw StructuralError("uniform matrix needs at least one patch");
    }
    if (!(weight >= 0.0)) {
        throw DomainError("uniform weight must be >= 0");
    }
    std::vector<double> e(n * n, weight);
    for (std::size_t i = 0; i < n; ++i) {
        e[i * n + i] = diagonal;
    }
    return CouplingMatrix(n, std::move(e));
}

/// Multiplies every off-diagonal entry by `factor`, then caps entries at `ceiling`.
inline CouplingMatrix scale_off_diagonal(const CouplingMatrix& m, double factor, double ceiling = 1.0)
{
    const std::size_t n = m.size();
    std::vector<double> e(m.entries().begin(), m.entries().end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                e[i * n + j] = std::min(ceiling, e[i * n + j] * factor);
            }
        }
    }
    return CouplingMatrix(n, std::move(e));
}

struct DistanceWeight {
    std::string patch_id;
    double distance;
    double weight;
};

/// Weights P(focal, j) for every j != focal, sorted by distance from the focal patch.
inline std::vector<DistanceWeight> weight_vs_distance(const CouplingMatrix& m, std::span<const PatchGeometry> geoms,
                                                      const std::string& focal,
                                                      DistanceMode mode = DistanceMode::euclidean)
{
    if (m.size() != geoms.size()) {
        throw StructuralError("matrix and geometry sizes differ");
    }
    auto it = std::find_if(geoms.begin(), geoms.end(), [&](const auto& g) { return g.patch_id == focal; });
    if (it == geoms.end()) {
        throw StructuralError("unknown focal patch '" + focal + "'");
    }
    const auto f = static_cast<std::size_t>(it - geoms.begin());
    std::vector<DistanceWeight> out;
    for (std::size_t j = 0; j < geoms.size(); ++j) {
        if (j != f) {
            out.push_back({geoms[j].patch_id, distance(geoms[f], geoms[j], mode), m(f, j)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.distance < b.distance; });
    return out;
}

} // namespace gravepi
