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

#include "gravepi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace gravepi::stats {

inline double mean(std::span<const double> x)
{
    if (x.empty()) {
        throw StructuralError("mean of an empty sample");
    }
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population standard deviation.
inline double stddev(std::span<const double> x)
{
    const double m = mean(x);
    double s       = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return std::sqrt(s / static_cast<double>(x.size()));
}

/// Pearson correlation; empty when either sample has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw StructuralError("correlation needs samples of equal length");
    }
    if (x.size() < 2) {
        throw InsufficientData("correlation needs at least two points");
    }
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx, dy = y[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        return std::nullopt;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Ranks starting at 1, ties given their average rank.
inline std::vector<double> ranks(std::span<const double> x)
{
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t end = k;
        while (end + 1 < order.size() && x[order[end + 1]] == x[order[k]]) {
            ++end;
        }
        const double avg = 0.5 * static_cast<double>(k + end) + 1.0;
        for (std::size_t m = k; m <= end; ++m) {
            r[order[m]] = avg;
        }
        k = end + 1;
    }
    return r;
}

inline std::optional<double> spearman(std::span<const double> x, std::span<const double> y)
{
    auto rx = ranks(x);
    auto ry = ranks(y);
    return pearson(rx, ry);
}

/// Index of the first maximum.
inline std::size_t argmax(std::span<const double> x)
{
    if (x.empty()) {
        throw StructuralError("argmax of an empty sample");
    }
    return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

} // namespace gravepi::stats
