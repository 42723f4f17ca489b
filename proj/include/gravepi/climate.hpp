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

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace gravepi::climate {

/// Daily minimum temperatures [F] for one patch. `days` counts from 1 January
/// of the first year, so day-of-year phase is preserved across years.
struct TemperatureSeries {
    std::string label;
    std::vector<double> days;
    std::vector<double> tmin;

    void validate() const
    {
        if (days.size() != tmin.size()) {
            throw StructuralError("temperature series '" + label + "' has mismatched columns");
        }
        for (std::size_t k = 0; k < days.size(); ++k) {
            if (!std::isfinite(tmin[k]) || !std::isfinite(days[k])) {
                throw ValidationError("temperature series '" + label + "' has a non-finite value");
            }
            if (k > 0 && !(days[k] > days[k - 1])) {
                throw ValidationError("temperature series '" + label + "' days must be strictly increasing");
            }
        }
    }
};

/// Fit of T(t) = T0 + eps * sin(2 pi t / 365).
struct SinusoidFit {
    std::string label;
    double t0               = 0.0;
    double sine_coefficient = 0.0; ///< signed regression coefficient
    double eps              = 0.0; ///< |sine_coefficient|
    std::optional<double> pct_variation; ///< 100 eps / T0, empty when T0 <= 0
    double residual_sse = 0.0;
    std::size_t samples = 0;
    std::vector<std::string> warnings;

    double at(double t) const { return t0 + sine_coefficient * std::sin(2.0 * std::numbers::pi * t / 365.0); }
};

inline double pct_variation(double t0, double eps)
{
    if (!(t0 > 0.0)) {
        throw DomainError("percent variation needs a positive mean level");
    }
    return 100.0 * std::abs(eps) / t0;
}

inline double pct_variation(const SinusoidFit& fit)
{
    return pct_variation(fit.t0, fit.eps);
}

inline constexpr double min_samples_per_year = 200.0;

/// Linear least squares on the basis {1, sin(2 pi t / 365)}.
inline SinusoidFit fit_sinusoid(const TemperatureSeries& series)
{
    series.validate();
    const std::size_t n = series.days.size();
    if (n < 3) {
        throw InsufficientData("sinusoid fit needs at least 3 samples");
    }
    const double span = series.days.back() - series.days.front();
    if (span < 365.0 / 2.0) {
        throw InsufficientData("sinusoid fit needs samples spanning at least half a year");
    }

    std::vector<double> s(n);
    double s_mean = 0.0, y_mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = std::sin(2.0 * std::numbers::pi * series.days[k] / 365.0);
        s_mean += s[k];
        y_mean += series.tmin[k];
    }
    s_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (s[k] - s_mean) * (s[k] - s_mean);
        sxy += (s[k] - s_mean) * (series.tmin[k] - y_mean);
    }
    if (sxx <= 1e-12 * static_cast<double>(n)) {
        throw IllConditioned("sampled days make the sine basis collinear with the constant");
    }

    SinusoidFit fit;
    fit.label            = series.label;
    fit.samples          = n;
    fit.sine_coefficient = sxy / sxx;
    fit.t0               = y_mean - fit.sine_coefficient * s_mean;
    fit.eps              = std::abs(fit.sine_coefficient);
    if (fit.t0 > 0.0) {
        fit.pct_variation = pct_variation(fit.t0, fit.eps);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double r = series.tmin[k] - (fit.t0 + fit.sine_coefficient * s[k]);
        fit.residual_sse += r * r;
    }
    const double per_year = static_cast<double>(n) / std::max(1.0, (span + 1.0) / 365.0);
    if (per_year < min_samples_per_year) {
        fit.warnings.push_back("low coverage: " + std::to_string(static_cast<int>(per_year)) +
                               " samples per year in '" + series.label + "'");
    }
    return fit;
}

} // namespace gravepi::climate
