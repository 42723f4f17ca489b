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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gravepi {

/// Square matrix of inter-patch visit weights P_ij, stored row-major.
/// Row i holds the weights a resident of patch i assigns to every patch j.
class CouplingMatrix {
public:
    CouplingMatrix() = default;

    /// Builds from row-major entries; validates shape and sign.
    CouplingMatrix(std::size_t n, std::vector<double> entries)
        : n_(n)
        , entries_(std::move(entries))
    {
        if (n_ == 0) {
            throw StructuralError("coupling matrix needs at least one patch");
        }
        if (entries_.size() != n_ * n_) {
            throw StructuralError("coupling matrix of size " + std::to_string(n_) + " needs " +
                                  std::to_string(n_ * n_) + " entries, got " + std::to_string(entries_.size()));
        }
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                double w = entries_[i * n_ + j];
                if (!std::isfinite(w) || w < 0.0) {
                    throw DomainError("coupling entry (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") must be finite and nonnegative");
                }
                if (i == j && w <= 0.0) {
                    throw DomainError("coupling diagonal entry " + std::to_string(i) + " must be positive");
                }
            }
        }
    }

    static CouplingMatrix identity(std::size_t n)
    {
        std::vector<double> e(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            e[i * n + i] = 1.0;
        }
        return CouplingMatrix(n, std::move(e));
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {entries_.data() + i * n_, n_}; }
    std::span<const double> entries() const noexcept { return entries_; }

    /// Largest off-diagonal entry (0 for a single patch).
    double max_off_diagonal() const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (i != j && entries_[i * n_ + j] > m) {
                    m = entries_[i * n_ + j];
                }
            }
        }
        return m;
    }

    double mean_off_diagonal() const
    {
        if (n_ < 2) {
            return 0.0;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (i != j) {
                    s += entries_[i * n_ + j];
                }
            }
        }
        return s / static_cast<double>(n_ * (n_ - 1));
    }

    bool operator==(const CouplingMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> entries_;
};

} // namespace gravepi
