// Copyright 2026-present the fann project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fann/error.hpp"

namespace fann {

// Sorted, duplicate-free list of label ids.
using LabelSet = std::vector<std::uint32_t>;

enum class MetricKind : std::uint8_t { euclidean = 0, cosine = 1 };

inline const char* metric_name(MetricKind kind) {
    return kind == MetricKind::euclidean ? "euclidean" : "cosine";
}

inline MetricKind metric_from_name(const std::string& name) {
    if (name == "euclidean") return MetricKind::euclidean;
    if (name == "cosine") return MetricKind::cosine;
    throw ValidationError("unknown metric '" + name + "' (expected euclidean or cosine)");
}

// The penalty weight combining vector distance with label mismatch, together
// with the training hyperparameters that produced it.
struct WeightModel {
    enum class Provenance : std::uint8_t { learned = 0, fixed = 1, zero = 2 };

    double w_m = 0.0;
    double alpha_slack = 0.0;
    double epsilon = 0.0;
    Provenance provenance = Provenance::zero;

    static WeightModel zero() { return WeightModel{}; }

    static WeightModel fixed(double w) {
        if (w < 0.0) throw ValidationError("penalty weight must be non-negative");
        return WeightModel{w, 0.0, 0.0, Provenance::fixed};
    }

    static WeightModel learned(double w, double alpha, double epsilon) {
        if (w < 0.0) throw ValidationError("penalty weight must be non-negative");
        if (epsilon <= 0.0) throw ValidationError("learned model requires epsilon > 0");
        return WeightModel{w, alpha, epsilon, Provenance::learned};
    }
};

// Counts raw vector-distance evaluations within a single search.
struct ComparisonCounter {
    std::uint64_t count = 0;
    void add() { ++count; }
    void reset() { count = 0; }
};

inline void normalize_label_set(LabelSet& labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

inline std::size_t intersection_size(const LabelSet& a, const LabelSet& b) {
    std::size_t n = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

inline bool is_subset(const LabelSet& needle, const LabelSet& haystack) {
    return intersection_size(needle, haystack) == needle.size();
}

// Raw vector distance. Euclidean is the L2 norm of the difference; cosine is
// 1 - cos(a, b) clamped to [0, 2]. Accumulation in double.
inline double vector_distance(std::span<const float> a, std::span<const float> b, MetricKind kind) {
    if (a.size() != b.size())
        throw ValidationError("vector_distance: dimension mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    if (kind == MetricKind::euclidean) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            sum += diff * diff;
        }
        return std::sqrt(sum);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine distance undefined for zero-norm vector");
    const double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(d, 0.0, 2.0);
}

// Query-side match score: fraction of required labels carried by the
// candidate. Equals 1 exactly when the filter is satisfied.
inline double query_match_score(const LabelSet& required, const LabelSet& candidate) {
    if (required.empty()) throw ValidationError("query_match_score: empty required label set");
    return static_cast<double>(intersection_size(required, candidate)) /
           static_cast<double>(required.size());
}

// Data-pair match score (asymmetric Jaccard, normalized by the first set).
// An unlabeled first argument matches everything: unlabeled points incur no
// build-time penalty.
inline double label_match_score(const LabelSet& first, const LabelSet& second) {
    if (first.empty()) return 1.0;
    return static_cast<double>(intersection_size(first, second)) /
           static_cast<double>(first.size());
}

// Combine an already-computed raw distance with the mismatch penalty. The
// counter tracks raw-distance evaluations, one per call; the additive
// combination itself is not counted.
inline double weighted_distance(double raw, double match, const WeightModel& model,
                                ComparisonCounter& counter) {
    counter.add();
    return raw + model.w_m * (1.0 - match);
}

}  // namespace fann
