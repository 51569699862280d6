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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fann/dataset.hpp"
#include "fann/metric.hpp"

namespace fann {

// One ranking constraint: the positive satisfies the filter but sits farther
// from the query than the negative.
struct PreferenceTriplet {
    std::uint32_t query_id = 0;
    double d_pos = 0.0;
    double m_pos = 1.0;  // always exactly 1 by construction
    double d_neg = 0.0;
    double m_neg = 0.0;  // strictly below 1 by construction
};

struct LearnerConfig {
    double epsilon = 0.01;
    std::vector<double> alpha_grid = {0.1, 1.0, 10.0, 100.0, 1000.0};
    std::uint32_t learner_gt_k = 100;
    std::size_t max_triplets = 1'000'000;
    std::uint64_t subsample_seed = 0;
    // Every validation_stride-th query's triplets are held out for the alpha
    // grid search.
    std::uint32_t validation_stride = 5;
};

struct ObjectiveStats {
    double objective = 0.0;
    double mean_slack = 0.0;
    double violation_rate = 0.0;
};

struct AlphaResult {
    double alpha = 0.0;
    double w_m = 0.0;
    double objective = 0.0;
    double mean_slack = 0.0;
    double violation_rate = 0.0;             // on the training triplets
    double validation_violation_rate = 0.0;  // on the held-out triplets
};

struct LearnerReport {
    WeightModel model;
    std::size_t triplet_count = 0;
    double objective = 0.0;
    double mean_slack = 0.0;
    double violation_rate = 0.0;
    std::vector<AlphaResult> per_alpha;
    MetricKind metric = MetricKind::euclidean;
    std::uint32_t learner_gt_k = 0;
    std::vector<std::string> warnings;

    std::string to_json() const;
    static LearnerReport from_json_text(const std::string& text);
    static LearnerReport from_json_file(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

// Builds the triplet set from training queries. Each query contributes one
// triplet per (positive, closer negative) pair inside its unfiltered top-k
// list; the list is recomputed unless `precomputed` supplies it. Subsampling
// to max_triplets is a deterministic stride.
std::vector<PreferenceTriplet> extract_triplets(const LabeledDataset& data,
                                                const std::vector<FilteredQuery>& train_queries,
                                                const LearnerConfig& config,
                                                const GroundTruth* precomputed = nullptr);

// Objective w + alpha * mean(slack) with slack per triplet
// max(0, d_pos + epsilon - d_neg - w * (1 - m_neg)).
ObjectiveStats objective_at(double w, const std::vector<PreferenceTriplet>& triplets, double alpha,
                            double epsilon);

// Exact minimizer of objective_at over w >= 0. The objective is convex
// piecewise-linear in w, so the optimum sits at 0 or at one of the per-triplet
// breakpoints (d_pos + epsilon - d_neg) / (1 - m_neg); ties resolve to the
// smallest w.
double solve_w(const std::vector<PreferenceTriplet>& triplets, double alpha, double epsilon);

// Solves for each alpha in the grid and selects the one whose w minimizes the
// held-out violation rate; ties break toward smaller w_m.
LearnerReport grid_search_alpha(const std::vector<PreferenceTriplet>& triplets,
                                const LearnerConfig& config,
                                const std::vector<PreferenceTriplet>& validation);

// Full pipeline: triplets (with query-level holdout) -> grid search -> report.
LearnerReport learn_weights(const LabeledDataset& data,
                            const std::vector<FilteredQuery>& train_queries,
                            const LearnerConfig& config, const GroundTruth* precomputed = nullptr);

}  // namespace fann
