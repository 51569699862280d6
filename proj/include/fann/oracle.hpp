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
#include <span>
#include <vector>

#include "fann/dataset.hpp"
#include "fann/metric.hpp"

namespace fann {

// One scan hit: raw vector distance plus the query-side match score.
struct OracleNeighbor {
    std::uint32_t id = 0;
    double raw_distance = 0.0;
    double match = 1.0;
};

// The k points nearest to q by raw distance, ascending, ties by ascending id.
// When required_labels is nonempty each neighbor also carries its query match
// score (needed by the weight learner); otherwise match is 1.
std::vector<OracleNeighbor> exact_unfiltered_topk(const LabeledDataset& data,
                                                  std::span<const float> query,
                                                  const LabelSet& required_labels,
                                                  std::size_t k);

// Among points satisfying required_labels, the min(k, |satisfying|) nearest by
// raw distance. required_labels must be nonempty.
std::vector<OracleNeighbor> exact_filtered_topk(const LabeledDataset& data,
                                                std::span<const float> query,
                                                const LabelSet& required_labels,
                                                std::size_t k);

// Top-k over the full dataset by weighted distance D(q, v).
std::vector<OracleNeighbor> exact_weighted_topk(const LabeledDataset& data,
                                                std::span<const float> query,
                                                const LabelSet& required_labels,
                                                const WeightModel& model, std::size_t k);

// Full-scan ground truth for a query set in the requested mode.
GroundTruth build_ground_truth(const LabeledDataset& data,
                               const std::vector<FilteredQuery>& queries, std::uint32_t k,
                               GroundTruthMode mode);

}  // namespace fann
