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
#include <vector>

#include "fann/dataset.hpp"
#include "fann/graph_index.hpp"

namespace fann {

struct PlannerConfig {
    std::uint64_t selectivity_threshold = 100000;
    double sample_fraction = 1.0;  // (0, 1]
    std::uint64_t seed = 0;
};

// Label-wise posting lists over a deterministic point sample, plus the scale
// factor that blows sampled intersection counts back up to dataset scale.
struct SelectivityIndex {
    std::vector<std::vector<std::uint32_t>> postings;  // indexed by label id
    std::uint32_t sample_size = 0;
    double scale = 1.0;  // N / sample_size

    static SelectivityIndex build(const LabeledDataset& data, double sample_fraction,
                                  std::uint64_t seed);
};

// Intersects the sampled posting lists for all query labels and scales the
// count up, rounding half up. Labels absent from the dataset estimate to 0.
std::uint64_t estimate_selectivity(const SelectivityIndex& index, const LabelSet& required);

enum class Route : std::uint8_t { brute = 0, graph = 1 };

struct PlanResult {
    std::vector<std::uint32_t> ids;
    std::vector<double> distances;  // weighted (graph route) or raw (brute route)
    Route route = Route::graph;
    std::uint64_t comparisons = 0;
};

// Routing context: a sampled index for estimation and full posting lists for
// the brute-force path.
class Planner {
public:
    static Planner build(const LabeledDataset& data, const PlannerConfig& config);

    const PlannerConfig& config() const { return config_; }
    const SelectivityIndex& sampled() const { return sampled_; }

    // Exact satisfying subset via full posting-list intersection, ascending.
    std::vector<std::uint32_t> satisfying_subset(const LabelSet& required) const;

private:
    PlannerConfig config_;
    SelectivityIndex sampled_;
    SelectivityIndex full_;  // sample_fraction 1.0
};

// Routes one query: below the threshold the exact satisfying subset is
// scanned brute-force; otherwise the graph is searched with the weighted
// distance. Unfiltered queries always take the graph route.
PlanResult plan_and_search(const GraphIndex& index, const LabeledDataset& data,
                           const Planner& planner, const FilteredQuery& query,
                           const SearchParams& search_params);

}  // namespace fann
