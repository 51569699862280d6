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
#include <span>
#include <string>
#include <vector>

#include "fann/dataset.hpp"
#include "fann/graph_index.hpp"
#include "fann/planner.hpp"

namespace fann {

struct EvalRow {
    std::string method;
    std::uint32_t l_search = 0;
    std::uint32_t k = 0;
    double recall = 0.0;
    double mean_comparisons = 0.0;
    std::uint64_t graph_routed = 0;
    std::uint64_t brute_routed = 0;
    std::uint64_t excluded_queries = 0;
    double w_m = 0.0;
    double wall_ms = 0.0;
};

// Fraction of the truth row's top-min(k, |truth|) ids present in the first k
// retrieved ids. Empty truth rows yield nullopt and are excluded from
// averages.
std::optional<double> recall_at_k(std::span<const std::uint32_t> retrieved,
                                  const std::vector<GroundTruthEntry>& truth, std::uint32_t k);

struct BenchmarkConfig {
    std::vector<std::string> methods = {"integrated", "fixed", "post"};
    std::vector<std::uint32_t> l_sweep = {10, 20, 50, 100, 200};
    std::uint32_t k = 10;
    // Fixed-penalty baseline sweep; the best recall per L is reported.
    std::vector<double> fixed_penalties = {0.1, 0.3, 1.0};
    PlannerConfig planner;
    double post_over_provision = 1.0;
    // Emits unfiltered_weighted / unfiltered_zero rows when unfiltered ground
    // truth is supplied.
    bool unfiltered_check = true;
};

struct BenchmarkInputs {
    const LabeledDataset* data = nullptr;
    const std::vector<FilteredQuery>* queries = nullptr;
    const GroundTruth* filtered_gt = nullptr;
    const GroundTruth* unfiltered_gt = nullptr;  // optional
    const GraphIndex* weighted_index = nullptr;  // built with the learned weight
    const GraphIndex* zero_index = nullptr;      // built with w_m = 0
    WeightModel learned;
};

// Runs every requested method over the eval query set for every L in the
// sweep. Rows come out in a fixed method-major, L-minor order.
std::vector<EvalRow> run_benchmark(const BenchmarkInputs& inputs, const BenchmarkConfig& config);

std::string to_csv(const std::vector<EvalRow>& rows);
void write_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows);

}  // namespace fann
