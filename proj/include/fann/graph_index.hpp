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
#include <map>
#include <span>
#include <vector>

#include "fann/dataset.hpp"
#include "fann/fingerprint.hpp"
#include "fann/metric.hpp"

namespace fann {

struct BuildParams {
    std::uint32_t max_degree = 32;        // R
    std::uint32_t build_list_size = 64;   // L during construction
    float alpha_prune = 1.2f;
    WeightModel model;
    std::uint64_t seed = 0;
    std::uint32_t medoid_exact_cap = 10000;
};

struct SearchParams {
    enum class EntryMode : std::uint8_t { medoid_only = 0, label_starts = 1 };

    std::uint32_t list_size = 100;  // L_search
    std::uint32_t k = 10;
    WeightModel model;
    EntryMode entry_mode = EntryMode::label_starts;
};

// Which side of the asymmetric match score a traversal uses: query-side
// during search (denominator |S_q|), data-pair-side during construction
// (denominator |S_first|, unlabeled-first convention 1).
enum class MatchSide : std::uint8_t { query = 0, data = 1 };

struct SearchResult {
    std::vector<std::uint32_t> ids;      // best k by weighted distance, ascending
    std::vector<double> distances;       // weighted distances for ids
    std::vector<std::uint32_t> visited;  // expanded nodes in expansion order
    std::uint64_t comparisons = 0;       // raw vector-distance evaluations
};

struct BuildStats {
    std::uint64_t distance_comparisons = 0;
    std::uint32_t patched_points = 0;   // edges added by the connectivity patch
    std::uint32_t patch_rounds = 0;
    std::uint32_t unreachable_after_patch = 0;
};

// The point minimizing summed raw distance to all points (exact up to
// exact_cap points, then over a deterministic stride sample); ties resolve to
// the smallest id.
std::uint32_t compute_medoid(const LabeledDataset& data, std::uint32_t exact_cap = 10000);

// Per label f: the f-labeled point nearest to the centroid of all f-labeled
// points, ties to the smallest id. Covers exactly the labels present.
std::map<std::uint32_t, std::uint32_t> compute_start_nodes(const LabeledDataset& data);

// Best-first beam search over an adjacency list under the weighted distance.
// Keeps the list_size best candidates, expands the best unexpanded one, and
// stops when the whole pool has been expanded. k = 0 returns only the visited
// set (construction mode).
SearchResult weighted_greedy_search(const std::vector<std::vector<std::uint32_t>>& adjacency,
                                    const LabeledDataset& data, std::span<const float> target,
                                    const LabelSet& target_labels,
                                    const std::vector<std::uint32_t>& entries, std::size_t k,
                                    std::size_t list_size, const WeightModel& model,
                                    MatchSide side);

// DiskANN-style robust prune under the weighted distance: greedily keep the
// closest candidate and drop every remaining one it dominates within
// alpha_prune. Returns at most max_degree ids, sorted ascending.
std::vector<std::uint32_t> robust_prune(std::uint32_t point, const std::vector<std::uint32_t>& candidates,
                                        float alpha_prune, std::uint32_t max_degree,
                                        const LabeledDataset& data, const WeightModel& model);

class GraphIndex {
public:
    static GraphIndex build(const LabeledDataset& data, const BuildParams& params);

    SearchResult search(const LabeledDataset& data, std::span<const float> target,
                        const LabelSet& target_labels, const SearchParams& params) const;

    void save(const std::filesystem::path& path) const;
    static GraphIndex load(const std::filesystem::path& path, const LabeledDataset& data);

    const std::vector<std::vector<std::uint32_t>>& adjacency() const { return adjacency_; }
    std::uint32_t medoid() const { return medoid_; }
    const std::map<std::uint32_t, std::uint32_t>& start_nodes() const { return start_nodes_; }
    const BuildParams& params() const { return params_; }
    const BuildStats& stats() const { return stats_; }
    const Fingerprint& fingerprint() const { return fingerprint_; }

    std::vector<std::uint32_t> entry_points(const LabelSet& target_labels,
                                            SearchParams::EntryMode mode) const;

private:
    void patch_connectivity(const LabeledDataset& data);

    std::vector<std::vector<std::uint32_t>> adjacency_;
    std::uint32_t medoid_ = 0;
    std::map<std::uint32_t, std::uint32_t> start_nodes_;
    BuildParams params_;
    BuildStats stats_;
    Fingerprint fingerprint_{};
    MetricKind metric_ = MetricKind::euclidean;
};

}  // namespace fann
