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

#include "fann/oracle.hpp"

#include <algorithm>

#include "fann/error.hpp"

namespace fann {

namespace {

// Keep the k best (key, id) pairs out of a scored scan, ascending by key with
// ties broken by ascending id. Scans run in index order for reproducibility.
struct ScanHit {
    double key;
    OracleNeighbor neighbor;
};

bool hit_less(const ScanHit& a, const ScanHit& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.neighbor.id < b.neighbor.id;
}

std::vector<OracleNeighbor> take_topk(std::vector<ScanHit>& hits, std::size_t k) {
    const std::size_t take = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                      hit_less);
    std::vector<OracleNeighbor> result;
    result.reserve(take);
    for (std::size_t i = 0; i < take; ++i) result.push_back(hits[i].neighbor);
    return result;
}

}  // namespace

std::vector<OracleNeighbor> exact_unfiltered_topk(const LabeledDataset& data,
                                                  std::span<const float> query,
                                                  const LabelSet& required_labels,
                                                  std::size_t k) {
    if (k < 1 || k > data.n)
        throw ValidationError("exact_unfiltered_topk: k must be in [1, N], got " +
                              std::to_string(k));
    std::vector<ScanHit> hits;
    hits.reserve(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double dist = vector_distance(query, data.point(i), data.metric);
        const double match =
            required_labels.empty() ? 1.0 : query_match_score(required_labels, data.labels[i]);
        hits.push_back({dist, {static_cast<std::uint32_t>(i), dist, match}});
    }
    return take_topk(hits, k);
}

std::vector<OracleNeighbor> exact_filtered_topk(const LabeledDataset& data,
                                                std::span<const float> query,
                                                const LabelSet& required_labels,
                                                std::size_t k) {
    if (required_labels.empty())
        throw ValidationError("exact_filtered_topk: required label set must be nonempty");
    std::vector<ScanHit> hits;
    for (std::size_t i = 0; i < data.n; ++i) {
        if (!is_subset(required_labels, data.labels[i])) continue;
        const double dist = vector_distance(query, data.point(i), data.metric);
        hits.push_back({dist, {static_cast<std::uint32_t>(i), dist, 1.0}});
    }
    return take_topk(hits, k);
}

std::vector<OracleNeighbor> exact_weighted_topk(const LabeledDataset& data,
                                                std::span<const float> query,
                                                const LabelSet& required_labels,
                                                const WeightModel& model, std::size_t k) {
    std::vector<ScanHit> hits;
    hits.reserve(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double dist = vector_distance(query, data.point(i), data.metric);
        const double match =
            required_labels.empty() ? 1.0 : query_match_score(required_labels, data.labels[i]);
        const double weighted = dist + model.w_m * (1.0 - match);
        hits.push_back({weighted, {static_cast<std::uint32_t>(i), dist, match}});
    }
    return take_topk(hits, k);
}

GroundTruth build_ground_truth(const LabeledDataset& data,
                               const std::vector<FilteredQuery>& queries, std::uint32_t k,
                               GroundTruthMode mode) {
    if (k < 1) throw ValidationError("build_ground_truth: k must be >= 1");
    GroundTruth gt;
    gt.mode = mode;
    gt.k = k;
    gt.rows.resize(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const FilteredQuery& q = queries[qi];
        std::vector<OracleNeighbor> neighbors;
        if (mode == GroundTruthMode::filtered_exact) {
            neighbors = exact_filtered_topk(data, q.vector, q.required_labels, k);
        } else {
            neighbors = exact_unfiltered_topk(data, q.vector, q.required_labels,
                                              std::min<std::size_t>(k, data.n));
        }
        auto& row = gt.rows[qi];
        row.reserve(neighbors.size());
        for (const OracleNeighbor& nb : neighbors)
            row.push_back({nb.id, static_cast<float>(nb.raw_distance)});
    }
    return gt;
}

}  // namespace fann
