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
#include <utility>
#include <vector>

#include "fann/metric.hpp"

namespace fann {

// Row-major float matrix as stored in fbin files.
struct VectorData {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<float> values;  // n * d

    std::span<const float> row(std::size_t i) const { return {values.data() + i * d, d}; }
};

// The search corpus: N vectors with one sorted duplicate-free label set each.
struct LabeledDataset {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<float> vectors;      // row-major n * d
    std::vector<LabelSet> labels;    // size n
    std::uint32_t label_universe = 0;  // m: label ids live in [0, m)
    MetricKind metric = MetricKind::euclidean;

    std::span<const float> point(std::size_t i) const { return {vectors.data() + i * d, d}; }

    // Validates every invariant (sizes, label range/order, finiteness, and
    // positive norms under cosine). Throws ValidationError on violation.
    static LabeledDataset create(VectorData vectors, std::vector<LabelSet> labels,
                                 std::optional<std::uint32_t> label_universe, MetricKind metric);
};

// A query vector plus its required label set (AND semantics). The label set
// may be empty only for unfiltered queries.
struct FilteredQuery {
    std::uint32_t id = 0;
    std::vector<float> vector;
    LabelSet required_labels;
};

enum class GroundTruthMode : std::uint8_t { filtered_exact = 0, unfiltered_exact = 1 };

struct GroundTruthEntry {
    std::uint32_t id = 0;
    float distance = 0.0f;
};

// Exact neighbor lists per query, sorted ascending by (distance, id). Rows may
// be shorter than k in filtered mode when fewer points satisfy the filter.
struct GroundTruth {
    GroundTruthMode mode = GroundTruthMode::filtered_exact;
    std::uint32_t k = 0;
    std::vector<std::vector<GroundTruthEntry>> rows;
};

// Desk-scale synthetic dataset description. "adversarial" places the points
// that satisfy each query's filter at a deliberate vector offset so that
// filter-blind traversal misses them.
struct SyntheticSpec {
    std::size_t n = 1000;
    std::size_t d = 8;
    std::uint32_t m = 20;
    double label_skew = 0.8;                 // Zipf exponent over label ids
    std::uint32_t labels_per_point_min = 1;
    std::uint32_t labels_per_point_max = 3;
    std::uint32_t cluster_count = 4;
    double label_cluster_correlation = 0.8;
    std::uint64_t seed = 0;
    MetricKind metric = MetricKind::euclidean;

    std::size_t query_count = 100;
    std::uint32_t query_labels_min = 1;
    std::uint32_t query_labels_max = 2;
    double train_fraction = 0.5;

    double cluster_center_scale = 5.0;
    double point_noise = 1.0;
    double query_noise = 0.5;

    bool adversarial = false;
    double target_fraction = 0.2;   // adversarial: share of displaced satisfying points
    double target_offset = 4.0;     // adversarial: displacement along a per-cluster direction

    void validate() const;
    static SyntheticSpec from_json_file(const std::filesystem::path& path);
    static SyntheticSpec from_json_text(const std::string& text);
};

struct SyntheticOutput {
    LabeledDataset dataset;
    std::vector<FilteredQuery> queries;
};

// --- fbin vector files: u32 n, u32 d, then n*d little-endian f32, row-major.
VectorData load_vectors(const std::filesystem::path& path);
void save_vectors(const std::filesystem::path& path, const VectorData& data);

// --- label files: one line of comma-separated label ids per point; an empty
// line is an empty set. Returned sets are sorted and deduplicated.
std::vector<LabelSet> load_labels(const std::filesystem::path& path, std::size_t expected_n);
void save_labels(const std::filesystem::path& path, const std::vector<LabelSet>& labels);

// --- ground-truth files: u32 num_queries, u32 k, then per query k u32 ids and
// k f32 distances. Rows shorter than k are padded with id 0xFFFFFFFF / +inf;
// padding is stripped on load.
GroundTruth load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);

// Assemble queries from a vector file plus a label file. Filtered queries must
// have nonempty label sets; pass require_labels=false for unfiltered sets.
std::vector<FilteredQuery> load_queries(const std::filesystem::path& vector_path,
                                        const std::filesystem::path& label_path,
                                        bool require_labels = true);
void save_queries(const std::filesystem::path& vector_path,
                  const std::filesystem::path& label_path,
                  const std::vector<FilteredQuery>& queries);

// Disjoint, exhaustive, seed-reproducible partition into (train, eval).
std::pair<std::vector<FilteredQuery>, std::vector<FilteredQuery>> split_queries(
    const std::vector<FilteredQuery>& queries, double train_fraction, std::uint64_t seed);

SyntheticOutput generate_synthetic(const SyntheticSpec& spec);

}  // namespace fann
