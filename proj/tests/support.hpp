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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fann/dataset.hpp"
#include "fann/metric.hpp"
#include "fann/weight_learner.hpp"

namespace fann::test {

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("fann_test_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline LabeledDataset random_dataset(std::size_t n, std::size_t d, std::uint32_t m,
                                     std::uint64_t seed, std::uint32_t max_labels = 3,
                                     MetricKind metric = MetricKind::euclidean) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> coord(-1.0f, 1.0f);
    VectorData vectors;
    vectors.n = n;
    vectors.d = d;
    vectors.values.resize(n * d);
    for (float& v : vectors.values) v = coord(rng);
    if (metric == MetricKind::cosine) {
        for (std::size_t i = 0; i < n; ++i) vectors.values[i * d] += 2.0f;  // keep norms positive
    }
    std::vector<LabelSet> labels(n);
    std::uniform_int_distribution<std::uint32_t> count_dist(0, max_labels);
    std::uniform_int_distribution<std::uint32_t> label_dist(0, m - 1);
    for (auto& set : labels) {
        const std::uint32_t count = count_dist(rng);
        for (std::uint32_t c = 0; c < count; ++c) set.push_back(label_dist(rng));
        normalize_label_set(set);
    }
    return LabeledDataset::create(std::move(vectors), std::move(labels), m, metric);
}

inline std::vector<float> random_query_vector(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> coord(-1.0f, 1.0f);
    std::vector<float> v(d);
    for (float& x : v) x = coord(rng);
    return v;
}

inline std::vector<PreferenceTriplet> random_triplets(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<PreferenceTriplet> triplets(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double d_neg = dist(rng);
        const double d_pos = d_neg + dist(rng) * 0.5;  // negatives are closer by construction
        const double m_neg = dist(rng) * 0.999;        // strictly below 1
        triplets[i] = {static_cast<std::uint32_t>(i), d_pos, 1.0, d_neg, m_neg};
    }
    return triplets;
}

}  // namespace fann::test
