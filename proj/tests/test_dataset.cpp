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

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "doctest.h"
#include "fann/dataset.hpp"
#include "fann/error.hpp"
#include "support.hpp"

using namespace fann;
using fann::test::TempDir;

namespace {

void write_raw(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void append_u32(std::vector<unsigned char>& bytes, std::uint32_t v) {
    bytes.push_back(static_cast<unsigned char>(v));
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v >> 16));
    bytes.push_back(static_cast<unsigned char>(v >> 24));
}

void append_f32(std::vector<unsigned char>& bytes, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    append_u32(bytes, bits);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("fbin load decodes header and payload") {
    TempDir dir("fbin");
    std::vector<unsigned char> bytes;
    append_u32(bytes, 2);
    append_u32(bytes, 3);
    for (const float v : {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f}) append_f32(bytes, v);
    write_raw(dir.file("v.fbin"), bytes);

    const VectorData data = load_vectors(dir.file("v.fbin"));
    CHECK(data.n == 2);
    CHECK(data.d == 3);
    CHECK(data.row(1)[2] == 6.0f);
}

TEST_CASE("fbin load rejects truncation with a byte offset") {
    TempDir dir("fbin_trunc");
    std::vector<unsigned char> bytes;
    append_u32(bytes, 2);
    append_u32(bytes, 3);
    for (const float v : {1.0f, 2.0f, 3.0f, 4.0f, 5.0f}) append_f32(bytes, v);  // one short
    write_raw(dir.file("v.fbin"), bytes);

    CHECK_THROWS_WITH_AS(load_vectors(dir.file("v.fbin")),
                         doctest::Contains("byte offset 28"), ValidationError);
}

TEST_CASE("fbin load rejects non-finite values and zero dimension") {
    TempDir dir("fbin_bad");
    {
        std::vector<unsigned char> bytes;
        append_u32(bytes, 1);
        append_u32(bytes, 2);
        append_f32(bytes, std::numeric_limits<float>::quiet_NaN());
        append_f32(bytes, 0.0f);
        write_raw(dir.file("nan.fbin"), bytes);
        CHECK_THROWS_WITH_AS(load_vectors(dir.file("nan.fbin")),
                             doctest::Contains("byte offset 8"), ValidationError);
    }
    {
        std::vector<unsigned char> bytes;
        append_u32(bytes, 1);
        append_u32(bytes, 0);
        write_raw(dir.file("zerod.fbin"), bytes);
        CHECK_THROWS_AS(load_vectors(dir.file("zerod.fbin")), ValidationError);
    }
}

TEST_CASE("label file parsing") {
    TempDir dir("labels");
    {
        std::ofstream out(dir.file("l.txt"));
        out << "3,1,1\n7\n";
    }
    const auto labels = load_labels(dir.file("l.txt"), 2);
    CHECK(labels[0] == LabelSet{1, 3});
    CHECK(labels[1] == LabelSet{7});
}

TEST_CASE("label file edge cases") {
    TempDir dir("labels_edge");
    {
        std::ofstream out(dir.file("empty.txt"));
        out << "\n";
    }
    const auto labels = load_labels(dir.file("empty.txt"), 1);
    CHECK(labels[0].empty());

    {
        std::ofstream out(dir.file("three.txt"));
        out << "1\n2\n3\n";
    }
    CHECK_THROWS_AS(load_labels(dir.file("three.txt"), 2), ValidationError);

    {
        std::ofstream out(dir.file("alpha.txt"));
        out << "1,x\n";
    }
    CHECK_THROWS_AS(load_labels(dir.file("alpha.txt"), 1), ValidationError);

    {
        std::ofstream out(dir.file("neg.txt"));
        out << "-3\n";
    }
    CHECK_THROWS_AS(load_labels(dir.file("neg.txt"), 1), ValidationError);
}

TEST_CASE("vector and label round-trip is bit-identical") {
    TempDir dir("roundtrip");
    const LabeledDataset data = fann::test::random_dataset(64, 5, 12, 99);

    VectorData vectors;
    vectors.n = data.n;
    vectors.d = data.d;
    vectors.values = data.vectors;
    save_vectors(dir.file("v.fbin"), vectors);
    save_labels(dir.file("l.txt"), data.labels);

    const VectorData loaded = load_vectors(dir.file("v.fbin"));
    CHECK(loaded.values == vectors.values);
    CHECK(load_labels(dir.file("l.txt"), data.n) == data.labels);

    save_vectors(dir.file("v2.fbin"), loaded);
    save_labels(dir.file("l2.txt"), data.labels);
    CHECK(slurp(dir.file("v.fbin")) == slurp(dir.file("v2.fbin")));
    CHECK(slurp(dir.file("l.txt")) == slurp(dir.file("l2.txt")));
}

TEST_CASE("ground truth round-trip with short rows") {
    TempDir dir("gt");
    GroundTruth gt;
    gt.mode = GroundTruthMode::filtered_exact;
    gt.k = 4;
    gt.rows = {
        {{3, 0.5f}, {9, 0.7f}},                        // short row (2 of 4)
        {{1, 0.1f}, {2, 0.2f}, {5, 0.3f}, {8, 0.4f}},  // full row
        {},                                            // no satisfying points
    };
    save_ground_truth(dir.file("gt.bin"), gt);
    const GroundTruth loaded = load_ground_truth(dir.file("gt.bin"));
    CHECK(loaded.mode == GroundTruthMode::filtered_exact);
    CHECK(loaded.k == 4);
    REQUIRE(loaded.rows.size() == 3);
    CHECK(loaded.rows[0].size() == 2);
    CHECK(loaded.rows[0][1].id == 9);
    CHECK(loaded.rows[1].size() == 4);
    CHECK(loaded.rows[2].empty());

    save_ground_truth(dir.file("gt2.bin"), loaded);
    CHECK(slurp(dir.file("gt.bin")) == slurp(dir.file("gt2.bin")));
}

TEST_CASE("dataset invariants are enforced") {
    VectorData vectors;
    vectors.n = 2;
    vectors.d = 2;
    vectors.values = {0.0f, 1.0f, 2.0f, 3.0f};

    // Config m smaller than observed labels.
    CHECK_THROWS_AS(LabeledDataset::create(vectors, {{5}, {}}, 4, MetricKind::euclidean),
                    ValidationError);
    // Inferred m is 1 + max label.
    const LabeledDataset ds =
        LabeledDataset::create(vectors, {{5}, {}}, std::nullopt, MetricKind::euclidean);
    CHECK(ds.label_universe == 6);

    // Zero-norm point under cosine.
    VectorData zeroback = vectors;
    zeroback.values = {0.0f, 0.0f, 1.0f, 1.0f};
    CHECK_THROWS_AS(LabeledDataset::create(zeroback, {{0}, {1}}, std::nullopt, MetricKind::cosine),
                    ValidationError);
}

TEST_CASE("split_queries partitions deterministically") {
    std::vector<FilteredQuery> queries(10);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        queries[i].id = static_cast<std::uint32_t>(i);
        queries[i].vector = {static_cast<float>(i)};
        queries[i].required_labels = {0};
    }

    const auto [train, eval] = split_queries(queries, 0.5, 7);
    CHECK(train.size() == 5);
    CHECK(eval.size() == 5);

    std::set<std::uint32_t> ids;
    for (const auto& q : train) ids.insert(q.id);
    for (const auto& q : eval) ids.insert(q.id);
    CHECK(ids.size() == 10);

    const auto [train2, eval2] = split_queries(queries, 0.5, 7);
    for (std::size_t i = 0; i < train.size(); ++i) CHECK(train[i].id == train2[i].id);

    CHECK_THROWS_AS(split_queries({queries[0]}, 0.5, 1), ValidationError);
}

TEST_CASE("split_queries matches the published split sizes") {
    std::vector<FilteredQuery> queries(17583);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        queries[i].id = static_cast<std::uint32_t>(i);
        queries[i].vector = {0.0f};
        queries[i].required_labels = {0};
    }
    const double fraction = 11865.0 / 17583.0;
    const auto [train, eval] = split_queries(queries, fraction, 0);
    CHECK(train.size() == 11865);
    CHECK(eval.size() == 5718);
}

TEST_CASE("query loader round-trips and enforces nonempty filter labels") {
    TempDir dir("queries");
    std::vector<FilteredQuery> queries(3);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        queries[i].id = static_cast<std::uint32_t>(i);
        queries[i].vector = {static_cast<float>(i), 1.0f};
        queries[i].required_labels = {static_cast<std::uint32_t>(i)};
    }
    save_queries(dir.file("q.fbin"), dir.file("q.txt"), queries);
    const auto loaded = load_queries(dir.file("q.fbin"), dir.file("q.txt"));
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[2].vector == queries[2].vector);
    CHECK(loaded[2].required_labels == queries[2].required_labels);

    // A filtered query with an empty label set is rejected...
    queries[1].required_labels.clear();
    save_queries(dir.file("q2.fbin"), dir.file("q2.txt"), queries);
    CHECK_THROWS_AS(load_queries(dir.file("q2.fbin"), dir.file("q2.txt")), ValidationError);
    // ...unless the set is explicitly unfiltered.
    CHECK(load_queries(dir.file("q2.fbin"), dir.file("q2.txt"), false).size() == 3);
}

TEST_CASE("split_queries partition property across fractions and seeds") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> frac(0.001, 0.999);
    std::vector<FilteredQuery> queries(37);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        queries[i].id = static_cast<std::uint32_t>(i);
        queries[i].vector = {0.0f};
        queries[i].required_labels = {0};
    }
    for (int trial = 0; trial < 50; ++trial) {
        const auto [train, eval] = split_queries(queries, frac(rng), rng());
        CHECK(!train.empty());
        CHECK(!eval.empty());
        CHECK(train.size() + eval.size() == queries.size());
        std::set<std::uint32_t> seen;
        for (const auto& q : train) seen.insert(q.id);
        for (const auto& q : eval) CHECK(seen.insert(q.id).second);
        CHECK(seen.size() == queries.size());
    }
}

TEST_CASE("synthetic generation is deterministic") {
    SyntheticSpec spec;
    spec.n = 500;
    spec.d = 8;
    spec.m = 20;
    spec.seed = 1;
    spec.query_count = 40;

    const SyntheticOutput a = generate_synthetic(spec);
    const SyntheticOutput b = generate_synthetic(spec);
    CHECK(a.dataset.vectors == b.dataset.vectors);
    CHECK(a.dataset.labels == b.dataset.labels);
    REQUIRE(a.queries.size() == b.queries.size());
    for (std::size_t i = 0; i < a.queries.size(); ++i) {
        CHECK(a.queries[i].vector == b.queries[i].vector);
        CHECK(a.queries[i].required_labels == b.queries[i].required_labels);
    }
}

TEST_CASE("synthetic full correlation keeps labels inside the cluster pool") {
    SyntheticSpec spec;
    spec.n = 400;
    spec.d = 4;
    spec.m = 20;
    spec.cluster_count = 4;
    spec.label_cluster_correlation = 1.0;
    spec.labels_per_point_min = 1;
    spec.labels_per_point_max = 4;  // pool size is 5, so pools never exhaust
    spec.seed = 11;

    const SyntheticOutput out = generate_synthetic(spec);
    // Pool of cluster c is {l : l % 4 == c}; check every point uses one pool.
    for (const LabelSet& set : out.dataset.labels) {
        REQUIRE(!set.empty());
        const std::uint32_t pool = set.front() % spec.cluster_count;
        for (const std::uint32_t label : set) CHECK(label % spec.cluster_count == pool);
    }
}

TEST_CASE("synthetic infeasible spec is rejected") {
    SyntheticSpec spec;
    spec.m = 5;
    spec.labels_per_point_max = 8;
    CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}

TEST_CASE("synthetic zipf-0 label marginals are uniform") {
    SyntheticSpec spec;
    spec.n = 4000;
    spec.d = 4;
    spec.m = 16;
    spec.label_skew = 0.0;
    spec.label_cluster_correlation = 0.0;
    spec.labels_per_point_min = 2;
    spec.labels_per_point_max = 2;
    spec.seed = 5;

    const SyntheticOutput out = generate_synthetic(spec);
    std::vector<std::size_t> counts(spec.m, 0);
    std::size_t total = 0;
    for (const LabelSet& set : out.dataset.labels) {
        for (const std::uint32_t label : set) {
            ++counts[label];
            ++total;
        }
    }
    const double p = 1.0 / spec.m;
    const double expected = static_cast<double>(total) * p;
    const double sigma = std::sqrt(static_cast<double>(total) * p * (1.0 - p));
    for (const std::size_t count : counts)
        CHECK(std::abs(static_cast<double>(count) - expected) <= 3.0 * sigma);
}
