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

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <set>

#include "doctest.h"
#include "fann/graph_index.hpp"
#include "fann/oracle.hpp"
#include "reference/plain_vamana.hpp"
#include "support.hpp"

using namespace fann;
using fann::test::TempDir;

namespace {

LabeledDataset line_dataset(const std::vector<float>& coords) {
    VectorData vectors;
    vectors.n = coords.size();
    vectors.d = 1;
    vectors.values = coords;
    return LabeledDataset::create(vectors, std::vector<LabelSet>(coords.size()), 1,
                                  MetricKind::euclidean);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool reachable_from(const std::vector<std::vector<std::uint32_t>>& graph, std::uint32_t source,
                    std::size_t n) {
    std::vector<bool> reached(n, false);
    std::deque<std::uint32_t> queue{source};
    reached[source] = true;
    std::size_t count = 1;
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (const std::uint32_t u : graph[v]) {
            if (!reached[u]) {
                reached[u] = true;
                ++count;
                queue.push_back(u);
            }
        }
    }
    return count == n;
}

}  // namespace

TEST_CASE("medoid of collinear points and singletons") {
    CHECK(compute_medoid(line_dataset({0.0f, 1.0f, 10.0f})) == 1);
    CHECK(compute_medoid(line_dataset({42.0f})) == 0);
}

TEST_CASE("medoid matches the exhaustive quadratic reference") {
    const LabeledDataset data = fann::test::random_dataset(200, 5, 4, 808);
    std::uint32_t expected = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < data.n; ++j)
            if (i != j) sum += vector_distance(data.point(i), data.point(j), data.metric);
        if (sum < best) {
            best = sum;
            expected = static_cast<std::uint32_t>(i);
        }
    }
    CHECK(compute_medoid(data) == expected);
}

TEST_CASE("start nodes: forced carrier, ties, and centroid proximity") {
    VectorData vectors;
    vectors.n = 4;
    vectors.d = 1;
    vectors.values = {0.0f, 1.0f, 1.0f, 5.0f};
    std::vector<LabelSet> labels = {{0}, {1}, {1}, {2}};
    const LabeledDataset data =
        LabeledDataset::create(vectors, labels, 3, MetricKind::euclidean);
    const auto starts = compute_start_nodes(data);
    REQUIRE(starts.size() == 3);
    CHECK(starts.at(0) == 0);  // single carrier
    CHECK(starts.at(1) == 1);  // identical carriers: smaller id
    CHECK(starts.at(2) == 3);

    // Clustered set: each label's start node is its nearest-to-centroid
    // carrier, verified by this test's own scan.
    const LabeledDataset random = fann::test::random_dataset(300, 4, 5, 2025);
    const auto random_starts = compute_start_nodes(random);
    for (const auto& [label, start] : random_starts) {
        std::vector<std::uint32_t> carriers;
        std::vector<double> centroid(random.d, 0.0);
        for (std::size_t i = 0; i < random.n; ++i) {
            if (!std::binary_search(random.labels[i].begin(), random.labels[i].end(), label))
                continue;
            carriers.push_back(static_cast<std::uint32_t>(i));
            for (std::size_t j = 0; j < random.d; ++j) centroid[j] += random.point(i)[j];
        }
        std::vector<float> centroid_f(random.d);
        for (std::size_t j = 0; j < random.d; ++j)
            centroid_f[j] = static_cast<float>(centroid[j] / carriers.size());
        std::uint32_t expected = carriers.front();
        double best = std::numeric_limits<double>::infinity();
        for (const std::uint32_t c : carriers) {
            const double dist = vector_distance(centroid_f, random.point(c), random.metric);
            if (dist < best) {
                best = dist;
                expected = c;
            }
        }
        CHECK(start == expected);
    }
}

TEST_CASE("greedy search over a complete graph is exhaustive") {
    const LabeledDataset data = fann::test::random_dataset(20, 4, 4, 310);
    std::vector<std::vector<std::uint32_t>> complete(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
        for (std::size_t j = 0; j < data.n; ++j)
            if (i != j) complete[i].push_back(static_cast<std::uint32_t>(j));

    const auto q = fann::test::random_query_vector(4, 11);
    const auto result = weighted_greedy_search(complete, data, q, {}, {0}, 10, data.n,
                                               WeightModel::zero(), MatchSide::query);
    const auto expected = exact_unfiltered_topk(data, q, {}, 10);
    REQUIRE(result.ids.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(result.ids[i] == expected[i].id);

    // Every point's distance was computed exactly once.
    CHECK(result.comparisons == data.n);
    CHECK(result.visited.size() == data.n);
}

TEST_CASE("greedy search with zero weight matches the plain reference traversal") {
    const LabeledDataset data = fann::test::random_dataset(300, 6, 5, 4040);
    const auto index = GraphIndex::build(data, BuildParams{16, 32, 1.2f, WeightModel::zero(), 3});

    for (int trial = 0; trial < 10; ++trial) {
        const auto q = fann::test::random_query_vector(6, 600 + trial);
        const std::vector<std::uint32_t> entries{index.medoid()};
        const auto mine = weighted_greedy_search(index.adjacency(), data, q, {}, entries, 10, 50,
                                                 WeightModel::zero(), MatchSide::query);
        const auto reference =
            fann::test::plain_greedy_search(index.adjacency(), data, q, entries, 10, 50);
        CHECK(mine.ids == reference.ids);
        CHECK(mine.visited == reference.visited);
        CHECK(mine.comparisons == reference.comparisons);
    }
}

TEST_CASE("greedy search recall against the weighted oracle") {
    // 2,000-point calibration set; threshold frozen at 0.95.
    SyntheticSpec spec;
    spec.n = 2000;
    spec.d = 12;
    spec.m = 24;
    spec.cluster_count = 6;
    spec.seed = 99;
    spec.query_count = 50;
    const SyntheticOutput synth = generate_synthetic(spec);

    LearnerConfig lc;
    const LearnerReport report = learn_weights(synth.dataset, synth.queries, lc);
    const WeightModel model = report.model;

    const auto index = GraphIndex::build(synth.dataset, BuildParams{32, 64, 1.2f, model, 1});
    double recall_sum = 0.0;
    for (const FilteredQuery& q : synth.queries) {
        SearchParams params;
        params.list_size = 100;
        params.k = 10;
        params.model = model;
        const auto got = index.search(synth.dataset, q.vector, q.required_labels, params);
        const auto want = exact_weighted_topk(synth.dataset, q.vector, q.required_labels, model, 10);
        std::set<std::uint32_t> want_ids;
        for (const auto& nb : want) want_ids.insert(nb.id);
        std::size_t hits = 0;
        for (const std::uint32_t id : got.ids)
            if (want_ids.count(id)) ++hits;
        recall_sum += static_cast<double>(hits) / static_cast<double>(want_ids.size());
    }
    CHECK(recall_sum / static_cast<double>(synth.queries.size()) >= 0.95);
}

TEST_CASE("greedy search edge cases") {
    const LabeledDataset data = fann::test::random_dataset(50, 4, 4, 31);
    const auto index = GraphIndex::build(data, BuildParams{8, 16, 1.2f, WeightModel::zero(), 0});

    // k = 0: empty result list, full visited set.
    const auto q = fann::test::random_query_vector(4, 12);
    const auto result = weighted_greedy_search(index.adjacency(), data, q, {}, {index.medoid()}, 0,
                                               16, WeightModel::zero(), MatchSide::query);
    CHECK(result.ids.empty());
    CHECK(!result.visited.empty());

    // Invalid entry id.
    CHECK_THROWS_AS(weighted_greedy_search(index.adjacency(), data, q, {}, {9999}, 1, 16,
                                           WeightModel::zero(), MatchSide::query),
                    ValidationError);
    // Empty entry list.
    CHECK_THROWS_AS(weighted_greedy_search(index.adjacency(), data, q, {}, {}, 1, 16,
                                           WeightModel::zero(), MatchSide::query),
                    ValidationError);
}

TEST_CASE("robust prune keeps sparse candidate sets intact") {
    // Mutually distant points: nothing dominates anything.
    VectorData vectors;
    vectors.n = 5;
    vectors.d = 2;
    vectors.values = {0.0f, 0.0f, 10.0f, 0.0f, 0.0f, 10.0f, -10.0f, 0.0f, 0.0f, -10.0f};
    const LabeledDataset data = LabeledDataset::create(
        vectors, std::vector<LabelSet>(5), 1, MetricKind::euclidean);

    const auto kept = robust_prune(0, {1, 2, 3, 4}, 1.2f, 8, data, WeightModel::zero());
    CHECK(kept == std::vector<std::uint32_t>{1, 2, 3, 4});
}

TEST_CASE("robust prune with huge alpha keeps the R nearest") {
    const LabeledDataset data = fann::test::random_dataset(60, 4, 4, 606);
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 1; i < 40; ++i) candidates.push_back(i);

    const auto kept = robust_prune(0, candidates, 1e6f, 8, data, WeightModel::zero());
    REQUIRE(kept.size() == 8);

    std::vector<std::pair<double, std::uint32_t>> scored;
    for (const std::uint32_t c : candidates)
        scored.emplace_back(vector_distance(data.point(0), data.point(c), data.metric), c);
    std::sort(scored.begin(), scored.end());
    std::vector<std::uint32_t> nearest;
    for (std::size_t i = 0; i < 8; ++i) nearest.push_back(scored[i].second);
    std::sort(nearest.begin(), nearest.end());
    CHECK(kept == nearest);
}

TEST_CASE("robust prune matches a step-by-step reference") {
    const LabeledDataset data = fann::test::random_dataset(80, 4, 6, 555);
    const WeightModel model = WeightModel::fixed(0.3);
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 10; i < 60; ++i) candidates.push_back(i);

    const auto got = robust_prune(3, candidates, 1.2f, 8, data, model);

    // Independent replay of the rule.
    auto weighted = [&](std::uint32_t a, std::uint32_t b) {
        return vector_distance(data.point(a), data.point(b), data.metric) +
               model.w_m * (1.0 - label_match_score(data.labels[a], data.labels[b]));
    };
    std::vector<std::pair<double, std::uint32_t>> scored;
    for (const std::uint32_t c : candidates) scored.emplace_back(weighted(3, c), c);
    std::sort(scored.begin(), scored.end());
    std::vector<std::uint32_t> expected;
    std::vector<bool> alive(scored.size(), true);
    for (std::size_t i = 0; i < scored.size() && expected.size() < 8; ++i) {
        if (!alive[i]) continue;
        alive[i] = false;
        expected.push_back(scored[i].second);
        if (expected.size() == 8) break;
        for (std::size_t j = i + 1; j < scored.size(); ++j) {
            if (alive[j] && 1.2 * weighted(scored[i].second, scored[j].second) <= scored[j].first)
                alive[j] = false;
        }
    }
    std::sort(expected.begin(), expected.end());
    CHECK(got == expected);
}

TEST_CASE("build structural contract") {
    const LabeledDataset data = fann::test::random_dataset(400, 6, 8, 11, 3);
    const BuildParams params{16, 32, 1.2f, WeightModel::fixed(0.2), 7};
    const auto index = GraphIndex::build(data, params);

    REQUIRE(index.adjacency().size() == data.n);
    for (std::size_t p = 0; p < data.n; ++p) {
        const auto& neighbors = index.adjacency()[p];
        CHECK(neighbors.size() <= params.max_degree);
        CHECK(std::is_sorted(neighbors.begin(), neighbors.end()));
        CHECK(std::adjacent_find(neighbors.begin(), neighbors.end()) == neighbors.end());
        for (const std::uint32_t u : neighbors) {
            CHECK(u < data.n);
            CHECK(u != p);
        }
    }
    CHECK(reachable_from(index.adjacency(), index.medoid(), data.n));
}

TEST_CASE("build trivial dataset") {
    const LabeledDataset solo = line_dataset({1.0f});
    const auto index = GraphIndex::build(solo, BuildParams{4, 8, 1.2f, WeightModel::zero(), 0});
    CHECK(index.medoid() == 0);
    CHECK(index.adjacency()[0].empty());
}

TEST_CASE("build is deterministic across runs") {
    TempDir dir("det");
    const LabeledDataset data = fann::test::random_dataset(250, 5, 6, 2323);
    const BuildParams params{12, 24, 1.2f, WeightModel::fixed(0.15), 42};

    GraphIndex::build(data, params).save(dir.file("a.idx"));
    GraphIndex::build(data, params).save(dir.file("b.idx"));
    CHECK(slurp(dir.file("a.idx")) == slurp(dir.file("b.idx")));
}

TEST_CASE("zero-weight build equals the plain reference implementation") {
    const LabeledDataset data = fann::test::random_dataset(300, 5, 6, 1818);
    const std::uint64_t seed = 5;
    const auto index = GraphIndex::build(data, BuildParams{12, 24, 1.2f, WeightModel::zero(), seed});
    const auto reference = fann::test::plain_build(data, 12, 24, 1.2f, seed);

    CHECK(index.medoid() == reference.medoid);
    CHECK(index.start_nodes() == reference.start_nodes);
    CHECK(index.adjacency() == reference.graph);
}

TEST_CASE("index save/load round-trip") {
    TempDir dir("saveload");
    const LabeledDataset data = fann::test::random_dataset(120, 4, 5, 91);
    const BuildParams params{8, 16, 1.2f, WeightModel::fixed(0.25), 3};
    const auto index = GraphIndex::build(data, params);
    index.save(dir.file("x.idx"));

    const GraphIndex loaded = GraphIndex::load(dir.file("x.idx"), data);
    CHECK(loaded.adjacency() == index.adjacency());
    CHECK(loaded.medoid() == index.medoid());
    CHECK(loaded.start_nodes() == index.start_nodes());
    CHECK(loaded.params().max_degree == params.max_degree);
    CHECK(loaded.params().model.w_m == doctest::Approx(0.25));

    loaded.save(dir.file("y.idx"));
    CHECK(slurp(dir.file("x.idx")) == slurp(dir.file("y.idx")));
}

TEST_CASE("index load rejects mismatched datasets and truncation") {
    TempDir dir("loadfail");
    const LabeledDataset data = fann::test::random_dataset(80, 4, 5, 14);
    const auto index = GraphIndex::build(data, BuildParams{8, 16, 1.2f, WeightModel::zero(), 0});
    index.save(dir.file("x.idx"));

    const LabeledDataset other = fann::test::random_dataset(80, 4, 5, 15);
    CHECK_THROWS_WITH_AS(GraphIndex::load(dir.file("x.idx"), other),
                         doctest::Contains("fingerprint"), ValidationError);

    const std::string full = slurp(dir.file("x.idx"));
    {
        std::ofstream out(dir.file("trunc.idx"), std::ios::binary | std::ios::trunc);
        out.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
    }
    CHECK_THROWS_WITH_AS(GraphIndex::load(dir.file("trunc.idx"), data),
                         doctest::Contains("section"), ValidationError);
}

TEST_CASE("cosine metric is supported end to end") {
    const LabeledDataset data =
        fann::test::random_dataset(300, 6, 6, 717, 3, MetricKind::cosine);
    const WeightModel model = WeightModel::fixed(0.1);
    const auto index = GraphIndex::build(data, BuildParams{12, 24, 1.2f, model, 6});

    double recall_sum = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        auto q = fann::test::random_query_vector(6, 5500 + trial);
        q[0] += 2.0f;  // keep the query norm positive
        const LabelSet required{static_cast<std::uint32_t>(trial % 6)};
        SearchParams params;
        params.list_size = 60;
        params.k = 10;
        params.model = model;
        const auto got = index.search(data, q, required, params);
        const auto want = exact_weighted_topk(data, q, required, model, 10);
        std::set<std::uint32_t> want_ids;
        for (const auto& nb : want) want_ids.insert(nb.id);
        std::size_t hits = 0;
        for (const std::uint32_t id : got.ids)
            if (want_ids.count(id)) ++hits;
        recall_sum += static_cast<double>(hits) / static_cast<double>(want_ids.size());
    }
    CHECK(recall_sum / 30.0 >= 0.9);
}

TEST_CASE("search recall is non-decreasing in list size") {
    SyntheticSpec spec;
    spec.n = 1500;
    spec.d = 8;
    spec.m = 16;
    spec.seed = 3;
    spec.query_count = 200;
    const SyntheticOutput synth = generate_synthetic(spec);
    const WeightModel model = WeightModel::fixed(0.2);
    const auto index = GraphIndex::build(synth.dataset, BuildParams{16, 32, 1.2f, model, 2});

    double previous = -1.0;
    for (const std::uint32_t l : {10u, 20u, 50u, 100u, 200u}) {
        double recall_sum = 0.0;
        std::size_t scored = 0;
        for (const FilteredQuery& q : synth.queries) {
            SearchParams params;
            params.list_size = l;
            params.k = 10;
            params.model = model;
            const auto got = index.search(synth.dataset, q.vector, q.required_labels, params);
            const auto want =
                exact_weighted_topk(synth.dataset, q.vector, q.required_labels, model, 10);
            if (want.empty()) continue;
            std::set<std::uint32_t> want_ids;
            for (const auto& nb : want) want_ids.insert(nb.id);
            std::size_t hits = 0;
            for (const std::uint32_t id : got.ids)
                if (want_ids.count(id)) ++hits;
            recall_sum += static_cast<double>(hits) / static_cast<double>(want_ids.size());
            ++scored;
        }
        const double recall = recall_sum / static_cast<double>(scored);
        CHECK(recall >= previous - 0.005);  // no decrease beyond 0.5 points
        previous = recall;
    }
}
