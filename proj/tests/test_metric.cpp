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

#include <random>
#include <vector>

#include "doctest.h"
#include "fann/metric.hpp"

using namespace fann;

TEST_CASE("euclidean distance basics") {
    const std::vector<float> a{0.0f, 0.0f};
    const std::vector<float> b{3.0f, 4.0f};
    CHECK(vector_distance(a, b, MetricKind::euclidean) == doctest::Approx(5.0));
    CHECK(vector_distance(a, a, MetricKind::euclidean) == 0.0);

    const std::vector<float> c{1.0f, 2.0f, 3.0f};
    CHECK_THROWS_AS(vector_distance(a, c, MetricKind::euclidean), ValidationError);
}

TEST_CASE("cosine distance basics") {
    const std::vector<float> v{0.3f, -1.2f, 2.0f};
    CHECK(vector_distance(v, v, MetricKind::cosine) == doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<float> ex{1.0f, 0.0f};
    const std::vector<float> ey{0.0f, 1.0f};
    CHECK(vector_distance(ex, ey, MetricKind::cosine) == doctest::Approx(1.0));

    const std::vector<float> zero{0.0f, 0.0f};
    CHECK_THROWS_AS(vector_distance(ex, zero, MetricKind::cosine), ValidationError);

    // Clamped to [0, 2] even with opposite vectors.
    const std::vector<float> neg{-1.0f, 0.0f};
    CHECK(vector_distance(ex, neg, MetricKind::cosine) <= 2.0);
}

TEST_CASE("query match score") {
    CHECK(query_match_score({1, 2}, {1, 2, 3}) == 1.0);
    CHECK(query_match_score({1, 2}, {2, 9}) == 0.5);
    CHECK(query_match_score({4}, {}) == 0.0);
    CHECK_THROWS_AS(query_match_score({}, {1}), ValidationError);
}

TEST_CASE("query match score is 1 exactly when the filter is satisfied") {
    // Exhaustive over all subset pairs of a 5-label universe.
    for (std::uint32_t qa = 1; qa < 32; ++qa) {
        for (std::uint32_t vb = 0; vb < 32; ++vb) {
            LabelSet sq, sv;
            for (std::uint32_t bit = 0; bit < 5; ++bit) {
                if (qa & (1u << bit)) sq.push_back(bit);
                if (vb & (1u << bit)) sv.push_back(bit);
            }
            const bool subset = (qa & vb) == qa;
            CHECK((query_match_score(sq, sv) == 1.0) == subset);
        }
    }
}

TEST_CASE("label match score") {
    CHECK(label_match_score({1, 2, 3}, {1}) == doctest::Approx(1.0 / 3.0));
    CHECK(label_match_score({5}, {5}) == 1.0);
    CHECK(label_match_score({}, {7}) == 1.0);

    // Asymmetry witness.
    CHECK(label_match_score({1, 2}, {1}) == 0.5);
    CHECK(label_match_score({1}, {1, 2}) == 1.0);
}

TEST_CASE("weighted distance arithmetic and counter") {
    ComparisonCounter counter;
    WeightModel model = WeightModel::fixed(0.2);
    CHECK(weighted_distance(0.3, 0.5, model, counter) == doctest::Approx(0.4));
    CHECK(counter.count == 1);

    CHECK(weighted_distance(0.7, 1.0, model, counter) == doctest::Approx(0.7));
    CHECK(counter.count == 2);

    WeightModel zero = WeightModel::zero();
    CHECK(weighted_distance(0.3, 0.0, zero, counter) == doctest::Approx(0.3));
    CHECK(counter.count == 3);
}

TEST_CASE("weighted distance monotonicity") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double raw = unit(rng) * 3.0;
        const double m1 = unit(rng);
        const double m2 = unit(rng);
        const double w1 = unit(rng);
        const double w2 = unit(rng);
        ComparisonCounter counter;

        // Non-increasing in match for fixed raw and weight.
        const double lo_match = std::min(m1, m2);
        const double hi_match = std::max(m1, m2);
        const WeightModel model = WeightModel::fixed(w1);
        CHECK(weighted_distance(raw, hi_match, model, counter) <=
              weighted_distance(raw, lo_match, model, counter));

        // Non-decreasing in w when match < 1.
        const double match = unit(rng) * 0.999;
        const WeightModel small = WeightModel::fixed(std::min(w1, w2));
        const WeightModel large = WeightModel::fixed(std::max(w1, w2));
        CHECK(weighted_distance(raw, match, small, counter) <=
              weighted_distance(raw, match, large, counter));
    }
}

TEST_CASE("weight model invariants") {
    CHECK_THROWS_AS(WeightModel::fixed(-0.1), ValidationError);
    CHECK_THROWS_AS(WeightModel::learned(0.5, 1.0, 0.0), ValidationError);
    const WeightModel learned = WeightModel::learned(0.5, 10.0, 0.01);
    CHECK(learned.provenance == WeightModel::Provenance::learned);
    CHECK(learned.epsilon == 0.01);
}
