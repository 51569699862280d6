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

#include "fann/planner.hpp"

#include <algorithm>
#include <cmath>

#include "fann/error.hpp"
#include "fann/metric.hpp"
#include "fann/rng.hpp"

namespace fann {

namespace {

std::vector<std::uint32_t> intersect_postings(
    const std::vector<std::vector<std::uint32_t>>& postings, const LabelSet& required) {
    if (required.empty()) return {};
    // Start from the shortest list to keep intersections cheap.
    std::size_t seed_label = 0;
    std::size_t shortest = SIZE_MAX;
    for (std::size_t i = 0; i < required.size(); ++i) {
        const std::uint32_t label = required[i];
        const std::size_t len = label < postings.size() ? postings[label].size() : 0;
        if (len < shortest) {
            shortest = len;
            seed_label = i;
        }
    }
    if (shortest == 0) return {};

    std::vector<std::uint32_t> current = postings[required[seed_label]];
    for (std::size_t i = 0; i < required.size() && !current.empty(); ++i) {
        if (i == seed_label) continue;
        const auto& other = postings[required[i]];
        std::vector<std::uint32_t> next;
        next.reserve(std::min(current.size(), other.size()));
        std::set_intersection(current.begin(), current.end(), other.begin(), other.end(),
                              std::back_inserter(next));
        current = std::move(next);
    }
    return current;
}

}  // namespace

SelectivityIndex SelectivityIndex::build(const LabeledDataset& data, double sample_fraction,
                                         std::uint64_t seed) {
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
        throw ValidationError("selectivity index: sample_fraction must be in (0, 1]");

    std::vector<std::uint32_t> sample;
    if (sample_fraction >= 1.0) {
        sample.resize(data.n);
        for (std::size_t i = 0; i < data.n; ++i) sample[i] = static_cast<std::uint32_t>(i);
    } else {
        const std::size_t want = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(data.n))));
        std::vector<std::uint32_t> ids(data.n);
        for (std::size_t i = 0; i < data.n; ++i) ids[i] = static_cast<std::uint32_t>(i);
        Rng rng(seed);
        rng.shuffle(ids);
        sample.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(want));
        std::sort(sample.begin(), sample.end());
    }

    SelectivityIndex index;
    index.sample_size = static_cast<std::uint32_t>(sample.size());
    index.scale = static_cast<double>(data.n) / static_cast<double>(sample.size());
    index.postings.resize(data.label_universe);
    for (const std::uint32_t id : sample)
        for (const std::uint32_t label : data.labels[id]) index.postings[label].push_back(id);
    return index;
}

std::uint64_t estimate_selectivity(const SelectivityIndex& index, const LabelSet& required) {
    if (required.empty()) throw ValidationError("estimate_selectivity: empty label set");
    const std::vector<std::uint32_t> hits = intersect_postings(index.postings, required);
    return static_cast<std::uint64_t>(
        std::floor(static_cast<double>(hits.size()) * index.scale + 0.5));
}

Planner Planner::build(const LabeledDataset& data, const PlannerConfig& config) {
    Planner planner;
    planner.config_ = config;
    planner.sampled_ = SelectivityIndex::build(data, config.sample_fraction, config.seed);
    planner.full_ = config.sample_fraction >= 1.0
                        ? planner.sampled_
                        : SelectivityIndex::build(data, 1.0, config.seed);
    return planner;
}

std::vector<std::uint32_t> Planner::satisfying_subset(const LabelSet& required) const {
    return intersect_postings(full_.postings, required);
}

PlanResult plan_and_search(const GraphIndex& index, const LabeledDataset& data,
                           const Planner& planner, const FilteredQuery& query,
                           const SearchParams& search_params) {
    PlanResult result;
    const bool unfiltered = query.required_labels.empty();
    const std::uint64_t estimate =
        unfiltered ? UINT64_MAX : estimate_selectivity(planner.sampled(), query.required_labels);

    if (!unfiltered && estimate < planner.config().selectivity_threshold) {
        result.route = Route::brute;
        const std::vector<std::uint32_t> subset = planner.satisfying_subset(query.required_labels);
        ComparisonCounter counter;
        struct Hit {
            double dist;
            std::uint32_t id;
        };
        std::vector<Hit> hits;
        hits.reserve(subset.size());
        for (const std::uint32_t id : subset) {
            const double dist = vector_distance(query.vector, data.point(id), data.metric);
            counter.add();
            hits.push_back({dist, id});
        }
        const std::size_t take = std::min<std::size_t>(search_params.k, hits.size());
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take),
                          hits.end(), [](const Hit& a, const Hit& b) {
                              if (a.dist != b.dist) return a.dist < b.dist;
                              return a.id < b.id;
                          });
        for (std::size_t i = 0; i < take; ++i) {
            result.ids.push_back(hits[i].id);
            result.distances.push_back(hits[i].dist);
        }
        result.comparisons = counter.count;
        return result;
    }

    const SearchResult found = index.search(data, query.vector, query.required_labels, search_params);
    result.route = Route::graph;
    result.ids = found.ids;
    result.distances = found.distances;
    result.comparisons = found.comparisons;
    return result;
}

}  // namespace fann
