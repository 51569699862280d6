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

#include "fann/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "fann/error.hpp"

namespace fann {

namespace {

using Clock = std::chrono::steady_clock;

struct Aggregate {
    double recall_sum = 0.0;
    std::uint64_t scored = 0;
    std::uint64_t excluded = 0;
    std::uint64_t comparisons = 0;
    std::uint64_t graph_routed = 0;
    std::uint64_t brute_routed = 0;

    void add(const std::optional<double>& recall, const PlanResult& plan) {
        if (recall) {
            recall_sum += *recall;
            ++scored;
        } else {
            ++excluded;
        }
        comparisons += plan.comparisons;
        if (plan.route == Route::graph)
            ++graph_routed;
        else
            ++brute_routed;
    }

    EvalRow finish(const std::string& method, std::uint32_t l, std::uint32_t k, double w_m,
                   double wall_ms, std::uint64_t total_queries) const {
        EvalRow row;
        row.method = method;
        row.l_search = l;
        row.k = k;
        row.recall = scored > 0 ? recall_sum / static_cast<double>(scored) : 0.0;
        row.mean_comparisons =
            total_queries > 0 ? static_cast<double>(comparisons) / static_cast<double>(total_queries)
                              : 0.0;
        row.graph_routed = graph_routed;
        row.brute_routed = brute_routed;
        row.excluded_queries = excluded;
        row.w_m = w_m;
        row.wall_ms = wall_ms;
        return row;
    }
};

void require(const void* artifact, const std::string& name) {
    if (!artifact) throw MissingArtifactError("benchmark requires " + name);
}

}  // namespace

std::optional<double> recall_at_k(std::span<const std::uint32_t> retrieved,
                                  const std::vector<GroundTruthEntry>& truth, std::uint32_t k) {
    if (k < 1) throw ValidationError("recall_at_k: k must be >= 1");
    if (truth.empty()) return std::nullopt;
    const std::size_t denom = std::min<std::size_t>(k, truth.size());
    std::unordered_set<std::uint32_t> truth_ids;
    truth_ids.reserve(denom * 2);
    for (std::size_t i = 0; i < denom; ++i) truth_ids.insert(truth[i].id);
    std::size_t hits = 0;
    const std::size_t scan = std::min<std::size_t>(k, retrieved.size());
    for (std::size_t i = 0; i < scan; ++i)
        if (truth_ids.count(retrieved[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(denom);
}

std::vector<EvalRow> run_benchmark(const BenchmarkInputs& inputs, const BenchmarkConfig& config) {
    require(inputs.data, "a dataset");
    require(inputs.queries, "an eval query set");
    const LabeledDataset& data = *inputs.data;
    const auto& queries = *inputs.queries;

    const bool wants_integrated = std::count(config.methods.begin(), config.methods.end(),
                                             std::string("integrated")) > 0;
    const bool wants_fixed =
        std::count(config.methods.begin(), config.methods.end(), std::string("fixed")) > 0;
    const bool wants_post =
        std::count(config.methods.begin(), config.methods.end(), std::string("post")) > 0;
    for (const std::string& m : config.methods)
        if (m != "integrated" && m != "fixed" && m != "post")
            throw ValidationError("unknown benchmark method '" + m + "'");

    if (wants_integrated || wants_fixed || wants_post)
        require(inputs.filtered_gt, "filtered ground truth");
    if (wants_integrated) require(inputs.weighted_index, "the weighted-build index");
    if (wants_fixed || wants_post) require(inputs.zero_index, "the zero-weight index");
    if (inputs.filtered_gt && inputs.filtered_gt->rows.size() != queries.size())
        throw ValidationError("filtered ground truth does not cover the eval query set");
    if (inputs.unfiltered_gt && inputs.unfiltered_gt->rows.size() != queries.size())
        throw ValidationError("unfiltered ground truth does not cover the eval query set");

    const Planner planner = Planner::build(data, config.planner);
    std::vector<EvalRow> rows;

    // One pass of a filtered method over all queries at a given L.
    auto run_filtered = [&](const GraphIndex& index, const WeightModel& model, std::uint32_t l,
                            bool post_filter) {
        Aggregate agg;
        const auto start = Clock::now();
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            const FilteredQuery& q = queries[qi];
            PlanResult plan;
            if (!post_filter) {
                SearchParams params;
                params.list_size = std::max(l, config.k);
                params.k = config.k;
                params.model = model;
                plan = plan_and_search(index, data, planner, q, params);
            } else {
                const std::uint64_t estimate =
                    estimate_selectivity(planner.sampled(), q.required_labels);
                if (estimate < planner.config().selectivity_threshold) {
                    SearchParams params;
                    params.list_size = std::max(l, config.k);
                    params.k = config.k;
                    params.model = WeightModel::zero();
                    plan = plan_and_search(index, data, planner, q, params);
                } else {
                    // Traverse filter-blind, then keep satisfying candidates.
                    const std::uint32_t pool_size = std::max<std::uint32_t>(
                        config.k,
                        static_cast<std::uint32_t>(std::llround(l * config.post_over_provision)));
                    SearchParams params;
                    params.list_size = pool_size;
                    params.k = pool_size;
                    params.model = WeightModel::zero();
                    const SearchResult found =
                        index.search(data, q.vector, LabelSet{}, params);
                    plan.route = Route::graph;
                    plan.comparisons = found.comparisons;
                    for (std::size_t i = 0;
                         i < found.ids.size() && plan.ids.size() < config.k; ++i) {
                        if (is_subset(q.required_labels, data.labels[found.ids[i]])) {
                            plan.ids.push_back(found.ids[i]);
                            plan.distances.push_back(found.distances[i]);
                        }
                    }
                }
            }
            agg.add(recall_at_k(plan.ids, inputs.filtered_gt->rows[qi], config.k), plan);
        }
        const double wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        return std::pair<Aggregate, double>(agg, wall_ms);
    };

    if (wants_integrated) {
        for (const std::uint32_t l : config.l_sweep) {
            const auto [agg, wall_ms] =
                run_filtered(*inputs.weighted_index, inputs.learned, l, false);
            rows.push_back(agg.finish("integrated", l, config.k, inputs.learned.w_m, wall_ms,
                                      queries.size()));
        }
    }

    if (wants_fixed) {
        if (config.fixed_penalties.empty())
            throw ValidationError("fixed method requires at least one penalty");
        for (const std::uint32_t l : config.l_sweep) {
            // Report the strongest fixed-penalty baseline at this L.
            std::optional<EvalRow> best;
            for (const double penalty : config.fixed_penalties) {
                const auto [agg, wall_ms] =
                    run_filtered(*inputs.zero_index, WeightModel::fixed(penalty), l, false);
                EvalRow row = agg.finish("fixed", l, config.k, penalty, wall_ms, queries.size());
                if (!best || row.recall > best->recall) best = row;
            }
            rows.push_back(*best);
        }
    }

    if (wants_post) {
        for (const std::uint32_t l : config.l_sweep) {
            const auto [agg, wall_ms] =
                run_filtered(*inputs.zero_index, WeightModel::zero(), l, true);
            rows.push_back(agg.finish("post", l, config.k, 0.0, wall_ms, queries.size()));
        }
    }

    if (config.unfiltered_check && inputs.unfiltered_gt) {
        require(inputs.weighted_index, "the weighted-build index (unfiltered check)");
        require(inputs.zero_index, "the zero-weight index (unfiltered check)");
        const std::pair<const GraphIndex*, const char*> sides[2] = {
            {inputs.weighted_index, "unfiltered_weighted"},
            {inputs.zero_index, "unfiltered_zero"},
        };
        for (const auto& [side_index, name] : sides) {
            for (const std::uint32_t l : config.l_sweep) {
                Aggregate agg;
                const auto start = Clock::now();
                for (std::size_t qi = 0; qi < queries.size(); ++qi) {
                    SearchParams params;
                    params.list_size = std::max(l, config.k);
                    params.k = config.k;
                    params.model = WeightModel::zero();
                    const SearchResult found =
                        side_index->search(data, queries[qi].vector, LabelSet{}, params);
                    PlanResult plan;
                    plan.route = Route::graph;
                    plan.ids = found.ids;
                    plan.comparisons = found.comparisons;
                    agg.add(recall_at_k(plan.ids, inputs.unfiltered_gt->rows[qi], config.k), plan);
                }
                const double wall_ms =
                    std::chrono::duration<double, std::milli>(Clock::now() - start).count();
                const double build_w =
                    side_index == inputs.weighted_index ? side_index->params().model.w_m : 0.0;
                rows.push_back(agg.finish(name, l, config.k, build_w, wall_ms, queries.size()));
            }
        }
    }

    return rows;
}

std::string to_csv(const std::vector<EvalRow>& rows) {
    std::ostringstream out;
    out << "method,L_search,k,recall_at_k,mean_comparisons,graph_routed,brute_routed,"
           "excluded_queries,w_m,wall_ms\n";
    out.setf(std::ios::fixed);
    for (const EvalRow& row : rows) {
        out.precision(6);
        out << row.method << ',' << row.l_search << ',' << row.k << ',' << row.recall << ',';
        out.precision(3);
        out << row.mean_comparisons << ',';
        out << row.graph_routed << ',' << row.brute_routed << ',' << row.excluded_queries << ',';
        out.precision(9);
        out << row.w_m << ',';
        out.precision(3);
        out << row.wall_ms << '\n';
    }
    return out.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << to_csv(rows);
}

}  // namespace fann
