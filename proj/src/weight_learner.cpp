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

#include "fann/weight_learner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fann/error.hpp"
#include "fann/oracle.hpp"

namespace fann {

namespace {

using nlohmann::json;

double slack_at(const PreferenceTriplet& t, double w, double epsilon) {
    const double s = t.d_pos + epsilon - t.d_neg - w * (1.0 - t.m_neg);
    return s > 0.0 ? s : 0.0;
}

double violation_rate_at(const std::vector<PreferenceTriplet>& triplets, double w,
                         double epsilon) {
    if (triplets.empty()) return 0.0;
    std::size_t violated = 0;
    for (const PreferenceTriplet& t : triplets)
        if (slack_at(t, w, epsilon) > 0.0) ++violated;
    return static_cast<double>(violated) / static_cast<double>(triplets.size());
}

// Deterministic stride subsample keeping `keep` of `total` indices in order;
// the seed only rotates the stride phase.
std::vector<std::size_t> stride_sample(std::size_t total, std::size_t keep, std::uint64_t seed) {
    std::vector<std::size_t> indices;
    indices.reserve(keep);
    const std::size_t stride = total / keep;  // >= 1 since total > keep
    const std::size_t phase = stride > 1 ? static_cast<std::size_t>(seed % stride) : 0;
    for (std::size_t i = 0; i < keep; ++i) {
        std::size_t idx = phase + (i * total) / keep;
        if (idx >= total) idx = total - 1;
        indices.push_back(idx);
    }
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return indices;
}

}  // namespace

std::vector<PreferenceTriplet> extract_triplets(const LabeledDataset& data,
                                                const std::vector<FilteredQuery>& train_queries,
                                                const LearnerConfig& config,
                                                const GroundTruth* precomputed) {
    if (train_queries.empty())
        throw ValidationError("extract_triplets: training query set is empty");
    if (precomputed && precomputed->rows.size() != train_queries.size())
        throw ValidationError("extract_triplets: ground-truth row count does not match queries");

    std::vector<PreferenceTriplet> triplets;
    for (std::size_t qi = 0; qi < train_queries.size(); ++qi) {
        const FilteredQuery& q = train_queries[qi];
        if (q.required_labels.empty())
            throw ValidationError("extract_triplets: query " + std::to_string(q.id) +
                                  " has no required labels");

        // Unfiltered top-k with per-candidate (distance, match score).
        std::vector<OracleNeighbor> list;
        if (precomputed) {
            for (const GroundTruthEntry& e : precomputed->rows[qi]) {
                if (e.id >= data.n)
                    throw ValidationError("extract_triplets: ground-truth id out of range");
                list.push_back({e.id, static_cast<double>(e.distance),
                                query_match_score(q.required_labels, data.labels[e.id])});
            }
        } else {
            list = exact_unfiltered_topk(data, q.vector, q.required_labels,
                                         std::min<std::size_t>(config.learner_gt_k, data.n));
        }

        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].match != 1.0) continue;  // positives satisfy the filter exactly
            for (std::size_t j = 0; j < list.size(); ++j) {
                if (list[j].match >= 1.0) continue;
                if (!(list[j].raw_distance < list[i].raw_distance)) continue;
                triplets.push_back({q.id, list[i].raw_distance, 1.0, list[j].raw_distance,
                                    list[j].match});
            }
        }
    }

    if (config.max_triplets > 0 && triplets.size() > config.max_triplets) {
        const auto kept_indices =
            stride_sample(triplets.size(), config.max_triplets, config.subsample_seed);
        std::vector<PreferenceTriplet> kept;
        kept.reserve(kept_indices.size());
        for (const std::size_t idx : kept_indices) kept.push_back(triplets[idx]);
        triplets = std::move(kept);
    }
    return triplets;
}

ObjectiveStats objective_at(double w, const std::vector<PreferenceTriplet>& triplets, double alpha,
                            double epsilon) {
    if (triplets.empty()) throw ValidationError("objective_at: empty triplet list");
    if (w < 0.0) throw ValidationError("objective_at: w must be non-negative");
    double total_slack = 0.0;
    std::size_t violated = 0;
    for (const PreferenceTriplet& t : triplets) {
        const double s = slack_at(t, w, epsilon);
        total_slack += s;
        if (s > 0.0) ++violated;
    }
    const double count = static_cast<double>(triplets.size());
    ObjectiveStats stats;
    stats.mean_slack = total_slack / count;
    stats.objective = w + alpha * stats.mean_slack;
    stats.violation_rate = static_cast<double>(violated) / count;
    return stats;
}

double solve_w(const std::vector<PreferenceTriplet>& triplets, double alpha, double epsilon) {
    if (triplets.empty()) throw ValidationError("solve_w: empty triplet list");
    if (alpha <= 0.0) throw ValidationError("solve_w: alpha must be positive");

    // With m_pos pinned at 1, slack t is max(0, c_t - g_t * w) with
    // c_t = d_pos + eps - d_neg and g_t = 1 - m_neg > 0, so the objective is
    // convex piecewise-linear with one breakpoint c_t / g_t per triplet.
    struct Term {
        double breakpoint;
        double c;
        double g;
    };
    std::vector<Term> terms;
    terms.reserve(triplets.size());
    for (const PreferenceTriplet& t : triplets) {
        const double g = 1.0 - t.m_neg;
        if (g <= 0.0) throw InvariantError("solve_w: triplet with m_neg >= 1");
        const double c = t.d_pos + epsilon - t.d_neg;
        terms.push_back({c / g, c, g});
    }
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.breakpoint < b.breakpoint; });

    const double inv_count = 1.0 / static_cast<double>(terms.size());

    // Suffix sums over terms still active (breakpoint > w) let us evaluate the
    // objective at each candidate in O(1):
    //   F(w) = w + alpha/T * (sum_active c - w * sum_active g).
    std::vector<double> suffix_c(terms.size() + 1, 0.0), suffix_g(terms.size() + 1, 0.0);
    for (std::size_t i = terms.size(); i-- > 0;) {
        suffix_c[i] = suffix_c[i + 1] + terms[i].c;
        suffix_g[i] = suffix_g[i + 1] + terms[i].g;
    }

    auto evaluate = [&](double w, std::size_t first_active) {
        return w + alpha * inv_count * (suffix_c[first_active] - w * suffix_g[first_active]);
    };

    // Candidate w = 0: every term with positive breakpoint is active.
    std::size_t first_positive = 0;
    while (first_positive < terms.size() && terms[first_positive].breakpoint <= 0.0)
        ++first_positive;
    double best_w = 0.0;
    double best_objective = evaluate(0.0, first_positive);

    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double w = terms[i].breakpoint;
        if (w < 0.0) continue;
        // Equal breakpoints collapse to one candidate; evaluate at the last of
        // the run, where the whole run (slack exactly zero) is inactive.
        if (i + 1 < terms.size() && terms[i + 1].breakpoint == w) continue;
        const double objective = evaluate(w, i + 1);
        if (objective < best_objective) {
            best_objective = objective;
            best_w = w;
        }
    }
    return best_w;
}

LearnerReport grid_search_alpha(const std::vector<PreferenceTriplet>& triplets,
                                const LearnerConfig& config,
                                const std::vector<PreferenceTriplet>& validation) {
    if (config.alpha_grid.empty())
        throw ValidationError("grid_search_alpha: alpha grid must be nonempty");
    for (const double a : config.alpha_grid)
        if (a <= 0.0) throw ValidationError("grid_search_alpha: alpha values must be positive");
    if (config.epsilon <= 0.0) throw ValidationError("grid_search_alpha: epsilon must be positive");

    LearnerReport report;
    report.learner_gt_k = config.learner_gt_k;
    report.triplet_count = triplets.size();

    if (triplets.empty()) {
        // The filter is never binding: fall back to w = 0.
        report.model = WeightModel::learned(0.0, config.alpha_grid.front(), config.epsilon);
        report.warnings.push_back("no preference triplets extracted; returning w_m = 0");
        return report;
    }

    const bool has_validation = !validation.empty();
    if (!has_validation)
        report.warnings.push_back(
            "empty validation set; alpha selected on training violation rate");
    const std::vector<PreferenceTriplet>& holdout = has_validation ? validation : triplets;

    std::size_t best = 0;
    for (std::size_t ai = 0; ai < config.alpha_grid.size(); ++ai) {
        const double alpha = config.alpha_grid[ai];
        const double w = solve_w(triplets, alpha, config.epsilon);
        const ObjectiveStats stats = objective_at(w, triplets, alpha, config.epsilon);
        AlphaResult row;
        row.alpha = alpha;
        row.w_m = w;
        row.objective = stats.objective;
        row.mean_slack = stats.mean_slack;
        row.violation_rate = stats.violation_rate;
        row.validation_violation_rate = violation_rate_at(holdout, w, config.epsilon);
        report.per_alpha.push_back(row);

        const AlphaResult& champion = report.per_alpha[best];
        if (row.validation_violation_rate < champion.validation_violation_rate ||
            (row.validation_violation_rate == champion.validation_violation_rate &&
             row.w_m < champion.w_m)) {
            best = ai;
        }
    }

    const AlphaResult& chosen = report.per_alpha[best];
    report.model = WeightModel::learned(chosen.w_m, chosen.alpha, config.epsilon);
    report.objective = chosen.objective;
    report.mean_slack = chosen.mean_slack;
    report.violation_rate = chosen.violation_rate;
    return report;
}

LearnerReport learn_weights(const LabeledDataset& data,
                            const std::vector<FilteredQuery>& train_queries,
                            const LearnerConfig& config, const GroundTruth* precomputed) {
    // Hold out every validation_stride-th query before extraction so the
    // validation triplets come from unseen queries.
    std::vector<FilteredQuery> fit_queries, holdout_queries;
    std::vector<std::size_t> fit_rows, holdout_rows;
    for (std::size_t i = 0; i < train_queries.size(); ++i) {
        const bool holdout = config.validation_stride > 0 &&
                             train_queries.size() > config.validation_stride &&
                             i % config.validation_stride == config.validation_stride - 1;
        (holdout ? holdout_queries : fit_queries).push_back(train_queries[i]);
        (holdout ? holdout_rows : fit_rows).push_back(i);
    }
    if (fit_queries.empty()) {
        fit_queries = train_queries;
        holdout_queries.clear();
    }

    auto select_rows = [&](const std::vector<std::size_t>& rows) {
        GroundTruth subset;
        if (!precomputed) return subset;
        subset.mode = precomputed->mode;
        subset.k = precomputed->k;
        for (const std::size_t r : rows) subset.rows.push_back(precomputed->rows[r]);
        return subset;
    };

    const GroundTruth fit_gt = select_rows(fit_rows);
    const GroundTruth holdout_gt = select_rows(holdout_rows);

    const std::vector<PreferenceTriplet> triplets =
        extract_triplets(data, fit_queries, config, precomputed ? &fit_gt : nullptr);
    std::vector<PreferenceTriplet> validation;
    if (!holdout_queries.empty())
        validation =
            extract_triplets(data, holdout_queries, config, precomputed ? &holdout_gt : nullptr);

    LearnerReport report = grid_search_alpha(triplets, config, validation);
    report.metric = data.metric;
    return report;
}

std::string LearnerReport::to_json() const {
    json j;
    j["w_m"] = model.w_m;
    j["alpha"] = model.alpha_slack;
    j["epsilon"] = model.epsilon;
    j["metric_kind"] = metric_name(metric);
    j["triplet_count"] = triplet_count;
    j["violation_rate"] = violation_rate;
    j["mean_slack"] = mean_slack;
    j["objective"] = objective;
    j["learner_gt_k"] = learner_gt_k;
    j["warnings"] = warnings;
    j["per_alpha"] = json::array();
    for (const AlphaResult& row : per_alpha) {
        j["per_alpha"].push_back({{"alpha", row.alpha},
                                  {"w_m", row.w_m},
                                  {"objective", row.objective},
                                  {"mean_slack", row.mean_slack},
                                  {"violation_rate", row.violation_rate},
                                  {"validation_violation_rate", row.validation_violation_rate}});
    }
    return j.dump(2);
}

LearnerReport LearnerReport::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("weights file: invalid JSON: ") + e.what());
    }
    LearnerReport report;
    try {
        const double w = j.at("w_m").get<double>();
        const double alpha = j.value("alpha", 0.0);
        const double epsilon = j.value("epsilon", 0.01);
        report.model = WeightModel::learned(w, alpha, epsilon);
        report.metric = metric_from_name(j.value("metric_kind", std::string("euclidean")));
        report.triplet_count = j.value("triplet_count", std::size_t{0});
        report.violation_rate = j.value("violation_rate", 0.0);
        report.mean_slack = j.value("mean_slack", 0.0);
        report.objective = j.value("objective", 0.0);
        report.learner_gt_k = j.value("learner_gt_k", 0u);
        if (j.contains("warnings")) report.warnings = j["warnings"].get<std::vector<std::string>>();
        if (j.contains("per_alpha")) {
            for (const auto& row : j["per_alpha"]) {
                AlphaResult r;
                r.alpha = row.value("alpha", 0.0);
                r.w_m = row.value("w_m", 0.0);
                r.objective = row.value("objective", 0.0);
                r.mean_slack = row.value("mean_slack", 0.0);
                r.violation_rate = row.value("violation_rate", 0.0);
                r.validation_violation_rate = row.value("validation_violation_rate", 0.0);
                report.per_alpha.push_back(r);
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("weights file: bad field: ") + e.what());
    }
    return report;
}

LearnerReport LearnerReport::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open weights file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

void LearnerReport::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot write weights file " + path.string());
    out << to_json() << '\n';
}

}  // namespace fann
