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
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fann/dataset.hpp"
#include "fann/error.hpp"
#include "fann/eval.hpp"
#include "fann/graph_index.hpp"
#include "fann/oracle.hpp"
#include "fann/planner.hpp"
#include "fann/weight_learner.hpp"

namespace {

using namespace fann;

std::vector<double> parse_double_csv(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        if (token.empty()) continue;
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ValidationError("invalid number '" + token + "' in list");
        }
    }
    if (values.empty()) throw ValidationError("empty numeric list");
    return values;
}

std::vector<std::uint32_t> parse_u32_csv(const std::string& text) {
    std::vector<std::uint32_t> values;
    for (const double v : parse_double_csv(text)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::uint32_t>(v)))
            throw ValidationError("expected non-negative integers in list");
        values.push_back(static_cast<std::uint32_t>(v));
    }
    return values;
}

std::vector<std::string> parse_string_csv(const std::string& text) {
    std::vector<std::string> values;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ','))
        if (!token.empty()) values.push_back(token);
    return values;
}

LabeledDataset load_dataset(const std::string& vectors_path, const std::string& labels_path,
                            const std::string& metric, std::optional<std::uint32_t> m) {
    VectorData vectors = load_vectors(vectors_path);
    std::vector<LabelSet> labels = load_labels(labels_path, vectors.n);
    return LabeledDataset::create(std::move(vectors), std::move(labels), m,
                                  metric_from_name(metric));
}

WeightModel load_weight_model(const std::string& spec) {
    if (spec == "zero") return WeightModel::zero();
    return LearnerReport::from_json_file(spec).model;
}

int run_gen_synthetic(const std::string& spec_path, const std::string& out_dir) {
    const SyntheticSpec spec = SyntheticSpec::from_json_file(spec_path);
    const SyntheticOutput out = generate_synthetic(spec);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    VectorData vectors;
    vectors.n = out.dataset.n;
    vectors.d = out.dataset.d;
    vectors.values = out.dataset.vectors;
    save_vectors(dir / "vectors.fbin", vectors);
    save_labels(dir / "labels.txt", out.dataset.labels);

    const auto [train, eval] = split_queries(out.queries, spec.train_fraction, spec.seed);
    save_queries(dir / "queries_train.fbin", dir / "queries_train_labels.txt", train);
    save_queries(dir / "queries_eval.fbin", dir / "queries_eval_labels.txt", eval);

    nlohmann::json meta;
    meta["n"] = out.dataset.n;
    meta["d"] = out.dataset.d;
    meta["m"] = out.dataset.label_universe;
    meta["metric"] = metric_name(out.dataset.metric);
    meta["query_count"] = out.queries.size();
    meta["train_count"] = train.size();
    meta["eval_count"] = eval.size();
    meta["seed"] = spec.seed;
    meta["adversarial"] = spec.adversarial;
    std::ofstream meta_out(dir / "meta.json");
    meta_out << meta.dump(2) << '\n';

    std::cout << "wrote " << out.dataset.n << " points (d=" << out.dataset.d
              << ", m=" << out.dataset.label_universe << "), " << train.size() << " train / "
              << eval.size() << " eval queries to " << dir << "\n";
    return kExitOk;
}

int run_ground_truth(const std::string& vectors_path, const std::string& labels_path,
                     const std::string& query_vectors, const std::string& query_labels,
                     const std::string& mode, std::uint32_t k, const std::string& metric,
                     std::optional<std::uint32_t> m, const std::string& out_path) {
    const LabeledDataset data = load_dataset(vectors_path, labels_path, metric, m);
    const bool filtered = mode == "filtered";
    const auto queries = load_queries(query_vectors, query_labels, filtered);
    const GroundTruth gt = build_ground_truth(
        data, queries, k,
        filtered ? GroundTruthMode::filtered_exact : GroundTruthMode::unfiltered_exact);
    save_ground_truth(out_path, gt);

    std::size_t empty_rows = 0;
    for (const auto& row : gt.rows)
        if (row.empty()) ++empty_rows;
    std::cout << "wrote " << mode << " ground truth (k=" << k << ") for " << queries.size()
              << " queries to " << out_path;
    if (filtered) std::cout << "; " << empty_rows << " queries have no satisfying point";
    std::cout << "\n";
    return kExitOk;
}

int run_learn_weights(const std::string& vectors_path, const std::string& labels_path,
                      const std::string& query_vectors, const std::string& query_labels,
                      const std::string& gt_path, double epsilon, const std::string& alpha_grid,
                      std::uint32_t learner_gt_k, std::size_t max_triplets,
                      const std::string& metric, std::optional<std::uint32_t> m,
                      const std::string& out_path) {
    const LabeledDataset data = load_dataset(vectors_path, labels_path, metric, m);
    const auto queries = load_queries(query_vectors, query_labels, true);

    LearnerConfig config;
    config.epsilon = epsilon;
    config.alpha_grid = parse_double_csv(alpha_grid);
    config.learner_gt_k = learner_gt_k;
    config.max_triplets = max_triplets;

    LearnerReport report;
    if (!gt_path.empty()) {
        const GroundTruth gt = load_ground_truth(gt_path);
        if (gt.mode != GroundTruthMode::unfiltered_exact)
            throw ValidationError("learn-weights requires unfiltered ground truth");
        report = learn_weights(data, queries, config, &gt);
    } else {
        report = learn_weights(data, queries, config);
    }
    report.save(out_path);

    std::cout << "learned w_m=" << report.model.w_m << " (alpha=" << report.model.alpha_slack
              << ", epsilon=" << report.model.epsilon << ") from " << report.triplet_count
              << " triplets; violation rate " << report.violation_rate << "; wrote " << out_path
              << "\n";
    for (const std::string& warning : report.warnings)
        std::cerr << "warning: " << warning << "\n";
    return kExitOk;
}

int run_build(const std::string& vectors_path, const std::string& labels_path,
              std::uint32_t max_degree, std::uint32_t list_size, float alpha_prune,
              const std::string& weights, std::uint64_t seed, const std::string& metric,
              std::optional<std::uint32_t> m, const std::string& out_path) {
    const LabeledDataset data = load_dataset(vectors_path, labels_path, metric, m);
    BuildParams params;
    params.max_degree = max_degree;
    params.build_list_size = list_size;
    params.alpha_prune = alpha_prune;
    params.model = load_weight_model(weights);
    params.seed = seed;

    const GraphIndex index = GraphIndex::build(data, params);
    index.save(out_path);

    const BuildStats& stats = index.stats();
    std::cout << "built index over " << data.n << " points (R=" << max_degree
              << ", L=" << list_size << ", alpha_prune=" << alpha_prune
              << ", w_m=" << params.model.w_m << "); medoid " << index.medoid() << ", "
              << index.start_nodes().size() << " start nodes, " << stats.patched_points
              << " connectivity patches; wrote " << out_path << "\n";
    if (stats.unreachable_after_patch > 0)
        std::cerr << "warning: " << stats.unreachable_after_patch
                  << " points unreachable after patching\n";
    return kExitOk;
}

int run_eval(const std::string& vectors_path, const std::string& labels_path,
             const std::string& query_vectors, const std::string& query_labels,
             const std::string& gt_path, const std::string& unfiltered_gt_path,
             const std::string& weights, const std::string& index_weighted,
             const std::string& index_zero, const std::string& methods,
             const std::string& l_sweep, std::uint32_t k, std::uint64_t threshold,
             double sample_fraction, std::uint64_t seed, const std::string& fixed_penalties,
             double over_provision, const std::string& metric, std::optional<std::uint32_t> m,
             const std::string& out_path) {
    const LabeledDataset data = load_dataset(vectors_path, labels_path, metric, m);
    const auto queries = load_queries(query_vectors, query_labels, true);

    BenchmarkConfig config;
    config.methods = parse_string_csv(methods);
    config.l_sweep = parse_u32_csv(l_sweep);
    config.k = k;
    config.fixed_penalties = parse_double_csv(fixed_penalties);
    config.planner.selectivity_threshold = threshold;
    config.planner.sample_fraction = sample_fraction;
    config.planner.seed = seed;
    config.post_over_provision = over_provision;

    BenchmarkInputs inputs;
    inputs.data = &data;
    inputs.queries = &queries;

    GroundTruth filtered_gt;
    if (!gt_path.empty()) {
        filtered_gt = load_ground_truth(gt_path);
        inputs.filtered_gt = &filtered_gt;
    }
    GroundTruth unfiltered_gt;
    if (!unfiltered_gt_path.empty()) {
        unfiltered_gt = load_ground_truth(unfiltered_gt_path);
        inputs.unfiltered_gt = &unfiltered_gt;
    }

    const bool wants_integrated =
        std::count(config.methods.begin(), config.methods.end(), std::string("integrated")) > 0;
    if (weights.empty() && wants_integrated)
        throw MissingArtifactError("eval with the integrated method requires --weights");
    if (!weights.empty()) inputs.learned = load_weight_model(weights);

    std::optional<GraphIndex> weighted_index, zero_index;
    if (!index_weighted.empty()) {
        weighted_index = GraphIndex::load(index_weighted, data);
        inputs.weighted_index = &*weighted_index;
    }
    if (!index_zero.empty()) {
        zero_index = GraphIndex::load(index_zero, data);
        inputs.zero_index = &*zero_index;
    }

    const std::vector<EvalRow> rows = run_benchmark(inputs, config);
    write_csv(out_path, rows);

    // The CSV column set is fixed; the metric and run configuration live in a
    // sidecar so every result file records them.
    nlohmann::json meta;
    meta["metric"] = metric_name(data.metric);
    meta["w_m"] = inputs.learned.w_m;
    meta["threshold"] = threshold;
    meta["sample_fraction"] = sample_fraction;
    meta["seed"] = seed;
    meta["methods"] = config.methods;
    meta["l_sweep"] = config.l_sweep;
    meta["k"] = k;
    const std::filesystem::path meta_path =
        std::filesystem::path(out_path).replace_extension(".meta.json");
    std::ofstream meta_out(meta_path);
    meta_out << meta.dump(2) << '\n';

    std::cout << to_csv(rows);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << " (config in "
              << meta_path.string() << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"filter-aware approximate nearest neighbor search"};
    app.require_subcommand(1);

    std::string vectors_path, labels_path, query_vectors, query_labels;
    std::string metric = "euclidean";
    std::optional<std::uint32_t> label_universe;

    auto add_dataset_options = [&](CLI::App* cmd) {
        cmd->add_option("--vectors", vectors_path, "dataset vectors (fbin)")->required();
        cmd->add_option("--labels", labels_path, "dataset labels (one line per point)")->required();
        cmd->add_option("--metric", metric, "euclidean|cosine");
        cmd->add_option("--m", label_universe, "label universe override");
    };
    auto add_query_options = [&](CLI::App* cmd) {
        cmd->add_option("--query-vectors", query_vectors, "query vectors (fbin)")->required();
        cmd->add_option("--query-labels", query_labels, "query labels")->required();
    };

    auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic labeled dataset");
    std::string spec_path, out_dir;
    gen->add_option("--spec", spec_path, "synthetic spec (json)")->required();
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* gt = app.add_subcommand("ground-truth", "exact full-scan ground truth");
    std::string gt_mode = "filtered";
    std::uint32_t gt_k = 10;
    std::string gt_out;
    add_dataset_options(gt);
    add_query_options(gt);
    gt->add_option("--mode", gt_mode, "filtered|unfiltered")
        ->check(CLI::IsMember({"filtered", "unfiltered"}));
    gt->add_option("--k", gt_k, "neighbors per query");
    gt->add_option("--out", gt_out, "output file")->required();

    auto* learn = app.add_subcommand("learn-weights", "solve the penalty-weight program");
    std::string learn_gt_path, alpha_grid = "0.1,1,10,100,1000", learn_out;
    double epsilon = 0.01;
    std::uint32_t learner_gt_k = 100;
    std::size_t max_triplets = 1000000;
    add_dataset_options(learn);
    add_query_options(learn);
    learn->add_option("--gt", learn_gt_path,
                      "unfiltered ground truth for the training queries (computed in-process "
                      "when omitted)");
    learn->add_option("--epsilon", epsilon, "ranking margin");
    learn->add_option("--alpha-grid", alpha_grid, "comma-separated trade-off grid");
    learn->add_option("--learner-gt-k", learner_gt_k, "ground-truth depth");
    learn->add_option("--max-triplets", max_triplets, "triplet cap");
    learn->add_option("--out", learn_out, "weights json")->required();

    auto* build = app.add_subcommand("build", "build the graph index");
    std::uint32_t R = 32, L = 64;
    float alpha_prune = 1.2f;
    std::string weights = "zero", build_out;
    std::uint64_t build_seed = 0;
    add_dataset_options(build);
    build->add_option("--R", R, "max out-degree");
    build->add_option("--L", L, "build list size");
    build->add_option("--alpha-prune", alpha_prune, "prune slack factor");
    build->add_option("--weights", weights, "weights json path, or 'zero'");
    build->add_option("--seed", build_seed, "permutation seed");
    build->add_option("--out", build_out, "index file")->required();

    auto* eval = app.add_subcommand("eval", "three-way method comparison");
    std::string eval_gt, eval_unfiltered_gt, eval_weights, index_weighted, index_zero;
    std::string methods = "integrated,fixed,post", l_sweep = "10,20,50,100,200";
    std::string fixed_penalties = "0.1,0.3,1.0";
    std::uint32_t eval_k = 10;
    std::uint64_t threshold = 100000, eval_seed = 0;
    double sample_fraction = 1.0, over_provision = 1.0;
    std::string eval_out = "results.csv";
    add_dataset_options(eval);
    add_query_options(eval);
    eval->add_option("--gt", eval_gt, "filtered ground truth for the eval queries");
    eval->add_option("--unfiltered-gt", eval_unfiltered_gt,
                     "unfiltered ground truth (enables the unfiltered-quality rows)");
    eval->add_option("--weights", eval_weights, "learned weights json, or 'zero'");
    eval->add_option("--index-weighted", index_weighted, "index built with the learned weight");
    eval->add_option("--index-zero", index_zero, "index built with w_m = 0");
    eval->add_option("--methods", methods, "subset of integrated,fixed,post");
    eval->add_option("--L-sweep", l_sweep, "search list sizes");
    eval->add_option("--k", eval_k, "recall depth");
    eval->add_option("--threshold", threshold, "selectivity threshold for brute-force routing");
    eval->add_option("--sample-fraction", sample_fraction, "selectivity sample fraction");
    eval->add_option("--seed", eval_seed, "selectivity sample seed");
    eval->add_option("--fixed-penalties", fixed_penalties, "fixed-penalty sweep");
    eval->add_option("--over-provision", over_provision, "post-filtering pool multiplier");
    eval->add_option("--out", eval_out, "results csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fann::kExitValidation;
    }

    try {
        if (gen->parsed()) return run_gen_synthetic(spec_path, out_dir);
        if (gt->parsed())
            return run_ground_truth(vectors_path, labels_path, query_vectors, query_labels,
                                    gt_mode, gt_k, metric, label_universe, gt_out);
        if (learn->parsed())
            return run_learn_weights(vectors_path, labels_path, query_vectors, query_labels,
                                     learn_gt_path, epsilon, alpha_grid, learner_gt_k,
                                     max_triplets, metric, label_universe, learn_out);
        if (build->parsed())
            return run_build(vectors_path, labels_path, R, L, alpha_prune, weights, build_seed,
                             metric, label_universe, build_out);
        if (eval->parsed())
            return run_eval(vectors_path, labels_path, query_vectors, query_labels, eval_gt,
                            eval_unfiltered_gt, eval_weights, index_weighted, index_zero, methods,
                            l_sweep, eval_k, threshold, sample_fraction, eval_seed,
                            fixed_penalties, over_provision, metric, label_universe, eval_out);
    } catch (const fann::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fann::kExitValidation;
    } catch (const fann::MissingArtifactError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fann::kExitMissingArtifact;
    } catch (const fann::InvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return fann::kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return fann::kExitInvariant;
    }
    return fann::kExitInvariant;
}
