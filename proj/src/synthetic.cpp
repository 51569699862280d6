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
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fann/dataset.hpp"
#include "fann/error.hpp"
#include "fann/rng.hpp"

namespace fann {

namespace {

using nlohmann::json;

// Label ids are dealt to clusters round-robin, so every cluster pool mixes
// frequent and rare labels under the Zipf marginal.
std::vector<std::vector<std::uint32_t>> make_pools(std::uint32_t m, std::uint32_t clusters) {
    std::vector<std::vector<std::uint32_t>> pools(clusters);
    for (std::uint32_t label = 0; label < m; ++label) pools[label % clusters].push_back(label);
    return pools;
}

std::vector<double> zipf_weights(std::uint32_t m, double skew) {
    std::vector<double> w(m);
    for (std::uint32_t i = 0; i < m; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i) + 1.0, skew);
    return w;
}

std::vector<double> cumulative(const std::vector<std::uint32_t>& labels,
                               const std::vector<double>& weights) {
    std::vector<double> cum(labels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        total += weights[labels[i]];
        cum[i] = total;
    }
    return cum;
}

// Draw `count` distinct labels from `source` (categorical by `cum`), with a
// deterministic ascending-id fallback once rejection stops making progress.
void draw_distinct(Rng& rng, const std::vector<std::uint32_t>& source,
                   const std::vector<double>& cum, std::uint32_t count, LabelSet& out) {
    std::uint32_t drawn = 0;
    int stall = 0;
    while (drawn < count && stall < 64) {
        const std::uint32_t label = source[rng.next_categorical(cum)];
        if (std::find(out.begin(), out.end(), label) == out.end()) {
            out.push_back(label);
            ++drawn;
            stall = 0;
        } else {
            ++stall;
        }
    }
    for (std::size_t i = 0; drawn < count && i < source.size(); ++i) {
        if (std::find(out.begin(), out.end(), source[i]) == out.end()) {
            out.push_back(source[i]);
            ++drawn;
        }
    }
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n < 1 || d < 1 || m < 1 || cluster_count < 1 || query_count < 1)
        throw ValidationError("synthetic spec: all sizes must be >= 1");
    if (m < cluster_count)
        throw ValidationError("synthetic spec: label universe must cover every cluster pool");
    if (labels_per_point_min < 1 || labels_per_point_min > labels_per_point_max)
        throw ValidationError("synthetic spec: labels_per_point bounds invalid");
    if (labels_per_point_max > m)
        throw ValidationError("synthetic spec infeasible: labels_per_point_max " +
                              std::to_string(labels_per_point_max) + " exceeds label universe " +
                              std::to_string(m));
    if (query_labels_min < 1 || query_labels_min > query_labels_max || query_labels_max > m)
        throw ValidationError("synthetic spec: query label bounds invalid");
    if (label_cluster_correlation < 0.0 || label_cluster_correlation > 1.0)
        throw ValidationError("synthetic spec: label_cluster_correlation must be in [0,1]");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("synthetic spec: train_fraction must be in (0,1)");
    if (label_skew < 0.0) throw ValidationError("synthetic spec: label_skew must be >= 0");
    if (adversarial) {
        if (!(target_fraction > 0.0 && target_fraction <= 1.0))
            throw ValidationError("synthetic spec: target_fraction must be in (0,1]");
        if (m < 2 * cluster_count)
            throw ValidationError("synthetic spec: adversarial mode needs m >= 2 * cluster_count");
        if (labels_per_point_max > m - cluster_count)
            throw ValidationError(
                "synthetic spec infeasible: adversarial mode reserves one target label per cluster");
    }
}

SyntheticSpec SyntheticSpec::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synthetic spec: invalid JSON: ") + e.what());
    }
    SyntheticSpec spec;
    try {
        spec.n = j.value("n", spec.n);
        spec.d = j.value("d", spec.d);
        spec.m = j.value("m", spec.m);
        spec.label_skew = j.value("label_skew", spec.label_skew);
        spec.labels_per_point_min = j.value("labels_per_point_min", spec.labels_per_point_min);
        spec.labels_per_point_max = j.value("labels_per_point_max", spec.labels_per_point_max);
        spec.cluster_count = j.value("cluster_count", spec.cluster_count);
        spec.label_cluster_correlation =
            j.value("label_cluster_correlation", spec.label_cluster_correlation);
        spec.seed = j.value("seed", spec.seed);
        spec.metric = metric_from_name(j.value("metric", std::string(metric_name(spec.metric))));
        spec.query_count = j.value("query_count", spec.query_count);
        spec.query_labels_min = j.value("query_labels_min", spec.query_labels_min);
        spec.query_labels_max = j.value("query_labels_max", spec.query_labels_max);
        spec.train_fraction = j.value("train_fraction", spec.train_fraction);
        spec.cluster_center_scale = j.value("cluster_center_scale", spec.cluster_center_scale);
        spec.point_noise = j.value("point_noise", spec.point_noise);
        spec.query_noise = j.value("query_noise", spec.query_noise);
        spec.adversarial = j.value("adversarial", spec.adversarial);
        spec.target_fraction = j.value("target_fraction", spec.target_fraction);
        spec.target_offset = j.value("target_offset", spec.target_offset);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synthetic spec: bad field type: ") + e.what());
    }
    spec.validate();
    return spec;
}

SyntheticSpec SyntheticSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open synthetic spec " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

SyntheticOutput generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    const std::uint32_t clusters = spec.cluster_count;
    std::vector<double> centers(static_cast<std::size_t>(clusters) * spec.d);
    for (double& c : centers) c = spec.cluster_center_scale * rng.next_normal();

    // Unit displacement direction per cluster; only used in adversarial mode
    // but always drawn so both modes consume the same stream prefix.
    std::vector<double> offsets(static_cast<std::size_t>(clusters) * spec.d);
    for (std::uint32_t c = 0; c < clusters; ++c) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < spec.d; ++j) {
            const double v = rng.next_normal();
            offsets[c * spec.d + j] = v;
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        for (std::size_t j = 0; j < spec.d; ++j)
            offsets[c * spec.d + j] = norm > 0.0 ? offsets[c * spec.d + j] / norm : 0.0;
    }

    const std::vector<double> weights = zipf_weights(spec.m, spec.label_skew);
    auto pools = make_pools(spec.m, clusters);

    // Adversarial mode reserves the rarest label of each pool for displaced
    // "target" points; regular draws never produce a reserved label.
    std::vector<std::uint32_t> target_label(clusters, 0);
    if (spec.adversarial) {
        for (std::uint32_t c = 0; c < clusters; ++c) {
            target_label[c] = pools[c].back();
            pools[c].pop_back();
        }
    }
    std::vector<std::uint32_t> global_pool;
    for (const auto& pool : pools) global_pool.insert(global_pool.end(), pool.begin(), pool.end());
    std::sort(global_pool.begin(), global_pool.end());

    std::vector<std::vector<double>> pool_cum(clusters);
    for (std::uint32_t c = 0; c < clusters; ++c) pool_cum[c] = cumulative(pools[c], weights);
    const std::vector<double> global_cum = cumulative(global_pool, weights);

    VectorData data;
    data.n = spec.n;
    data.d = spec.d;
    data.values.resize(spec.n * spec.d);
    std::vector<LabelSet> labels(spec.n);

    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::uint32_t c = static_cast<std::uint32_t>(rng.next_below(clusters));
        const bool is_target = spec.adversarial && rng.next_double() < spec.target_fraction;
        for (std::size_t j = 0; j < spec.d; ++j) {
            double v = centers[c * spec.d + j] + spec.point_noise * rng.next_normal();
            if (is_target) v += spec.target_offset * offsets[c * spec.d + j];
            data.values[i * spec.d + j] = static_cast<float>(v);
        }

        const std::uint32_t span = spec.labels_per_point_max - spec.labels_per_point_min + 1;
        std::uint32_t count = spec.labels_per_point_min +
                              static_cast<std::uint32_t>(rng.next_below(span));
        LabelSet& set = labels[i];
        if (is_target) {
            set.push_back(target_label[c]);
            count = count > 0 ? count - 1 : 0;
        }
        const bool use_pool = rng.next_double() < spec.label_cluster_correlation;
        if (use_pool) {
            draw_distinct(rng, pools[c], pool_cum[c], count, set);
            // Pool exhausted: top up from the global pool.
            if (set.size() < (is_target ? count + 1 : count))
                draw_distinct(rng, global_pool, global_cum,
                              static_cast<std::uint32_t>((is_target ? count + 1 : count) - set.size()),
                              set);
        } else {
            draw_distinct(rng, global_pool, global_cum, count, set);
        }
        normalize_label_set(set);

        if (spec.metric == MetricKind::cosine) {
            double norm2 = 0.0;
            for (std::size_t j = 0; j < spec.d; ++j) {
                const double v = data.values[i * spec.d + j];
                norm2 += v * v;
            }
            if (norm2 == 0.0) data.values[i * spec.d] = 1e-3f;
        }
    }

    std::vector<FilteredQuery> queries(spec.query_count);
    for (std::size_t qi = 0; qi < spec.query_count; ++qi) {
        const std::uint32_t c = static_cast<std::uint32_t>(rng.next_below(clusters));
        FilteredQuery& q = queries[qi];
        q.id = static_cast<std::uint32_t>(qi);
        q.vector.resize(spec.d);
        for (std::size_t j = 0; j < spec.d; ++j)
            q.vector[j] =
                static_cast<float>(centers[c * spec.d + j] + spec.query_noise * rng.next_normal());
        if (spec.adversarial) {
            q.required_labels = {target_label[c]};
        } else {
            const std::uint32_t span = spec.query_labels_max - spec.query_labels_min + 1;
            const std::uint32_t count =
                spec.query_labels_min + static_cast<std::uint32_t>(rng.next_below(span));
            draw_distinct(rng, pools[c], pool_cum[c], std::min<std::uint32_t>(count, static_cast<std::uint32_t>(pools[c].size())), q.required_labels);
            normalize_label_set(q.required_labels);
            if (q.required_labels.empty()) q.required_labels = {pools[c].front()};
        }
        if (spec.metric == MetricKind::cosine) {
            double norm2 = 0.0;
            for (const float v : q.vector) norm2 += static_cast<double>(v) * v;
            if (norm2 == 0.0) q.vector[0] = 1e-3f;
        }
    }

    SyntheticOutput out;
    out.dataset = LabeledDataset::create(std::move(data), std::move(labels), spec.m, spec.metric);
    out.queries = std::move(queries);
    return out;
}

}  // namespace fann
