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

#include "fann/graph_index.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>

#include "fann/error.hpp"
#include "fann/rng.hpp"

namespace fann {

namespace {

constexpr char kMagic[4] = {'F', 'A', 'N', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

double side_match(MatchSide side, const LabelSet& first, const LabelSet& second) {
    if (side == MatchSide::query)
        return first.empty() ? 1.0 : query_match_score(first, second);
    return label_match_score(first, second);
}

// Weighted distance between two stored points; the match score is normalized
// by the first point's label set (construction orientation).
double pair_distance(const LabeledDataset& data, std::uint32_t from, std::uint32_t to,
                     const WeightModel& model) {
    const double raw = vector_distance(data.point(from), data.point(to), data.metric);
    return raw + model.w_m * (1.0 - label_match_score(data.labels[from], data.labels[to]));
}

void insert_sorted_unique(std::vector<std::uint32_t>& list, std::uint32_t value) {
    const auto it = std::lower_bound(list.begin(), list.end(), value);
    if (it == list.end() || *it != value) list.insert(it, value);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in, const std::string& section) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ValidationError("index file truncated in section: " + section);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float read_f32(std::istream& in, const std::string& section) {
    const std::uint32_t bits = read_u32(in, section);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

std::uint32_t compute_medoid(const LabeledDataset& data, std::uint32_t exact_cap) {
    if (data.n == 0) throw ValidationError("compute_medoid: empty dataset");
    if (exact_cap < 1) throw ValidationError("compute_medoid: exact_cap must be >= 1");

    std::vector<std::uint32_t> candidates;
    if (data.n <= exact_cap) {
        candidates.resize(data.n);
        for (std::size_t i = 0; i < data.n; ++i) candidates[i] = static_cast<std::uint32_t>(i);
    } else {
        // Deterministic stride sample; both the candidate set and the
        // reference set are the sample.
        candidates.reserve(exact_cap);
        for (std::uint32_t i = 0; i < exact_cap; ++i)
            candidates.push_back(static_cast<std::uint32_t>(
                (static_cast<std::uint64_t>(i) * data.n) / exact_cap));
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }

    std::uint32_t best = candidates.front();
    double best_sum = std::numeric_limits<double>::infinity();
    for (const std::uint32_t i : candidates) {
        double sum = 0.0;
        for (const std::uint32_t j : candidates) {
            if (i == j) continue;
            sum += vector_distance(data.point(i), data.point(j), data.metric);
        }
        if (sum < best_sum) {
            best_sum = sum;
            best = i;
        }
    }
    return best;
}

std::map<std::uint32_t, std::uint32_t> compute_start_nodes(const LabeledDataset& data) {
    std::map<std::uint32_t, std::vector<std::uint32_t>> carriers;
    for (std::size_t i = 0; i < data.n; ++i)
        for (const std::uint32_t label : data.labels[i])
            carriers[label].push_back(static_cast<std::uint32_t>(i));

    std::map<std::uint32_t, std::uint32_t> start_nodes;
    std::vector<double> centroid(data.d);
    std::vector<float> centroid_f(data.d);
    for (const auto& [label, points] : carriers) {
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (const std::uint32_t p : points) {
            const auto row = data.point(p);
            for (std::size_t j = 0; j < data.d; ++j) centroid[j] += row[j];
        }
        for (std::size_t j = 0; j < data.d; ++j)
            centroid_f[j] = static_cast<float>(centroid[j] / static_cast<double>(points.size()));

        double norm2 = 0.0;
        for (const float v : centroid_f) norm2 += static_cast<double>(v) * v;
        if (data.metric == MetricKind::cosine && norm2 == 0.0) {
            // Degenerate centroid under cosine: fall back to the smallest id.
            start_nodes[label] = points.front();
            continue;
        }

        std::uint32_t best = points.front();
        double best_dist = std::numeric_limits<double>::infinity();
        for (const std::uint32_t p : points) {
            const double dist = vector_distance(centroid_f, data.point(p), data.metric);
            if (dist < best_dist) {
                best_dist = dist;
                best = p;
            }
        }
        start_nodes[label] = best;
    }
    return start_nodes;
}

SearchResult weighted_greedy_search(const std::vector<std::vector<std::uint32_t>>& adjacency,
                                    const LabeledDataset& data, std::span<const float> target,
                                    const LabelSet& target_labels,
                                    const std::vector<std::uint32_t>& entries, std::size_t k,
                                    std::size_t list_size, const WeightModel& model,
                                    MatchSide side) {
    if (entries.empty()) throw ValidationError("weighted_greedy_search: no entry points");
    if (list_size < std::max<std::size_t>(k, 1))
        throw ValidationError("weighted_greedy_search: list_size must be >= max(k, 1)");
    if (adjacency.size() != data.n)
        throw InvariantError("weighted_greedy_search: adjacency does not cover the dataset");

    struct Candidate {
        double dist;
        std::uint32_t id;
        bool expanded;
    };
    auto candidate_less = [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.id < b.id;
    };

    SearchResult result;
    ComparisonCounter counter;
    std::vector<Candidate> pool;
    pool.reserve(list_size + 1);
    std::vector<std::uint8_t> seen(data.n, 0);

    auto score = [&](std::uint32_t v) {
        const double raw = vector_distance(target, data.point(v), data.metric);
        const double match = side_match(side, target_labels, data.labels[v]);
        return weighted_distance(raw, match, model, counter);
    };

    auto offer = [&](std::uint32_t v) {
        const Candidate cand{score(v), v, false};
        const auto pos = std::lower_bound(pool.begin(), pool.end(), cand, candidate_less);
        if (pool.size() >= list_size) {
            if (pos == pool.end()) return;
            pool.insert(pos, cand);
            pool.pop_back();
        } else {
            pool.insert(pos, cand);
        }
    };

    for (const std::uint32_t e : entries) {
        if (e >= data.n)
            throw ValidationError("weighted_greedy_search: invalid entry id " + std::to_string(e));
        if (seen[e]) continue;
        seen[e] = 1;
        offer(e);
    }

    while (true) {
        auto next = std::find_if(pool.begin(), pool.end(),
                                 [](const Candidate& c) { return !c.expanded; });
        if (next == pool.end()) break;
        next->expanded = true;
        const std::uint32_t current = next->id;
        result.visited.push_back(current);
        for (const std::uint32_t u : adjacency[current]) {
            if (seen[u]) continue;
            seen[u] = 1;
            offer(u);
        }
    }

    const std::size_t take = std::min(k, pool.size());
    result.ids.reserve(take);
    result.distances.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        result.ids.push_back(pool[i].id);
        result.distances.push_back(pool[i].dist);
    }
    result.comparisons = counter.count;
    return result;
}

std::vector<std::uint32_t> robust_prune(std::uint32_t point,
                                        const std::vector<std::uint32_t>& candidates,
                                        float alpha_prune, std::uint32_t max_degree,
                                        const LabeledDataset& data, const WeightModel& model) {
    if (alpha_prune < 1.0f) throw ValidationError("robust_prune: alpha_prune must be >= 1");
    if (max_degree < 1) throw ValidationError("robust_prune: max_degree must be >= 1");

    struct Scored {
        double dist;
        std::uint32_t id;
    };
    std::vector<Scored> pool;
    pool.reserve(candidates.size());
    {
        std::vector<std::uint32_t> unique = candidates;
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        for (const std::uint32_t c : unique) {
            if (c == point) continue;
            if (c >= data.n) throw ValidationError("robust_prune: invalid candidate id");
            pool.push_back({pair_distance(data, point, c, model), c});
        }
    }
    std::sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.id < b.id;
    });

    std::vector<std::uint32_t> result;
    std::vector<std::uint8_t> alive(pool.size(), 1);
    for (std::size_t i = 0; i < pool.size() && result.size() < max_degree; ++i) {
        if (!alive[i]) continue;
        alive[i] = 0;
        result.push_back(pool[i].id);
        if (result.size() == max_degree) break;
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            if (!alive[j]) continue;
            const double tie_dist = pair_distance(data, pool[i].id, pool[j].id, model);
            if (static_cast<double>(alpha_prune) * tie_dist <= pool[j].dist) alive[j] = 0;
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

std::vector<std::uint32_t> GraphIndex::entry_points(const LabelSet& target_labels,
                                                    SearchParams::EntryMode mode) const {
    std::vector<std::uint32_t> entries;
    if (mode == SearchParams::EntryMode::label_starts) {
        for (const std::uint32_t label : target_labels) {
            const auto it = start_nodes_.find(label);
            if (it != start_nodes_.end()) entries.push_back(it->second);
        }
        entries.push_back(medoid_);
    } else {
        entries.push_back(medoid_);
    }
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    return entries;
}

GraphIndex GraphIndex::build(const LabeledDataset& data, const BuildParams& params) {
    if (data.n < 1) throw ValidationError("build: dataset is empty");
    if (params.max_degree < 1) throw ValidationError("build: max_degree must be >= 1");
    if (params.build_list_size < params.max_degree)
        throw ValidationError("build: build_list_size must be >= max_degree");
    if (params.alpha_prune < 1.0f) throw ValidationError("build: alpha_prune must be >= 1");
    if (params.model.w_m < 0.0) throw ValidationError("build: penalty weight must be >= 0");

    GraphIndex index;
    index.params_ = params;
    index.metric_ = data.metric;
    index.adjacency_.assign(data.n, {});
    index.medoid_ = compute_medoid(data, params.medoid_exact_cap);
    index.start_nodes_ = compute_start_nodes(data);
    index.fingerprint_ = dataset_fingerprint(data);

    std::vector<std::uint32_t> permutation(data.n);
    for (std::size_t i = 0; i < data.n; ++i) permutation[i] = static_cast<std::uint32_t>(i);
    Rng rng(params.seed);
    rng.shuffle(permutation);

    for (const std::uint32_t p : permutation) {
        std::vector<std::uint32_t> entries;
        for (const std::uint32_t label : data.labels[p]) {
            const auto it = index.start_nodes_.find(label);
            if (it != index.start_nodes_.end()) entries.push_back(it->second);
        }
        if (entries.empty()) entries.push_back(index.medoid_);
        std::sort(entries.begin(), entries.end());
        entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

        const SearchResult found =
            weighted_greedy_search(index.adjacency_, data, data.point(p), data.labels[p], entries,
                                   0, params.build_list_size, params.model, MatchSide::data);
        index.stats_.distance_comparisons += found.comparisons;

        index.adjacency_[p] = robust_prune(p, found.visited, params.alpha_prune,
                                           params.max_degree, data, params.model);

        for (const std::uint32_t j : index.adjacency_[p]) {
            insert_sorted_unique(index.adjacency_[j], p);
            if (index.adjacency_[j].size() > params.max_degree) {
                index.adjacency_[j] = robust_prune(j, index.adjacency_[j], params.alpha_prune,
                                                   params.max_degree, data, params.model);
            }
            assert(index.adjacency_[j].size() <= params.max_degree);
        }
        assert(index.adjacency_[p].size() <= params.max_degree);
    }

    index.patch_connectivity(data);
    return index;
}

void GraphIndex::patch_connectivity(const LabeledDataset& data) {
    // Heavy weighting can leave islands; give each one a direct medoid edge.
    // Patch edges are protected from eviction so later rounds cannot undo
    // earlier repairs.
    const std::uint32_t R = params_.max_degree;
    std::vector<std::uint8_t> protected_edge(data.n, 0);
    std::vector<std::uint8_t> reached(data.n, 0);

    auto bfs_from = [&](std::uint32_t source) {
        std::deque<std::uint32_t> queue;
        if (!reached[source]) {
            reached[source] = 1;
            queue.push_back(source);
        }
        while (!queue.empty()) {
            const std::uint32_t v = queue.front();
            queue.pop_front();
            for (const std::uint32_t u : adjacency_[v]) {
                if (reached[u]) continue;
                reached[u] = 1;
                queue.push_back(u);
            }
        }
    };

    constexpr std::uint32_t kMaxRounds = 16;
    for (std::uint32_t round = 0; round < kMaxRounds; ++round) {
        std::fill(reached.begin(), reached.end(), 0);
        bfs_from(medoid_);
        bool all_reached = true;
        bool gave_up = false;
        for (std::size_t u = 0; u < data.n && !gave_up; ++u) {
            if (reached[u]) continue;
            all_reached = false;
            stats_.patch_rounds = round + 1;
            auto& medoid_list = adjacency_[medoid_];
            if (std::binary_search(medoid_list.begin(), medoid_list.end(),
                                   static_cast<std::uint32_t>(u)))
                continue;
            if (medoid_list.size() >= R) {
                // Evict the weighted-farthest unprotected neighbor.
                std::ptrdiff_t evict = -1;
                double worst = -1.0;
                for (std::size_t e = 0; e < medoid_list.size(); ++e) {
                    if (protected_edge[medoid_list[e]]) continue;
                    const double dist = pair_distance(data, medoid_, medoid_list[e], params_.model);
                    if (dist > worst || (dist == worst && evict >= 0 &&
                                         medoid_list[e] > medoid_list[static_cast<std::size_t>(evict)])) {
                        worst = dist;
                        evict = static_cast<std::ptrdiff_t>(e);
                    }
                }
                if (evict < 0) {
                    gave_up = true;
                    break;
                }
                medoid_list.erase(medoid_list.begin() + evict);
            }
            insert_sorted_unique(medoid_list, static_cast<std::uint32_t>(u));
            protected_edge[u] = 1;
            ++stats_.patched_points;
            // The whole island hanging off u becomes reachable.
            bfs_from(static_cast<std::uint32_t>(u));
        }
        if (all_reached || gave_up) break;
    }

    std::fill(reached.begin(), reached.end(), 0);
    bfs_from(medoid_);
    stats_.unreachable_after_patch = 0;
    for (std::size_t u = 0; u < data.n; ++u)
        if (!reached[u]) ++stats_.unreachable_after_patch;
}

SearchResult GraphIndex::search(const LabeledDataset& data, std::span<const float> target,
                                const LabelSet& target_labels, const SearchParams& params) const {
    if (params.k < 1) throw ValidationError("search: k must be >= 1");
    if (params.list_size < params.k) throw ValidationError("search: list_size must be >= k");
    const std::vector<std::uint32_t> entries = entry_points(target_labels, params.entry_mode);
    return weighted_greedy_search(adjacency_, data, target, target_labels, entries, params.k,
                                  params.list_size, params.model, MatchSide::query);
}

void GraphIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write index file " + path.string());
    out.write(kMagic, 4);
    write_u32(out, kFormatVersion);
    write_u32(out, static_cast<std::uint32_t>(adjacency_.size()));
    write_u32(out, params_.max_degree);
    write_u32(out, params_.build_list_size);
    write_f32(out, params_.alpha_prune);
    write_f32(out, static_cast<float>(params_.model.w_m));
    out.put(static_cast<char>(metric_));
    write_u32(out, medoid_);
    write_u32(out, static_cast<std::uint32_t>(start_nodes_.size()));
    for (const auto& [label, start] : start_nodes_) {
        write_u32(out, label);
        write_u32(out, start);
    }
    out.write(reinterpret_cast<const char*>(fingerprint_.data()),
              static_cast<std::streamsize>(fingerprint_.size()));
    for (const auto& neighbors : adjacency_) {
        write_u32(out, static_cast<std::uint32_t>(neighbors.size()));
        for (const std::uint32_t id : neighbors) write_u32(out, id);
    }
    if (!out) throw ValidationError("write failed for index file " + path.string());
}

GraphIndex GraphIndex::load(const std::filesystem::path& path, const LabeledDataset& data) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open index file " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ValidationError(path.string() + ": bad magic in section: header");
    const std::uint32_t version = read_u32(in, "header");
    if (version != kFormatVersion)
        throw ValidationError(path.string() + ": unsupported index version " +
                              std::to_string(version));
    const std::uint32_t n = read_u32(in, "header");
    if (n != data.n)
        throw ValidationError(path.string() + ": index holds " + std::to_string(n) +
                              " points but dataset has " + std::to_string(data.n));

    GraphIndex index;
    index.params_.max_degree = read_u32(in, "build params");
    index.params_.build_list_size = read_u32(in, "build params");
    index.params_.alpha_prune = read_f32(in, "build params");
    const float w_m = read_f32(in, "build params");
    index.params_.model =
        w_m == 0.0f ? WeightModel::zero() : WeightModel::fixed(static_cast<double>(w_m));

    const int metric_byte = in.get();
    if (metric_byte == EOF) throw ValidationError(path.string() + ": index file truncated in section: metric");
    index.metric_ = static_cast<MetricKind>(metric_byte);
    if (index.metric_ != data.metric)
        throw ValidationError(path.string() + ": index metric does not match dataset metric");

    index.medoid_ = read_u32(in, "medoid");
    const std::uint32_t label_count = read_u32(in, "start nodes");
    for (std::uint32_t i = 0; i < label_count; ++i) {
        const std::uint32_t label = read_u32(in, "start nodes");
        const std::uint32_t start = read_u32(in, "start nodes");
        index.start_nodes_[label] = start;
    }

    in.read(reinterpret_cast<char*>(index.fingerprint_.data()),
            static_cast<std::streamsize>(index.fingerprint_.size()));
    if (!in) throw ValidationError(path.string() + ": index file truncated in section: fingerprint");
    if (index.fingerprint_ != dataset_fingerprint(data))
        throw ValidationError(path.string() + ": dataset fingerprint mismatch");

    index.adjacency_.resize(n);
    for (std::uint32_t p = 0; p < n; ++p) {
        const std::uint32_t degree = read_u32(in, "adjacency");
        if (degree > index.params_.max_degree)
            throw ValidationError(path.string() + ": degree bound violated in section: adjacency");
        auto& list = index.adjacency_[p];
        list.resize(degree);
        for (std::uint32_t j = 0; j < degree; ++j) {
            list[j] = read_u32(in, "adjacency");
            if (list[j] >= n || list[j] == p)
                throw ValidationError(path.string() + ": invalid neighbor id in section: adjacency");
        }
    }
    return index;
}

}  // namespace fann
