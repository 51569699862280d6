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

#include "fann/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "fann/error.hpp"
#include "fann/rng.hpp"

namespace fann {

namespace {

constexpr std::uint32_t kPadId = 0xFFFFFFFFu;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in, std::uint64_t offset, const std::string& what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw ValidationError("truncated file: expected " + what + " at byte offset " +
                              std::to_string(offset));
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float read_f32(std::istream& in, std::uint64_t offset, const std::string& what) {
    const std::uint32_t bits = read_u32(in, offset, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

}  // namespace

LabeledDataset LabeledDataset::create(VectorData vectors, std::vector<LabelSet> labels,
                                      std::optional<std::uint32_t> label_universe,
                                      MetricKind metric) {
    if (vectors.n < 1 || vectors.d < 1)
        throw ValidationError("dataset requires N >= 1 and d >= 1");
    if (labels.size() != vectors.n)
        throw ValidationError("label count " + std::to_string(labels.size()) +
                              " does not match point count " + std::to_string(vectors.n));

    std::uint32_t max_label_plus_one = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const LabelSet& set = labels[i];
        for (std::size_t j = 0; j + 1 < set.size(); ++j) {
            if (set[j] >= set[j + 1])
                throw ValidationError("label set of point " + std::to_string(i) +
                                      " is not strictly increasing");
        }
        if (!set.empty()) max_label_plus_one = std::max(max_label_plus_one, set.back() + 1);
    }
    std::uint32_t m = max_label_plus_one;
    if (label_universe) {
        if (*label_universe < max_label_plus_one)
            throw ValidationError("configured label universe " + std::to_string(*label_universe) +
                                  " is smaller than observed " + std::to_string(max_label_plus_one));
        m = *label_universe;
    }

    for (std::size_t i = 0; i < vectors.values.size(); ++i) {
        if (!std::isfinite(vectors.values[i]))
            throw ValidationError("non-finite vector entry at flat index " + std::to_string(i));
    }
    if (metric == MetricKind::cosine) {
        for (std::size_t i = 0; i < vectors.n; ++i) {
            double norm2 = 0.0;
            for (const float x : vectors.row(i)) norm2 += static_cast<double>(x) * x;
            if (norm2 == 0.0)
                throw ValidationError("point " + std::to_string(i) +
                                      " has zero norm; invalid under cosine metric");
        }
    }

    LabeledDataset ds;
    ds.n = vectors.n;
    ds.d = vectors.d;
    ds.vectors = std::move(vectors.values);
    ds.labels = std::move(labels);
    ds.label_universe = m;
    ds.metric = metric;
    return ds;
}

VectorData load_vectors(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    const std::uint64_t file_size = std::filesystem::file_size(path);
    const std::uint32_t n = read_u32(in, 0, "u32 point count");
    const std::uint32_t d = read_u32(in, 4, "u32 dimension");
    if (n == 0) throw ValidationError(path.string() + ": zero point count in header at byte offset 0");
    if (d == 0) throw ValidationError(path.string() + ": zero dimension in header at byte offset 4");

    // Header counts must match the payload length exactly; checked before
    // allocating so a corrupt header cannot trigger a giant allocation.
    const std::uint64_t want = static_cast<std::uint64_t>(n) * d * sizeof(float);
    if (file_size < 8 + want)
        throw ValidationError(path.string() + ": truncated payload, header promises " +
                              std::to_string(want) +
                              " bytes after byte offset 8 but file ends at byte offset " +
                              std::to_string(file_size));
    if (file_size > 8 + want)
        throw ValidationError(path.string() + ": trailing bytes beyond byte offset " +
                              std::to_string(8 + want));

    VectorData data;
    data.n = n;
    data.d = d;
    data.values.resize(static_cast<std::size_t>(n) * d);
    in.read(reinterpret_cast<char*>(data.values.data()),
            static_cast<std::streamsize>(data.values.size() * sizeof(float)));
    if (static_cast<std::uint64_t>(in.gcount()) != want)
        throw ValidationError(path.string() + ": short read at byte offset " +
                              std::to_string(8 + static_cast<std::uint64_t>(in.gcount())));

    for (std::size_t i = 0; i < data.values.size(); ++i) {
        if (!std::isfinite(data.values[i])) {
            const std::uint64_t offset = 8 + i * sizeof(float);
            throw ValidationError(path.string() + ": non-finite value at byte offset " +
                                  std::to_string(offset) + " (row " + std::to_string(i / d) +
                                  ", col " + std::to_string(i % d) + ")");
        }
    }
    return data;
}

void save_vectors(const std::filesystem::path& path, const VectorData& data) {
    if (data.values.size() != data.n * data.d)
        throw InvariantError("save_vectors: payload size does not match header");
    std::ofstream out = open_output(path);
    write_u32(out, static_cast<std::uint32_t>(data.n));
    write_u32(out, static_cast<std::uint32_t>(data.d));
    for (const float v : data.values) write_f32(out, v);
    if (!out) throw ValidationError("write failed for " + path.string());
}

std::vector<LabelSet> load_labels(const std::filesystem::path& path, std::size_t expected_n) {
    std::ifstream in = open_input(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    // A trailing newline produces one final empty fragment, not a data line.
    if (!lines.empty() && lines.back().empty() && !text.empty() && text.back() == '\n')
        lines.pop_back();

    if (lines.size() != expected_n)
        throw ValidationError(path.string() + ": expected " + std::to_string(expected_n) +
                              " label lines, found " + std::to_string(lines.size()));

    std::vector<LabelSet> result(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        LabelSet set;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string token =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
                throw ValidationError(path.string() + ": line " + std::to_string(i + 1) +
                                      ": invalid label token '" + token + "'");
            unsigned long long value = 0;
            try {
                value = std::stoull(token);
            } catch (const std::exception&) {
                throw ValidationError(path.string() + ": line " + std::to_string(i + 1) +
                                      ": invalid label token '" + token + "'");
            }
            if (value > std::numeric_limits<std::uint32_t>::max())
                throw ValidationError(path.string() + ": line " + std::to_string(i + 1) +
                                      ": label id " + token + " out of range");
            set.push_back(static_cast<std::uint32_t>(value));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        normalize_label_set(set);
        result[i] = std::move(set);
    }
    return result;
}

void save_labels(const std::filesystem::path& path, const std::vector<LabelSet>& labels) {
    std::ofstream out = open_output(path);
    for (const LabelSet& set : labels) {
        for (std::size_t j = 0; j < set.size(); ++j) {
            if (j) out << ',';
            out << set[j];
        }
        out << '\n';
    }
    if (!out) throw ValidationError("write failed for " + path.string());
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    const std::uint32_t num_queries = read_u32(in, 0, "u32 query count");
    const std::uint32_t k = read_u32(in, 4, "u32 k");
    GroundTruth gt;
    gt.k = k;
    gt.rows.resize(num_queries);
    std::uint64_t offset = 8;
    std::uint32_t filtered_pad = 0;
    for (std::uint32_t q = 0; q < num_queries; ++q) {
        std::vector<std::uint32_t> ids(k);
        for (std::uint32_t j = 0; j < k; ++j, offset += 4)
            ids[j] = read_u32(in, offset, "neighbor id");
        std::vector<float> dists(k);
        for (std::uint32_t j = 0; j < k; ++j, offset += 4)
            dists[j] = read_f32(in, offset, "neighbor distance");
        auto& row = gt.rows[q];
        for (std::uint32_t j = 0; j < k; ++j) {
            if (ids[j] == kPadId) {
                ++filtered_pad;
                continue;
            }
            row.push_back({ids[j], dists[j]});
        }
    }
    // The mode byte trails the payload; older files without it are filtered
    // when any row is short.
    char mode_byte;
    if (in.read(&mode_byte, 1); in.gcount() == 1) {
        gt.mode = mode_byte == 1 ? GroundTruthMode::unfiltered_exact : GroundTruthMode::filtered_exact;
    } else {
        gt.mode = filtered_pad > 0 ? GroundTruthMode::filtered_exact : GroundTruthMode::unfiltered_exact;
    }
    return gt;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
    std::ofstream out = open_output(path);
    write_u32(out, static_cast<std::uint32_t>(gt.rows.size()));
    write_u32(out, gt.k);
    for (const auto& row : gt.rows) {
        if (row.size() > gt.k) throw InvariantError("ground-truth row longer than k");
        for (std::size_t j = 0; j < gt.k; ++j)
            write_u32(out, j < row.size() ? row[j].id : kPadId);
        for (std::size_t j = 0; j < gt.k; ++j)
            write_f32(out, j < row.size() ? row[j].distance
                                          : std::numeric_limits<float>::infinity());
    }
    const char mode_byte = gt.mode == GroundTruthMode::unfiltered_exact ? 1 : 0;
    out.write(&mode_byte, 1);
    if (!out) throw ValidationError("write failed for " + path.string());
}

std::vector<FilteredQuery> load_queries(const std::filesystem::path& vector_path,
                                        const std::filesystem::path& label_path,
                                        bool require_labels) {
    VectorData vectors = load_vectors(vector_path);
    std::vector<LabelSet> labels = load_labels(label_path, vectors.n);
    std::vector<FilteredQuery> queries(vectors.n);
    for (std::size_t i = 0; i < vectors.n; ++i) {
        if (require_labels && labels[i].empty())
            throw ValidationError(label_path.string() + ": query " + std::to_string(i) +
                                  " has an empty label set; filtered queries require labels");
        queries[i].id = static_cast<std::uint32_t>(i);
        auto row = vectors.row(i);
        queries[i].vector.assign(row.begin(), row.end());
        queries[i].required_labels = std::move(labels[i]);
    }
    return queries;
}

void save_queries(const std::filesystem::path& vector_path,
                  const std::filesystem::path& label_path,
                  const std::vector<FilteredQuery>& queries) {
    if (queries.empty()) throw ValidationError("cannot save an empty query set");
    VectorData data;
    data.n = queries.size();
    data.d = queries.front().vector.size();
    data.values.reserve(data.n * data.d);
    std::vector<LabelSet> labels;
    labels.reserve(queries.size());
    for (const FilteredQuery& q : queries) {
        if (q.vector.size() != data.d) throw ValidationError("inconsistent query dimensions");
        data.values.insert(data.values.end(), q.vector.begin(), q.vector.end());
        labels.push_back(q.required_labels);
    }
    save_vectors(vector_path, data);
    save_labels(label_path, labels);
}

std::pair<std::vector<FilteredQuery>, std::vector<FilteredQuery>> split_queries(
    const std::vector<FilteredQuery>& queries, double train_fraction, std::uint64_t seed) {
    if (queries.size() < 2) throw ValidationError("split_queries requires at least 2 queries");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_fraction must be in (0, 1)");

    const std::size_t n = queries.size();
    std::size_t train_count =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    train_count = std::clamp<std::size_t>(train_count, 1, n - 1);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::size_t> train_idx(order.begin(), order.begin() + train_count);
    std::vector<std::size_t> eval_idx(order.begin() + train_count, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(eval_idx.begin(), eval_idx.end());

    std::pair<std::vector<FilteredQuery>, std::vector<FilteredQuery>> result;
    result.first.reserve(train_idx.size());
    result.second.reserve(eval_idx.size());
    for (const std::size_t i : train_idx) result.first.push_back(queries[i]);
    for (const std::size_t i : eval_idx) result.second.push_back(queries[i]);
    return result;
}

}  // namespace fann
