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

#include "fann/fingerprint.hpp"

#include <cstring>

#include <openssl/evp.h>

#include "fann/error.hpp"

namespace fann {

namespace {

struct Sha256 {
    EVP_MD_CTX* ctx;

    Sha256() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
            throw InvariantError("SHA-256 init failed");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx); }

    void update(const void* data, std::size_t len) {
        if (EVP_DigestUpdate(ctx, data, len) != 1) throw InvariantError("SHA-256 update failed");
    }

    void update_u32(std::uint32_t v) {
        const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                                   static_cast<std::uint8_t>(v >> 16),
                                   static_cast<std::uint8_t>(v >> 24)};
        update(b, 4);
    }

    Fingerprint finish() {
        Fingerprint out{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != out.size())
            throw InvariantError("SHA-256 final failed");
        return out;
    }
};

}  // namespace

Fingerprint dataset_fingerprint(const LabeledDataset& data) {
    Sha256 hash;
    hash.update("FANNDATA", 8);
    hash.update_u32(static_cast<std::uint32_t>(data.n));
    hash.update_u32(static_cast<std::uint32_t>(data.d));
    hash.update_u32(data.label_universe);
    hash.update_u32(static_cast<std::uint32_t>(data.metric));
    for (const float v : data.vectors) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        hash.update_u32(bits);
    }
    for (const LabelSet& set : data.labels) {
        hash.update_u32(static_cast<std::uint32_t>(set.size()));
        for (const std::uint32_t label : set) hash.update_u32(label);
    }
    return hash.finish();
}

}  // namespace fann
