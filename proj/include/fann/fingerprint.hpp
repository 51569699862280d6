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

#pragma once

#include <array>
#include <cstdint>

#include "fann/dataset.hpp"

namespace fann {

using Fingerprint = std::array<std::uint8_t, 32>;

// SHA-256 over a canonical serialization of the dataset (header, vector
// payload, label lists). Stored in index files to catch dataset mismatches.
Fingerprint dataset_fingerprint(const LabeledDataset& data);

}  // namespace fann
