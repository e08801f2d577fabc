// Copyright 2026 The uqwiz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UQWIZ_DATASET_H_
#define UQWIZ_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uqwiz/array.h"

namespace uqwiz {

// Labeled classification data: features (N x F) and labels in [0, num_classes).
struct Dataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return features.rows(); }
  // Rows [begin, begin + count).
  Dataset slice(std::size_t begin, std::size_t count) const;
};

// Gaussian clusters with standard deviation `spread` in `dims` dimensions.
// Class centers lie near a circle of radius 5 in the first two coordinates,
// at a seeded random rotation with seeded angular jitter; further coordinates
// are seeded uniform in [-2, 2]. Point i has label i % num_classes, so any
// contiguous slice is balanced within one point per class.
Dataset generate_blobs(std::size_t num_points, std::size_t num_classes, double spread,
                       std::uint64_t seed, std::size_t dims = 2);

struct CsvSchema {
  char delimiter = ',';
  std::string label_column = "label";
};

// Reads a CSV file with a header row whose last column is the label. Values
// are parsed as doubles; labels must be non-negative integers. Throws
// ParseError with 1-based file row/column, IoError when unreadable.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

}  // namespace uqwiz

#endif  // UQWIZ_DATASET_H_
