#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smpcfl/nn.hpp"
#include "smpcfl/rng.hpp"

namespace smpcfl {

struct Dataset {
    std::vector<std::vector<double>> images; // row-major (h, w, 1), values in [0, 1]
    std::vector<int> labels;
    TensorShape shape{16, 16, 1};
    int num_classes = 0;

    std::size_t size() const { return images.size(); }
};

// Synthetic Gaussian-blob images: each class is a bright bump at a fixed,
// class-specific center plus pixel noise. Separable by construction.
Dataset make_blob_dataset(int classes, int per_class, double noise, std::uint64_t seed);

// Split into `parts` disjoint, label-balanced shards (even partition).
std::vector<Dataset> partition_dataset(const Dataset& d, int parts);

// Directory layout <root>/<class_label>/<sample>.pgm with binary PGM (P5),
// 16x16, 8-bit. Class labels are directory names in lexicographic order.
Dataset load_pgm_directory(const std::string& root);

void write_pgm(const std::string& path, const std::vector<double>& image, int h, int w);
std::vector<double> read_pgm(const std::string& path, int expect_h, int expect_w);

} // namespace smpcfl
