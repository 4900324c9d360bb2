#include "smpcfl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "smpcfl/errors.hpp"

namespace fs = std::filesystem;

namespace smpcfl {

Dataset make_blob_dataset(int classes, int per_class, double noise, std::uint64_t seed) {
    if (classes < 2 || classes > 8) throw ConfigError("blob dataset supports 2..8 classes");
    if (per_class < 1) throw ConfigError("per_class must be positive");
    // Well-separated centers on a 16x16 canvas.
    static const int centers[8][2] = {{4, 4},  {11, 11}, {4, 11},  {11, 4},
                                      {4, 8},  {11, 8},  {8, 4},   {8, 11}};
    const int h = 16, w = 16;
    const double sigma = 2.0;
    Dataset d;
    d.shape = {16, 16, 1};
    d.num_classes = classes;
    Rng rng(seed);
    for (int c = 0; c < classes; ++c) {
        for (int s = 0; s < per_class; ++s) {
            std::vector<double> img(static_cast<std::size_t>(h) * w);
            const double cy = centers[c][0] + rng.normal(0.0, 0.4);
            const double cx = centers[c][1] + rng.normal(0.0, 0.4);
            const double amp = 0.85 + rng.normal(0.0, 0.05);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
                    double v = amp * std::exp(-d2 / (2 * sigma * sigma)) + rng.normal(0.0, noise);
                    img[static_cast<std::size_t>(y) * w + x] = std::clamp(v, 0.0, 1.0);
                }
            d.images.push_back(std::move(img));
            d.labels.push_back(c);
        }
    }
    // Deterministic shuffle so shards are label-mixed.
    std::vector<std::size_t> order(d.images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng.engine());
    Dataset out;
    out.shape = d.shape;
    out.num_classes = classes;
    for (std::size_t i : order) {
        out.images.push_back(std::move(d.images[i]));
        out.labels.push_back(d.labels[i]);
    }
    return out;
}

std::vector<Dataset> partition_dataset(const Dataset& d, int parts) {
    if (parts < 1) throw ConfigError("partition_dataset: parts must be positive");
    std::vector<Dataset> out(parts);
    for (auto& p : out) {
        p.shape = d.shape;
        p.num_classes = d.num_classes;
    }
    // Round-robin by class keeps shards balanced and disjoint.
    std::vector<int> seen_per_class(static_cast<std::size_t>(d.num_classes), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const int c = d.labels[i];
        const int p = seen_per_class[c]++ % parts;
        out[p].images.push_back(d.images[i]);
        out[p].labels.push_back(c);
    }
    for (const auto& p : out)
        if (p.images.empty()) throw ConfigError("partition_dataset: a shard came out empty");
    return out;
}

void write_pgm(const std::string& path, const std::vector<double>& image, int h, int w) {
    if (image.size() != static_cast<std::size_t>(h) * w) throw ConfigError("write_pgm: size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "P5\n" << w << " " << h << "\n255\n";
    for (double v : image) {
        const int g = std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255);
        os.put(static_cast<char>(g));
    }
}

std::vector<double> read_pgm(const std::string& path, int expect_h, int expect_w) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open PGM: " + path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw ConfigError("not a binary PGM (P5): " + path);
    int w = 0, h = 0, maxval = 0;
    is >> w >> h >> maxval;
    is.get(); // single whitespace after header
    if (w != expect_w || h != expect_h)
        throw ConfigError("PGM " + path + " is " + std::to_string(w) + "x" + std::to_string(h) +
                          ", expected " + std::to_string(expect_w) + "x" + std::to_string(expect_h));
    if (maxval != 255) throw ConfigError("PGM must be 8-bit (maxval 255): " + path);
    std::vector<double> img(static_cast<std::size_t>(w) * h);
    for (auto& v : img) {
        const int byte = is.get();
        if (byte < 0) throw ConfigError("PGM truncated: " + path);
        v = byte / 255.0;
    }
    return img;
}

Dataset load_pgm_directory(const std::string& root) {
    if (!fs::is_directory(root)) throw ConfigError("dataset root is not a directory: " + root);
    std::vector<std::string> class_dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) class_dirs.push_back(e.path().filename().string());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.size() < 2) throw ConfigError("dataset needs at least 2 class directories");

    Dataset d;
    d.shape = {16, 16, 1};
    d.num_classes = static_cast<int>(class_dirs.size());
    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(fs::path(root) / class_dirs[c]))
            if (e.is_regular_file() && e.path().extension() == ".pgm")
                files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            d.images.push_back(read_pgm(f, 16, 16));
            d.labels.push_back(static_cast<int>(c));
        }
    }
    if (d.images.empty()) throw ConfigError("no .pgm samples under " + root);
    return d;
}

} // namespace smpcfl
