#include "eeae/dataio.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <random>

namespace eeae {

namespace fs = std::filesystem;

void Dataset::validate() const {
    for (double v : examples.flat()) {
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("Dataset: entry " + std::to_string(v) + " outside [0,1]");
    }
    if (labels && labels->size() != examples.rows()) {
        throw DataError("Dataset: " + std::to_string(labels->size()) + " labels for " +
                        std::to_string(examples.rows()) + " rows");
    }
    if (image_shape && image_shape->height * image_shape->width != examples.cols()) {
        throw DataError("Dataset: image shape does not match row width");
    }
}

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const fs::path& path) {
    if (offset + 4 > bytes.size()) throw TruncatedError(path.string() + ": header truncated");
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                static_cast<char>(v)};
    out.write(b.data(), 4);
}

unsigned char quantize(double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

Dataset load_idx_images(const fs::path& image_path) {
    const auto bytes = read_file(image_path);
    const auto magic = read_be32(bytes, 0, image_path);
    if (magic != kImageMagic) {
        throw BadMagicError(image_path.string() + ": image magic " + std::to_string(magic) + ", expected 0x00000803");
    }
    const std::size_t count = read_be32(bytes, 4, image_path);
    const std::size_t h = read_be32(bytes, 8, image_path);
    const std::size_t w = read_be32(bytes, 12, image_path);
    const std::size_t need = 16 + count * h * w;
    if (bytes.size() < need) {
        throw TruncatedError(image_path.string() + ": " + std::to_string(bytes.size()) + " bytes, header promises " +
                             std::to_string(need));
    }
    Dataset d;
    d.examples = Matrix(count, h * w);
    auto dst = d.examples.flat();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<double>(bytes[16 + i]) / 255.0;
    d.image_shape = ImageShape{h, w};
    return d;
}

Dataset load_idx(const fs::path& image_path, const fs::path& label_path) {
    Dataset d = load_idx_images(image_path);
    const auto bytes = read_file(label_path);
    const auto magic = read_be32(bytes, 0, label_path);
    if (magic != kLabelMagic) {
        throw BadMagicError(label_path.string() + ": label magic " + std::to_string(magic) + ", expected 0x00000801");
    }
    const std::size_t count = read_be32(bytes, 4, label_path);
    if (bytes.size() < 8 + count) {
        throw TruncatedError(label_path.string() + ": " + std::to_string(bytes.size()) + " bytes, header promises " +
                             std::to_string(8 + count));
    }
    if (count != d.size()) {
        throw CountMismatchError(std::to_string(d.size()) + " images but " + std::to_string(count) + " labels");
    }
    d.labels = std::vector<int>(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count));
    return d;
}

void save_idx(const Dataset& dataset, const fs::path& image_path, const fs::path& label_path) {
    const ImageShape shape = dataset.image_shape.value_or(ImageShape{1, dataset.dim()});
    {
        std::ofstream out(image_path, std::ios::binary);
        if (!out) throw DataError("cannot write " + image_path.string());
        put_be32(out, kImageMagic);
        put_be32(out, static_cast<std::uint32_t>(dataset.size()));
        put_be32(out, static_cast<std::uint32_t>(shape.height));
        put_be32(out, static_cast<std::uint32_t>(shape.width));
        for (double v : dataset.examples.flat()) out.put(static_cast<char>(quantize(v)));
    }
    if (label_path.empty()) return;
    std::ofstream out(label_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + label_path.string());
    put_be32(out, kLabelMagic);
    put_be32(out, static_cast<std::uint32_t>(dataset.size()));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out.put(static_cast<char>(dataset.labels ? (*dataset.labels)[i] : 0));
    }
}

namespace {

struct Pgm {
    ImageShape shape;
    std::vector<double> pixels;
};

Pgm read_pgm(const fs::path& path) {
    const auto bytes = read_file(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> std::size_t {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw DataError(path.string() + ": malformed PGM header");
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw DataError(path.string() + ": not a binary PGM (P5)");
    pos = 2;
    Pgm pgm;
    pgm.shape.width = read_int();
    pgm.shape.height = read_int();
    const std::size_t maxval = read_int();
    if (maxval == 0 || maxval > 255) throw DataError(path.string() + ": unsupported max value " + std::to_string(maxval));
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DataError(path.string() + ": malformed PGM header");
    ++pos;
    const std::size_t count = pgm.shape.width * pgm.shape.height;
    if (bytes.size() - pos < count) throw TruncatedError(path.string() + ": pixel data truncated");
    pgm.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        pgm.pixels[i] = std::min(1.0, static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval));
    }
    return pgm;
}

}  // namespace

void save_pgm(const fs::path& path, std::span<const double> pixels, ImageShape shape) {
    if (pixels.size() != shape.height * shape.width) throw ShapeError("save_pgm: pixel count does not match shape");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P5\n" << shape.width << " " << shape.height << "\n255\n";
    for (double v : pixels) out.put(static_cast<char>(quantize(v)));
}

Dataset load_image_dir(const fs::path& root) {
    if (!fs::is_directory(root)) throw DataError(root.string() + ": not a directory");
    std::vector<fs::path> classes;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) classes.push_back(entry.path());
    }
    std::sort(classes.begin(), classes.end());

    std::vector<double> data;
    std::vector<int> labels;
    std::optional<ImageShape> shape;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(classes[c])) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const Pgm pgm = read_pgm(f);
            if (shape && !(*shape == pgm.shape)) {
                throw DataError(f.string() + ": size " + std::to_string(pgm.shape.height) + "x" +
                                std::to_string(pgm.shape.width) + " differs from " + std::to_string(shape->height) +
                                "x" + std::to_string(shape->width));
            }
            shape = pgm.shape;
            data.insert(data.end(), pgm.pixels.begin(), pgm.pixels.end());
            labels.push_back(static_cast<int>(c));
        }
    }
    Dataset d;
    const std::size_t dim = shape ? shape->height * shape->width : 0;
    d.examples = Matrix(labels.size(), dim, std::move(data));
    d.labels = std::move(labels);
    d.image_shape = shape;
    return d;
}

Dataset mirror(const Dataset& dataset) {
    if (!dataset.image_shape) throw DataError("mirror: dataset has no image shape");
    const auto [h, w] = *dataset.image_shape;
    Matrix flipped(dataset.size(), dataset.dim());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto src = dataset.examples.row(i);
        auto dst = flipped.row(i);
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < w; ++c) dst[r * w + c] = src[r * w + (w - 1 - c)];
        }
    }
    Dataset out;
    out.examples = vstack(dataset.examples, flipped);
    if (dataset.labels) {
        auto labels = *dataset.labels;
        labels.insert(labels.end(), dataset.labels->begin(), dataset.labels->end());
        out.labels = std::move(labels);
    }
    out.image_shape = dataset.image_shape;
    return out;
}

Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> rows) {
    Dataset out;
    out.examples = gather_rows(dataset.examples, rows);
    if (dataset.labels) {
        std::vector<int> labels;
        labels.reserve(rows.size());
        for (std::size_t r : rows) labels.push_back((*dataset.labels)[r]);
        out.labels = std::move(labels);
    }
    out.image_shape = dataset.image_shape;
    return out;
}

namespace {

std::map<int, std::vector<std::size_t>> rows_by_class(const Dataset& dataset) {
    if (!dataset.labels) throw DataError("per-class operation on an unlabeled dataset");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i) by_class[(*dataset.labels)[i]].push_back(i);
    return by_class;
}

}  // namespace

Split split_per_class(const Dataset& dataset, const SplitSpec& spec) {
    if (spec.per_class_train < 1) throw std::invalid_argument("split_per_class: per_class_train must be >= 1");
    const auto by_class = rows_by_class(dataset);
    std::mt19937_64 rng(spec.seed);
    Split split;
    for (const auto& [label, rows] : by_class) {
        if (rows.size() <= spec.per_class_train) {
            throw DataError("split_per_class: class " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                            " rows, needs more than " + std::to_string(spec.per_class_train));
        }
        auto shuffled = rows;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::vector<std::size_t> chosen(shuffled.begin(),
                                        shuffled.begin() + static_cast<std::ptrdiff_t>(spec.per_class_train));
        std::sort(chosen.begin(), chosen.end());
        split.train_source.insert(split.train_source.end(), chosen.begin(), chosen.end());
        for (std::size_t r : rows) {
            if (!std::binary_search(chosen.begin(), chosen.end(), r)) split.test_source.push_back(r);
        }
    }
    std::sort(split.test_source.begin(), split.test_source.end());
    split.train = select_rows(dataset, split.train_source);
    split.test = select_rows(dataset, split.test_source);
    if (spec.mirror_train) split.train = mirror(split.train);
    return split;
}

Dataset subsample_per_class(const Dataset& dataset, std::size_t per_class, std::uint64_t seed) {
    const auto by_class = rows_by_class(dataset);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> keep;
    for (const auto& [label, rows] : by_class) {
        auto shuffled = rows;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        shuffled.resize(std::min(per_class, shuffled.size()));
        keep.insert(keep.end(), shuffled.begin(), shuffled.end());
    }
    std::sort(keep.begin(), keep.end());
    return select_rows(dataset, keep);
}

Dataset synth_gaussian(std::size_t classes, std::size_t dim, std::size_t per_class, double spread,
                       std::uint64_t seed) {
    if (classes == 0 || dim == 0 || per_class == 0) throw std::invalid_argument("synth_gaussian: counts must be positive");
    if (!(spread > 0.0)) throw std::invalid_argument("synth_gaussian: spread must be > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(0.25, 0.75);
    std::normal_distribution<double> noise(0.0, spread);
    Dataset d;
    d.examples = Matrix(classes * per_class, dim);
    std::vector<int> labels;
    labels.reserve(classes * per_class);
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> mean(dim);
        for (double& v : mean) v = centre(rng);
        for (std::size_t i = 0; i < per_class; ++i) {
            auto row = d.examples.row(c * per_class + i);
            for (std::size_t k = 0; k < dim; ++k) row[k] = std::clamp(mean[k] + noise(rng), 0.0, 1.0);
            labels.push_back(static_cast<int>(c));
        }
    }
    d.labels = std::move(labels);
    return d;
}

}  // namespace eeae
