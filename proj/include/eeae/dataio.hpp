#pragma once

#include "eeae/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace eeae {

struct ImageShape {
    std::size_t height = 0;
    std::size_t width = 0;
    bool operator==(const ImageShape&) const = default;
};

/// Examples as rows with entries in [0,1]. Labels are for evaluation only.
struct Dataset {
    Matrix examples;
    std::optional<std::vector<int>> labels;
    std::optional<ImageShape> image_shape;

    std::size_t size() const { return examples.rows(); }
    std::size_t dim() const { return examples.cols(); }
    /// Throws if an entry leaves [0,1] or the label count disagrees with the row count.
    void validate() const;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class BadMagicError : public DataError {
public:
    using DataError::DataError;
};
class TruncatedError : public DataError {
public:
    using DataError::DataError;
};
class CountMismatchError : public DataError {
public:
    using DataError::DataError;
};

/// Reads an MNIST-layout IDX pair (images u8 count×H×W, labels u8 count). Pixels are divided by 255.
Dataset load_idx(const std::filesystem::path& image_path, const std::filesystem::path& label_path);
/// Reads only the image file.
Dataset load_idx_images(const std::filesystem::path& image_path);

/// Writes `dataset` as an IDX pair. Pixels are rounded to the nearest byte.
/// Without an image shape, rows are written as 1×dim images.
void save_idx(const Dataset& dataset, const std::filesystem::path& image_path,
              const std::filesystem::path& label_path);

/// Reads root/<class>/<file>.pgm (binary P5). Rows are ordered by (class name, file name),
/// labels enumerate the sorted class directories.
Dataset load_image_dir(const std::filesystem::path& root);

void save_pgm(const std::filesystem::path& path, std::span<const double> pixels, ImageShape shape);

/// Originals followed by their horizontally flipped copies.
Dataset mirror(const Dataset& dataset);

struct SplitSpec {
    std::size_t per_class_train = 10;
    std::uint64_t seed = 0;
    bool mirror_train = true;
};

struct Split {
    Dataset train;
    Dataset test;
    /// Source row of each unmirrored train row and of each test row.
    std::vector<std::size_t> train_source;
    std::vector<std::size_t> test_source;
};

/// Seeded per-class selection: per_class_train rows of every class for training, the rest for testing.
Split split_per_class(const Dataset& dataset, const SplitSpec& spec);

/// Seeded subset with at most `per_class` rows of every class, kept in source order.
Dataset subsample_per_class(const Dataset& dataset, std::size_t per_class, std::uint64_t seed);

/// Per class a random centre in [0.25,0.75]^dim plus N(0, spread²) noise, clipped to [0,1].
Dataset synth_gaussian(std::size_t classes, std::size_t dim, std::size_t per_class, double spread,
                       std::uint64_t seed);

Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> rows);

}  // namespace eeae
