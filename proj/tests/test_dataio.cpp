#include "eeae/dataio.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace eeae;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("eeae_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& b) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

std::vector<unsigned char> image_file(std::uint32_t count, std::uint32_t h, std::uint32_t w,
                                      std::vector<unsigned char> pixels, std::uint32_t magic = 0x803) {
    std::vector<unsigned char> b;
    put_u32(b, magic);
    put_u32(b, count);
    put_u32(b, h);
    put_u32(b, w);
    b.insert(b.end(), pixels.begin(), pixels.end());
    return b;
}

std::vector<unsigned char> label_file(std::vector<unsigned char> labels, std::uint32_t magic = 0x801) {
    std::vector<unsigned char> b;
    put_u32(b, magic);
    put_u32(b, static_cast<std::uint32_t>(labels.size()));
    b.insert(b.end(), labels.begin(), labels.end());
    return b;
}

void write_pgm(const fs::path& p, int w, int h, std::vector<unsigned char> px) {
    std::ofstream f(p, std::ios::binary);
    f << "P5\n" << w << " " << h << "\n255\n";
    f.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

Dataset labeled(std::size_t classes, std::size_t per_class) {
    Dataset d;
    d.examples = Matrix(classes * per_class, 2);
    d.labels = std::vector<int>();
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = c * per_class + i;
            d.examples(r, 0) = static_cast<double>(r) / 100.0;
            d.labels->push_back(static_cast<int>(c));
        }
    }
    d.image_shape = ImageShape{1, 2};
    return d;
}

}  // namespace

TEST(LoadIdx, SingleImage) {
    TempDir dir;
    write_bytes(dir / "img", image_file(1, 2, 2, {0, 255, 128, 0}));
    write_bytes(dir / "lab", label_file({7}));
    const auto d = load_idx(dir / "img", dir / "lab");
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.examples, (Matrix{{0, 1, 128.0 / 255.0, 0}}));
    EXPECT_EQ(*d.labels, std::vector<int>{7});
    EXPECT_EQ(*d.image_shape, (ImageShape{2, 2}));
}

TEST(LoadIdx, EmptyCount) {
    TempDir dir;
    write_bytes(dir / "img", image_file(0, 28, 28, {}));
    write_bytes(dir / "lab", label_file({}));
    const auto d = load_idx(dir / "img", dir / "lab");
    EXPECT_EQ(d.size(), 0u);
}

TEST(LoadIdx, DistinctErrors) {
    TempDir dir;
    write_bytes(dir / "bad_magic", image_file(1, 1, 1, {3}, 0x802));
    write_bytes(dir / "short", image_file(2, 2, 2, {1, 2, 3}));
    write_bytes(dir / "img", image_file(2, 1, 1, {1, 2}));
    write_bytes(dir / "lab3", label_file({0, 1, 2}));
    write_bytes(dir / "lab_magic", label_file({0, 1}, 0x803));
    write_bytes(dir / "lab_short", std::vector<unsigned char>{0, 0, 8});
    EXPECT_THROW(load_idx(dir / "bad_magic", dir / "lab3"), BadMagicError);
    EXPECT_THROW(load_idx(dir / "short", dir / "lab3"), TruncatedError);
    EXPECT_THROW(load_idx(dir / "img", dir / "lab3"), CountMismatchError);
    EXPECT_THROW(load_idx(dir / "img", dir / "lab_magic"), BadMagicError);
    EXPECT_THROW(load_idx(dir / "img", dir / "lab_short"), TruncatedError);
    EXPECT_THROW(load_idx(dir / "missing", dir / "lab3"), DataError);
}

TEST(LoadIdx, RoundTripByteAligned) {
    TempDir dir;
    Dataset d;
    d.examples = Matrix{{0, 1, 51.0 / 255}, {17.0 / 255, 0, 1}};
    d.labels = std::vector<int>{3, 9};
    d.image_shape = ImageShape{1, 3};
    save_idx(d, dir / "i", dir / "l");
    const auto back = load_idx(dir / "i", dir / "l");
    EXPECT_EQ(back.examples, d.examples);
    EXPECT_EQ(back.labels, d.labels);
    EXPECT_EQ(back.image_shape, d.image_shape);
}

TEST(LoadIdx, RealSubsetWhenPresent) {
    const fs::path root = fs::path(EEAE_SOURCE_DIR) / "data" / "mnist5k";
    if (!fs::exists(root / "images-idx3-ubyte")) GTEST_SKIP() << "MNIST subset not extracted";
    const auto d = load_idx(root / "images-idx3-ubyte", root / "labels-idx1-ubyte");
    EXPECT_EQ(d.size(), 5000u);
    EXPECT_EQ(d.dim(), 784u);
    d.validate();
}

TEST(LoadImageDir, TwoClasses) {
    TempDir dir;
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    write_pgm(dir / "a" / "x.pgm", 2, 2, {0, 255, 0, 255});
    write_pgm(dir / "b" / "y.pgm", 2, 2, {255, 255, 0, 0});
    const auto d = load_image_dir(dir.path());
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(*d.labels, (std::vector<int>{0, 1}));
    EXPECT_EQ(d.examples.row(0)[1], 1.0);
    EXPECT_EQ(load_image_dir(dir.path()).examples, d.examples);
}

TEST(LoadImageDir, AllWhite3x3) {
    TempDir dir;
    fs::create_directories(dir / "only");
    write_pgm(dir / "only" / "w.pgm", 3, 3, std::vector<unsigned char>(9, 255));
    const auto d = load_image_dir(dir.path());
    EXPECT_EQ(d.examples, Matrix(1, 9, 1.0));
}

TEST(LoadImageDir, MixedSizesNamePath) {
    TempDir dir;
    fs::create_directories(dir / "a");
    write_pgm(dir / "a" / "one.pgm", 2, 2, {0, 0, 0, 0});
    write_pgm(dir / "a" / "two.pgm", 3, 1, {0, 0, 0});
    try {
        load_image_dir(dir.path());
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("two.pgm"), std::string::npos);
    }
}

TEST(LoadImageDir, PgmRoundTrip) {
    TempDir dir;
    fs::create_directories(dir / "c");
    const std::vector<double> px{0, 1, 34.0 / 255, 1, 0, 0};
    save_pgm(dir / "c" / "p.pgm", px, {2, 3});
    const auto d = load_image_dir(dir.path());
    EXPECT_EQ(d.examples, Matrix(1, 6, px));
    EXPECT_EQ(*d.image_shape, (ImageShape{2, 3}));
}

TEST(Mirror, FlipsColumns) {
    Dataset d;
    d.examples = Matrix{{0.1, 0.2, 0.3}};
    d.labels = std::vector<int>{4};
    d.image_shape = ImageShape{1, 3};
    const auto m = mirror(d);
    EXPECT_EQ(m.examples, (Matrix{{0.1, 0.2, 0.3}, {0.3, 0.2, 0.1}}));
    EXPECT_EQ(*m.labels, (std::vector<int>{4, 4}));
}

TEST(Mirror, SymmetricImageUnchanged) {
    Dataset d;
    d.examples = Matrix{{0.1, 0.5, 0.1, 0.2, 0.9, 0.2}};
    d.image_shape = ImageShape{2, 3};
    const auto m = mirror(d);
    EXPECT_EQ(m.examples.row(1)[0], 0.1);
    EXPECT_TRUE(std::equal(m.examples.row(0).begin(), m.examples.row(0).end(), m.examples.row(1).begin()));
}

TEST(Mirror, TwiceGivesEachOriginalTwice) {
    Dataset d;
    d.examples = Matrix{{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}};
    d.image_shape = ImageShape{1, 2};
    const auto mm = mirror(mirror(d));
    ASSERT_EQ(mm.size(), 12u);
    for (std::size_t r = 0; r < 3; ++r) {
        int count = 0;
        for (std::size_t k = 0; k < 12; ++k) {
            count += std::equal(d.examples.row(r).begin(), d.examples.row(r).end(), mm.examples.row(k).begin());
        }
        EXPECT_EQ(count, 2);
    }
}

TEST(Mirror, NeedsShape) {
    Dataset d;
    d.examples = Matrix{{0.1}};
    EXPECT_THROW(mirror(d), DataError);
}

TEST(SplitPerClass, Counting) {
    const auto d = labeled(3, 12);
    const auto s = split_per_class(d, {10, 0, true});
    EXPECT_EQ(s.train.size(), 60u);
    EXPECT_EQ(s.test.size(), 6u);
    const auto plain = split_per_class(d, {10, 0, false});
    EXPECT_EQ(plain.train.size(), 30u);
}

TEST(SplitPerClass, OneLeftPerClass) {
    const auto s = split_per_class(labeled(4, 5), {4, 1, false});
    EXPECT_EQ(s.test.size(), 4u);
    std::set<int> seen(s.test.labels->begin(), s.test.labels->end());
    EXPECT_EQ(seen.size(), 4u);
}

TEST(SplitPerClass, PartitionAndDeterminism) {
    const auto d = labeled(3, 20);
    const auto a = split_per_class(d, {7, 5, false});
    const auto b = split_per_class(d, {7, 5, false});
    const auto c = split_per_class(d, {7, 6, false});
    EXPECT_EQ(a.train_source, b.train_source);
    EXPECT_NE(a.train_source, c.train_source);
    std::set<std::size_t> all(a.train_source.begin(), a.train_source.end());
    for (auto r : a.test_source) EXPECT_TRUE(all.insert(r).second) << "row " << r << " in both sides";
    EXPECT_EQ(all.size(), d.size());
}

TEST(SplitPerClass, ClassTooSmall) {
    try {
        split_per_class(labeled(2, 3), {3, 0, false});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("class 0"), std::string::npos);
    }
}

TEST(SynthGaussian, Counting) {
    const auto d = synth_gaussian(3, 32, 100, 0.12, 0);
    EXPECT_EQ(d.size(), 300u);
    EXPECT_EQ(d.dim(), 32u);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(std::count(d.labels->begin(), d.labels->end(), c), 100);
    d.validate();
}

TEST(SynthGaussian, TinySpreadCollapsesToMeans) {
    const auto d = synth_gaussian(2, 5, 10, 1e-8, 3);
    for (std::size_t r = 0; r < d.size(); ++r) {
        const std::size_t first = (*d.labels)[r] == 0 ? 0 : 10;
        for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(d.examples(r, c), d.examples(first, c), 1e-6);
    }
}

TEST(SynthGaussian, Deterministic) {
    EXPECT_EQ(synth_gaussian(3, 4, 5, 0.1, 9).examples, synth_gaussian(3, 4, 5, 0.1, 9).examples);
    EXPECT_NE(synth_gaussian(3, 4, 5, 0.1, 9).examples, synth_gaussian(3, 4, 5, 0.1, 10).examples);
    EXPECT_THROW(synth_gaussian(0, 4, 5, 0.1, 9), std::invalid_argument);
    EXPECT_THROW(synth_gaussian(3, 4, 5, 0.0, 9), std::invalid_argument);
}

TEST(SubsamplePerClass, CapsEachClass) {
    const auto s = subsample_per_class(labeled(3, 10), 4, 2);
    EXPECT_EQ(s.size(), 12u);
    EXPECT_TRUE(std::is_sorted(s.labels->begin(), s.labels->end()));
}

TEST(DatasetValidate, Errors) {
    Dataset d;
    d.examples = Matrix{{1.5}};
    EXPECT_THROW(d.validate(), DataError);
    d.examples = Matrix{{0.5}};
    d.labels = std::vector<int>{1, 2};
    EXPECT_THROW(d.validate(), DataError);
}
