#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "ngp/io.hpp"

namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ngp_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path);
        out << content;
        return path.string();
    }

    fs::path dir_;
};

using LoadCsv = TempDir;
using LoadIdx = TempDir;

TEST_F(LoadCsv, ParsesFeaturesAndNamedTarget) {
    const auto path = write("d.csv", "a,b,t\n1,2,3\n4,5,6\n7,8,9\n");
    auto data = ngp::load_csv(path, {"t"}, true);
    EXPECT_EQ(data.sample_count(), 3);
    EXPECT_EQ(data.feature_count(), 2);
    EXPECT_EQ(data.target_count(), 1);
    EXPECT_DOUBLE_EQ(data.features(1, 0), 4.0);
    EXPECT_DOUBLE_EQ(data.targets(2, 0), 9.0);
    ASSERT_EQ(data.feature_names.size(), 2u);
    EXPECT_EQ(data.feature_names[0], "a");
}

TEST_F(LoadCsv, BlankCellErrorNamesRowAndColumn) {
    const auto path = write("d.csv", "a,b,t\n1,2,3\n4,,6\n");
    try {
        ngp::load_csv(path, {"t"}, true);
        FAIL() << "expected parse error";
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
    }
}

TEST_F(LoadCsv, EmptyFileThrows) {
    const auto path = write("d.csv", "");
    EXPECT_THROW(ngp::load_csv(path, {"t"}, true), std::runtime_error);
}

TEST_F(LoadCsv, MissingFileThrows) {
    EXPECT_THROW(ngp::load_csv((dir_ / "absent.csv").string(), {"t"}, true), std::runtime_error);
}

TEST_F(LoadCsv, ThirteenFeatureColumnsPlusTarget) {
    std::string header, row;
    for (int i = 1; i <= 13; ++i) {
        header += "x" + std::to_string(i) + ",";
        row += std::to_string(i) + ",";
    }
    header += "medv";
    row += "24.0";
    const auto path = write("housing.csv", header + "\n" + row + "\n" + row + "\n");
    auto data = ngp::load_csv(path, {"medv"}, true);
    EXPECT_EQ(data.feature_count(), 13);
    EXPECT_EQ(data.target_count(), 1);
}

TEST_F(LoadCsv, TargetByOneBasedPositionWithoutHeader) {
    const auto path = write("d.csv", "1,2,3\n4,5,6\n");
    auto data = ngp::load_csv(path, {"3"}, false);
    EXPECT_EQ(data.feature_count(), 2);
    EXPECT_DOUBLE_EQ(data.targets(0, 0), 3.0);
}

TEST_F(LoadCsv, UnknownTargetColumnThrows) {
    const auto path = write("d.csv", "a,b\n1,2\n");
    EXPECT_THROW(ngp::load_csv(path, {"zz"}, true), std::invalid_argument);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::string write_idx_pair(const fs::path& dir, std::uint32_t n_images,
                           std::uint32_t n_labels, std::uint32_t rows, std::uint32_t cols,
                           const std::vector<unsigned char>& pixels,
                           const std::vector<unsigned char>& labels,
                           std::uint32_t image_magic = 0x00000803u) {
    std::ofstream img(dir / "images.idx", std::ios::binary);
    write_be32(img, image_magic);
    write_be32(img, n_images);
    write_be32(img, rows);
    write_be32(img, cols);
    img.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    img.close();

    std::ofstream lab(dir / "labels.idx", std::ios::binary);
    write_be32(lab, 0x00000801u);
    write_be32(lab, n_labels);
    lab.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
    return (dir / "images.idx").string();
}

// handcrafted two-image fixture with known bytes
TEST_F(LoadIdx, ReproducesPixelBytesExactly) {
    const std::vector<unsigned char> pixels{0, 51, 102, 153, 204, 255,
                                            10, 20, 30, 40, 50, 60};
    write_idx_pair(dir_, 2, 2, 2, 3, pixels, {1, 0});
    auto data = ngp::load_idx((dir_ / "images.idx").string(), (dir_ / "labels.idx").string());
    EXPECT_EQ(data.sample_count(), 2);
    EXPECT_EQ(data.feature_count(), 6);
    EXPECT_EQ(data.target_count(), 2);  // labels {0,1} -> two classes
    for (int px = 0; px < 6; ++px) {
        EXPECT_DOUBLE_EQ(data.features(0, px), pixels[static_cast<std::size_t>(px)] / 255.0);
        EXPECT_DOUBLE_EQ(data.features(1, px), pixels[6 + static_cast<std::size_t>(px)] / 255.0);
    }
    EXPECT_DOUBLE_EQ(data.targets(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(data.targets(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(data.targets(1, 0), 1.0);
}

TEST_F(LoadIdx, TwentyEightSquareGivesFullPixelCount) {
    std::vector<unsigned char> pixels(28 * 28, 7);
    write_idx_pair(dir_, 1, 1, 28, 28, pixels, {3});
    auto data = ngp::load_idx((dir_ / "images.idx").string(), (dir_ / "labels.idx").string());
    EXPECT_EQ(data.feature_count(), 784);
}

TEST_F(LoadIdx, LimitTruncatesSamples) {
    std::vector<unsigned char> pixels(5 * 4, 0);
    write_idx_pair(dir_, 5, 5, 2, 2, pixels, {0, 1, 2, 3, 4});
    auto data = ngp::load_idx((dir_ / "images.idx").string(), (dir_ / "labels.idx").string(), 3);
    EXPECT_EQ(data.sample_count(), 3);
    EXPECT_EQ(data.target_count(), 5);  // class count comes from the whole file
}

TEST_F(LoadIdx, CountMismatchThrows) {
    std::vector<unsigned char> pixels(2 * 4, 0);
    write_idx_pair(dir_, 2, 3, 2, 2, pixels, {0, 1, 2});
    EXPECT_THROW(
        ngp::load_idx((dir_ / "images.idx").string(), (dir_ / "labels.idx").string()),
        std::runtime_error);
}

TEST_F(LoadIdx, BadMagicThrows) {
    std::vector<unsigned char> pixels(4, 0);
    write_idx_pair(dir_, 1, 1, 2, 2, pixels, {0}, 0xdeadbeefu);
    EXPECT_THROW(
        ngp::load_idx((dir_ / "images.idx").string(), (dir_ / "labels.idx").string()),
        std::runtime_error);
}

TEST_F(TempDir, CsvRoundTripKeepsValues) {
    ngp::Dataset d;
    d.features.resize(2, 2);
    d.features << 0.1, -2.5, 3.25, 1e-7;
    d.targets.resize(2, 1);
    d.targets << 1.0 / 3.0, -7.125;
    const auto path = (dir_ / "rt.csv").string();
    ngp::save_csv(d, path);
    auto back = ngp::load_csv(path, {"t"}, true);
    EXPECT_EQ(back.features, d.features);
    EXPECT_EQ(back.targets, d.targets);
}

}  // namespace
