#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "autocorr/errors.hpp"
#include "autocorr/metrics.hpp"
#include "autocorr/phantom.hpp"
#include "autocorr/raster_io.hpp"
#include "autocorr/spectral.hpp"
#include "oracles.hpp"

using namespace autocorr;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("autocorr_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(FloatRaster, LayoutIsLittleEndian) {
  const auto bytes = encode_float_raster(Grid({1, 2}, {1.0, -2.5}));
  ASSERT_EQ(bytes.size(), 12u + 16u);
  EXPECT_EQ(std::memcmp(bytes.data(), "FGR1", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 2);
  // 1.0 = 0x3FF0000000000000, least significant byte first.
  EXPECT_EQ(bytes[12], 0x00);
  EXPECT_EQ(bytes[19], 0x3F);
  EXPECT_EQ(bytes[18], 0xF0);
}

TEST(FloatRaster, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  const fs::path dir = scratch_dir("roundtrip");
  for (int i = 0; i < 10; ++i) {
    Grid g = oracle::random_grid(oracle::random_shape(rng, 40), rng, -1e300, 1e300);
    g.values()[0] = 5e-324;
    write_float_raster(dir / "g.fgr", g);
    EXPECT_EQ(read_float_raster(dir / "g.fgr"), g);
  }
}

TEST(FloatRaster, CorruptMagicNamesOffsetZero) {
  auto bytes = encode_float_raster(Grid({2, 2}, 1.0));
  bytes[0] = 'X';
  try {
    decode_float_raster(bytes);
    FAIL() << "expected MalformedFileError";
  } catch (const MalformedFileError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(FloatRaster, StructuralErrors) {
  const auto good = encode_float_raster(Grid({2, 3}, 1.0));
  auto zero_h = good;
  zero_h[4] = 0;
  EXPECT_THROW(decode_float_raster(zero_h), MalformedFileError);
  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(decode_float_raster(truncated), MalformedFileError);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(decode_float_raster(trailing), MalformedFileError);
  EXPECT_THROW(decode_float_raster(std::vector<unsigned char>(good.begin(), good.begin() + 6)),
               MalformedFileError);
  // The encoder refuses NaN, so write its bit pattern by hand.
  auto nan = encode_float_raster(Grid({1, 1}, 0.0));
  const double q = std::nan("");
  std::memcpy(nan.data() + 12, &q, sizeof q);
  try {
    decode_float_raster(nan);
    FAIL() << "expected MalformedFileError";
  } catch (const MalformedFileError& e) {
    EXPECT_EQ(e.offset(), 12u);
  }
}

TEST(FloatRaster, UnreadablePath) {
  EXPECT_THROW(read_float_raster("/nonexistent/dir/x.fgr"), IoError);
  EXPECT_THROW(write_float_raster("/nonexistent/dir/x.fgr", Grid({1, 1})), IoError);
}

TEST(Preview, ConstantGridIsWhite) {
  for (unsigned char p : preview_pixels(Grid({5, 7}, 0.3))) EXPECT_EQ(p, 255);
}

TEST(Preview, PeakNormalizedAndClipped) {
  const auto px = preview_pixels(Grid({1, 3}, {-1.0, 0.5, 2.0}));
  EXPECT_EQ(px[0], 0);
  EXPECT_EQ(px[1], 64);
  EXPECT_EQ(px[2], 255);
}

TEST(Preview, PgmRoundTripAndCentering) {
  const fs::path dir = scratch_dir("pgm");
  write_pgm_preview(dir / "d.pgm", Grid::delta({4, 6}), true);
  const Grid back = read_pgm(dir / "d.pgm");
  EXPECT_EQ(back, Grid::delta({4, 6}, 2, 3));
  EXPECT_EQ(read_image(dir / "d.pgm"), back);
}

TEST(Pgm, ReadsAsciiAndSixteenBit) {
  const fs::path dir = scratch_dir("pgm16");
  {
    std::ofstream f(dir / "a.pgm");
    f << "P2\n# comment\n3 1\n4\n0 2 4\n";
  }
  EXPECT_EQ(read_pgm(dir / "a.pgm"), Grid({1, 3}, {0.0, 0.5, 1.0}));
  {
    std::ofstream f(dir / "b.pgm", std::ios::binary);
    f << "P5 2 1 65535\n";
    const unsigned char px[] = {0xFF, 0xFF, 0x00, 0x00};
    f.write(reinterpret_cast<const char*>(px), 4);
  }
  EXPECT_EQ(read_pgm(dir / "b.pgm"), Grid({1, 2}, {1.0, 0.0}));
  {
    std::ofstream f(dir / "c.pgm");
    f << "P6 1 1 255\n";
  }
  EXPECT_THROW(read_pgm(dir / "c.pgm"), MalformedFileError);
}

TEST(Trajectory, CsvRoundTripAndDeterministicClock) {
  const fs::path dir = scratch_dir("csv");
  const std::vector<SnrSample> h = {{10, 12.5, 0.25, 0.125}, {20, 1.0 / 3.0, 1e-7, 0.5}};
  write_trajectory_csv(dir / "t.csv", h, true);
  const auto back = read_trajectory_csv(dir / "t.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].iteration, 20u);
  EXPECT_EQ(back[1].snr_db, 1.0 / 3.0);
  EXPECT_EQ(back[0].wall_s, 0.125);
  write_trajectory_csv(dir / "u.csv", h, false);
  EXPECT_EQ(read_trajectory_csv(dir / "u.csv")[1].wall_s, 0.0);
  std::ifstream in(dir / "u.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iter,snr_db,i_div,wall_s");
}

TEST(Phantom, TwoDeltasHasTwoPixels) {
  const Grid p = make_phantom(PhantomKind::TwoDeltas, {64, 64}, 7);
  int nonzero = 0;
  for (double v : p.values()) nonzero += v != 0.0;
  EXPECT_EQ(nonzero, 2);
}

TEST(Phantom, DeterministicNonNegativeAndBounded) {
  for (PhantomKind kind : {PhantomKind::TwoDeltas, PhantomKind::Bars, PhantomKind::Disks,
                           PhantomKind::SatelliteLike}) {
    const Grid a = make_phantom(kind, {64, 64}, 3);
    EXPECT_EQ(a, make_phantom(kind, {64, 64}, 3)) << to_string(kind);
    EXPECT_GE(a.min(), 0.0);
    EXPECT_LE(a.max(), 1.0);
    EXPECT_GT(a.sum(), 0.0);
    EXPECT_EQ(parse_phantom_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(make_phantom(PhantomKind::Bars, {4, 64}, 1), InvalidParamError);
  EXPECT_THROW(parse_phantom_kind("lena"), InvalidParamError);
}

TEST(Phantom, SameSeedSameFile) {
  const fs::path dir = scratch_dir("phantom");
  write_float_raster(dir / "a.fgr", make_phantom(PhantomKind::SatelliteLike, {64, 64}, 5));
  write_float_raster(dir / "b.fgr", make_phantom(PhantomKind::SatelliteLike, {64, 64}, 5));
  EXPECT_EQ(read_file_bytes(dir / "a.fgr"), read_file_bytes(dir / "b.fgr"));
}

TEST(Phantom, AsymmetricSoMirrorsAreDistinguishable) {
  for (PhantomKind kind : {PhantomKind::Bars, PhantomKind::Disks, PhantomKind::SatelliteLike}) {
    const Grid p = embed_pad(make_phantom(kind, {64, 64}, 7), {128, 128});
    const Grid mirror = reverse_axes(p);
    // Best translation of the mirror image still leaves a residual.
    double best = -1.0;
    long by = 0;
    long bx = 0;
    const Grid corr = cross_correlate(mirror, p);
    for (std::size_t r = 0; r < corr.height(); ++r)
      for (std::size_t c = 0; c < corr.width(); ++c)
        if (corr(r, c) > best) {
          best = corr(r, c);
          by = static_cast<long>(r);
          bx = static_cast<long>(c);
        }
    EXPECT_LT(snr_db(p, circular_shift(mirror, by, bx)), kSnrCapDb) << to_string(kind);
    EXPECT_LT(snr_db(p, circular_shift(mirror, by, bx)), 20.0) << to_string(kind);
  }
}
