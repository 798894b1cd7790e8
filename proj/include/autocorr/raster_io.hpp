#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "autocorr/grid.hpp"
#include "autocorr/metrics.hpp"

namespace autocorr {

/// FloatRaster layout: "FGR1", u32 LE height, u32 LE width, then
/// height * width float64 LE values in row-major order.
inline constexpr char kFloatRasterMagic[4] = {'F', 'G', 'R', '1'};

std::vector<unsigned char> encode_float_raster(const Grid& g);
/// Throws MalformedFileError (with byte offset) on any layout violation.
Grid decode_float_raster(std::span<const unsigned char> bytes);

void write_float_raster(const std::filesystem::path& path, const Grid& g);
Grid read_float_raster(const std::filesystem::path& path);

/// 8-bit binary PGM, peak-normalized (max -> 255, negatives -> 0). With
/// `center_origin_bin` the zero-shift bin is drawn at the image center.
void write_pgm_preview(const std::filesystem::path& path, const Grid& g,
                       bool center_origin_bin = false);
std::vector<unsigned char> preview_pixels(const Grid& g);

/// Reads P2/P5 graymaps (8 or 16 bit) as values in [0, 1].
Grid read_pgm(const std::filesystem::path& path);

/// Loads a FloatRaster (.fgr) or a PGM image, by extension.
Grid read_image(const std::filesystem::path& path);

/// CSV with header iter,snr_db,i_div,wall_s. Without `wall_clock` the wall_s
/// column is written as 0 so identical runs give identical files.
void write_trajectory_csv(const std::filesystem::path& path, std::span<const SnrSample> history,
                          bool wall_clock = true);
std::vector<SnrSample> read_trajectory_csv(const std::filesystem::path& path);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);

}  // namespace autocorr
