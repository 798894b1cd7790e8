#include "autocorr/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "autocorr/errors.hpp"

namespace autocorr {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHeaderBytes = 12;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const unsigned char> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::span<const unsigned char> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

void write_bytes(const fs::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::vector<unsigned char> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<unsigned char> encode_float_raster(const Grid& g) {
  if (!g.all_finite()) throw InvalidParamError("FloatRaster values must be finite");
  std::vector<unsigned char> out(kFloatRasterMagic, kFloatRasterMagic + 4);
  out.reserve(kHeaderBytes + 8 * g.size());
  put_u32(out, static_cast<std::uint32_t>(g.height()));
  put_u32(out, static_cast<std::uint32_t>(g.width()));
  for (double v : g.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Grid decode_float_raster(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kFloatRasterMagic, 4) != 0) {
    throw MalformedFileError("bad FloatRaster magic, expected \"FGR1\"", 0);
  }
  if (bytes.size() < kHeaderBytes) {
    throw MalformedFileError("truncated FloatRaster header", bytes.size());
  }
  const std::uint32_t h = get_u32(bytes, 4);
  const std::uint32_t w = get_u32(bytes, 8);
  if (h == 0) throw MalformedFileError("FloatRaster height must be positive", 4);
  if (w == 0) throw MalformedFileError("FloatRaster width must be positive", 8);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  const std::size_t expected = kHeaderBytes + 8 * n;
  if (bytes.size() < expected) {
    throw MalformedFileError("truncated FloatRaster payload: expected " +
                                 std::to_string(expected) + " bytes, found " +
                                 std::to_string(bytes.size()),
                             bytes.size());
  }
  if (bytes.size() > expected) {
    throw MalformedFileError("trailing bytes after FloatRaster payload", expected);
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = kHeaderBytes + 8 * i;
    data[i] = std::bit_cast<double>(get_u64(bytes, at));
    if (!std::isfinite(data[i])) throw MalformedFileError("non-finite FloatRaster value", at);
  }
  return Grid({h, w}, std::move(data));
}

void write_float_raster(const fs::path& path, const Grid& g) {
  const auto bytes = encode_float_raster(g);
  write_bytes(path, bytes.data(), bytes.size());
}

Grid read_float_raster(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_float_raster(bytes);
  } catch (const MalformedFileError& e) {
    throw MalformedFileError(path.string() + ": " + e.what(), e.offset());
  }
}

std::vector<unsigned char> preview_pixels(const Grid& g) {
  const double peak = g.max();
  std::vector<unsigned char> px(g.size(), 0);
  if (!(peak > 0.0)) return px;
  auto v = g.values();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double level = std::clamp(v[i] / peak, 0.0, 1.0);
    px[i] = static_cast<unsigned char>(std::lround(255.0 * level));
  }
  return px;
}

void write_pgm_preview(const fs::path& path, const Grid& g, bool center_origin_bin) {
  const Grid shown = center_origin_bin ? center_origin(g) : g;
  std::ostringstream header;
  header << "P5\n" << shown.width() << ' ' << shown.height() << "\n255\n";
  std::string bytes = header.str();
  const auto px = preview_pixels(shown);
  bytes.append(px.begin(), px.end());
  write_bytes(path, bytes.data(), bytes.size());
}

Grid read_pgm(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  // Header tokens are whitespace separated; '#' starts a comment line.
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
      token.push_back(static_cast<char>(bytes[pos++]));
    }
    if (token.empty()) throw MalformedFileError(path.string() + ": truncated PGM header", pos);
    return token;
  };
  auto number = [&]() -> std::size_t {
    const std::size_t at = pos;
    const std::string t = next_token();
    try {
      return std::stoul(t);
    } catch (const std::exception&) {
      throw MalformedFileError(path.string() + ": bad PGM header field '" + t + "'", at);
    }
  };
  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") {
    throw MalformedFileError(path.string() + ": not a PGM file (magic '" + magic + "')", 0);
  }
  const std::size_t w = number();
  const std::size_t h = number();
  const std::size_t maxval = number();
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
    throw MalformedFileError(path.string() + ": invalid PGM dimensions or maxval", pos);
  }
  Grid g({h, w});
  auto values = g.values();
  if (magic == "P5") {
    ++pos;  // single whitespace byte before the raster
    const std::size_t sample = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + sample * values.size()) {
      throw MalformedFileError(path.string() + ": truncated PGM raster", bytes.size());
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::size_t at = pos + sample * i;
      const unsigned v = sample == 2 ? (unsigned{bytes[at]} << 8) | bytes[at + 1] : bytes[at];
      values[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    for (double& v : values) v = static_cast<double>(number()) / static_cast<double>(maxval);
  }
  return g;
}

Grid read_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("image '" + path.string() + "' does not exist");
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".PGM") return read_pgm(path);
  return read_float_raster(path);
}

void write_trajectory_csv(const fs::path& path, std::span<const SnrSample> history,
                          bool wall_clock) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "iter,snr_db,i_div,wall_s\n";
  out << std::setprecision(17);
  for (const SnrSample& s : history) {
    out << s.iteration << ',' << s.snr_db << ',' << s.i_div << ',' << (wall_clock ? s.wall_s : 0.0)
        << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<SnrSample> read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::getline(in, line);
  if (line != "iter,snr_db,i_div,wall_s") {
    throw IoError(path.string() + ": unexpected trajectory header '" + line + "'");
  }
  std::vector<SnrSample> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    SnrSample s;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(fields >> s.iteration >> c1 >> s.snr_db >> c2 >> s.i_div >> c3 >> s.wall_s) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed trajectory row");
    }
    rows.push_back(s);
  }
  return rows;
}

}  // namespace autocorr
