#include "preimage/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "preimage/errors.hpp"

namespace preimage {

namespace {

unsigned char quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

// Reads one whitespace-delimited header integer, skipping '#' comments.
std::size_t read_header_int(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const unsigned char ch = static_cast<unsigned char>(bytes[pos]);
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(ch)) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  std::size_t value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    if (value > (1u << 24)) throw FormatError("ppm: header value too large");
    ++pos;
  }
  if (pos == start) throw FormatError("ppm: malformed header");
  return value;
}

}  // namespace

std::string encode_ppm(const Image& image) {
  const std::size_t nc = image.channels();
  if (nc != 1 && nc != 3) throw DimensionError("encode_ppm: channels must be 1 or 3");
  std::string out = (nc == 1 ? "P5\n" : "P6\n") + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (double v : image.data()) out.push_back(static_cast<char>(quantize(v)));
  return out;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  const std::string bytes = encode_ppm(image);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("write_ppm: cannot open " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("write_ppm: write failed for " + path.string());
}

Image decode_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("ppm: bad magic");
  }
  const std::size_t nc = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const std::size_t w = read_header_int(bytes, pos);
  const std::size_t h = read_header_int(bytes, pos);
  const std::size_t maxval = read_header_int(bytes, pos);
  if (w == 0 || h == 0) throw FormatError("ppm: zero dimension");
  if (maxval != 255) throw FormatError("ppm: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("ppm: missing separator after maxval");
  }
  ++pos;
  const std::size_t n = w * h * nc;
  if (bytes.size() - pos != n) throw FormatError("ppm: payload size mismatch");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return Image(h, w, nc, std::move(data));
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("read_ppm: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

Image normalize_for_display(const Image& image) {
  const auto [lo, hi] = std::minmax_element(image.data().begin(), image.data().end());
  Image out = image;
  const double range = *hi - *lo;
  for (double& v : out.data()) v = range > 0.0 ? (v - *lo) / range : 0.5;
  return out;
}

}  // namespace preimage
