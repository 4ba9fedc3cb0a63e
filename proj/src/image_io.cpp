#include "uavrecon/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

// Reads the next whitespace-delimited header integer, skipping '#' comments.
int next_header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (in) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  std::string digits;
  while (in && std::isdigit(c)) {
    digits.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (digits.empty()) throw IoError("malformed netpbm header in " + path.string());
  // c is the single whitespace byte that terminates the field
  return std::stoi(digits);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

NetpbmRaster read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw IoError("not a binary PGM/PPM file: " + path.string());
  }
  NetpbmRaster r;
  r.channels = magic[1] == '5' ? 1 : 3;
  r.width = next_header_int(in, path);
  r.height = next_header_int(in, path);
  r.maxval = next_header_int(in, path);
  if (r.width < 1 || r.height < 1 || r.maxval < 1 || r.maxval > 65535) {
    throw IoError("invalid netpbm header in " + path.string());
  }
  const std::size_t count = static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height) *
                            static_cast<std::size_t>(r.channels);
  const std::size_t bytes_per = r.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(count * bytes_per);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw IoError("truncated raster in " + path.string());
  }
  r.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    r.samples[i] = bytes_per == 1
                       ? buf[i]
                       : static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  }
  return r;
}

void write_netpbm(const std::filesystem::path& path, const NetpbmRaster& r) {
  if (r.channels != 1 && r.channels != 3) throw IoError("netpbm supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (r.channels == 1 ? "P5" : "P6") << '\n'
      << r.width << ' ' << r.height << '\n'
      << r.maxval << '\n';
  std::vector<unsigned char> buf;
  buf.reserve(r.samples.size() * 2);
  for (std::uint16_t s : r.samples) {
    if (r.maxval > 255) buf.push_back(static_cast<unsigned char>(s >> 8));
    buf.push_back(static_cast<unsigned char>(s & 0xff));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ImageGray read_pgm(const std::filesystem::path& path) {
  const NetpbmRaster r = read_netpbm(path);
  if (r.channels != 1) throw IoError("expected a PGM (P5) file: " + path.string());
  ImageGray img(r.width, r.height);
  auto data = img.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<double>(r.samples[i]) / r.maxval;
  }
  return img;
}

ImageRgb read_color_frame(const std::filesystem::path& path) {
  const NetpbmRaster r = read_netpbm(path);
  ImageRgb img(r.width, r.height);
  const double scale = 1.0 / r.maxval;
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const std::size_t i =
          (static_cast<std::size_t>(y) * static_cast<std::size_t>(r.width) +
           static_cast<std::size_t>(x)) *
          static_cast<std::size_t>(r.channels);
      if (r.channels == 1) {
        const double v = r.samples[i] * scale;
        img(x, y) = {v, v, v};
      } else {
        img(x, y) = {r.samples[i] * scale, r.samples[i + 1] * scale, r.samples[i + 2] * scale};
      }
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const ImageGray& img) {
  NetpbmRaster r;
  r.width = img.width();
  r.height = img.height();
  r.channels = 1;
  r.samples.reserve(img.data().size());
  for (double v : img.data()) r.samples.push_back(to_byte(v));
  write_netpbm(path, r);
}

void write_ppm(const std::filesystem::path& path, const ImageRgb& img) {
  NetpbmRaster r;
  r.width = img.width();
  r.height = img.height();
  r.channels = 3;
  r.samples.reserve(img.data().size() * 3);
  for (const Rgb& p : img.data()) {
    r.samples.push_back(to_byte(p.r));
    r.samples.push_back(to_byte(p.g));
    r.samples.push_back(to_byte(p.b));
  }
  write_netpbm(path, r);
}

}  // namespace uavrecon
