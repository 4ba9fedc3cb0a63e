#include "uavrecon/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
}

struct Tap {
  int src;
  double weight;
};

// Overlap of each output cell with the source cells along one axis.
std::vector<std::vector<Tap>> area_taps(int src_len, int dst_len) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(dst_len));
  const double ratio = static_cast<double>(src_len) / dst_len;
  for (int i = 0; i < dst_len; ++i) {
    const double lo = i * ratio;
    const double hi = (i + 1) * ratio;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src_len - 1, static_cast<int>(std::ceil(hi)) - 1);
    for (int s = first; s <= last; ++s) {
      const double w = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (w > 0.0) taps[static_cast<std::size_t>(i)].push_back({s, w});
    }
  }
  return taps;
}

void check_downsample(int w, int h, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw std::invalid_argument("downsample target must be at least 1x1");
  }
  if (out_w > w || out_h > h) {
    throw std::invalid_argument("downsample target larger than source");
  }
}

template <typename Pixel, typename Get, typename Put>
void bilinear_sample(double sx, double sy, int w, int h, Get get, Put put) {
  if (!(sx >= 0.0 && sy >= 0.0 && sx <= w - 1 && sy <= h - 1)) {
    put(Pixel{});
    return;
  }
  const int x0 = static_cast<int>(sx);
  const int y0 = static_cast<int>(sy);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  put(get(x0, y0, x1, y1, fx, fy));
}

}  // namespace

ImageGray::ImageGray(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ImageGray::ImageGray(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionError("image data length does not match dimensions");
  }
}

ImageRgb::ImageRgb(int width, int height, Rgb fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ImageRgb ImageRgb::from_gray(const ImageGray& gray) {
  ImageRgb out(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < gray.width(); ++x) {
      const double v = gray(x, y);
      out(x, y) = {v, v, v};
    }
  }
  return out;
}

void Intrinsics::validate() const {
  if (!(f_du > 0.0) || !(f_dv > 0.0)) {
    throw std::invalid_argument("focal lengths must be positive");
  }
  if (!std::isfinite(u0) || !std::isfinite(v0) || !std::isfinite(k1) || !std::isfinite(k2) ||
      !std::isfinite(k3)) {
    throw std::invalid_argument("intrinsics must be finite");
  }
}

Intrinsics Intrinsics::scaled_down(double factor_x, double factor_y) const {
  Intrinsics out = *this;
  out.f_du = f_du / factor_x;
  out.f_dv = f_dv / factor_y;
  out.u0 = (u0 + 0.5) / factor_x - 0.5;
  out.v0 = (v0 + 0.5) / factor_y - 0.5;
  return out;
}

Intrinsics Intrinsics::undistorted() const {
  Intrinsics out = *this;
  out.k1 = out.k2 = out.k3 = 0.0;
  return out;
}

bool UndistortMap::source_inside(int x, int y, int src_width, int src_height) const {
  const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                        static_cast<std::size_t>(x);
  const double sx = src_x[i];
  const double sy = src_y[i];
  return sx >= 0.0 && sy >= 0.0 && sx <= src_width - 1 && sy <= src_height - 1;
}

UndistortMap UndistortMap::identity(int width, int height) {
  check_dims(width, height);
  UndistortMap map;
  map.width = width;
  map.height = height;
  map.src_x.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  map.src_y.resize(map.src_x.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                            static_cast<std::size_t>(x);
      map.src_x[i] = x;
      map.src_y[i] = y;
    }
  }
  return map;
}

ImageGray to_gray(const ImageRgb& img) {
  ImageGray out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& p = img(x, y);
      out(x, y) = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    }
  }
  return out;
}

ImageGray downsample_area(const ImageGray& img, int out_w, int out_h) {
  check_downsample(img.width(), img.height(), out_w, out_h);
  const auto tx = area_taps(img.width(), out_w);
  const auto ty = area_taps(img.height(), out_h);
  const double area = (static_cast<double>(img.width()) / out_w) *
                      (static_cast<double>(img.height()) / out_h);
  ImageGray out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      double acc = 0.0;
      for (const Tap& ry : ty[static_cast<std::size_t>(oy)]) {
        double row = 0.0;
        for (const Tap& rx : tx[static_cast<std::size_t>(ox)]) row += rx.weight * img(rx.src, ry.src);
        acc += ry.weight * row;
      }
      out(ox, oy) = acc / area;
    }
  }
  return out;
}

ImageRgb downsample_area(const ImageRgb& img, int out_w, int out_h) {
  check_downsample(img.width(), img.height(), out_w, out_h);
  const auto tx = area_taps(img.width(), out_w);
  const auto ty = area_taps(img.height(), out_h);
  const double area = (static_cast<double>(img.width()) / out_w) *
                      (static_cast<double>(img.height()) / out_h);
  ImageRgb out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      Rgb acc;
      for (const Tap& ry : ty[static_cast<std::size_t>(oy)]) {
        for (const Tap& rx : tx[static_cast<std::size_t>(ox)]) {
          const double w = rx.weight * ry.weight;
          const Rgb& p = img(rx.src, ry.src);
          acc.r += w * p.r;
          acc.g += w * p.g;
          acc.b += w * p.b;
        }
      }
      out(ox, oy) = {acc.r / area, acc.g / area, acc.b / area};
    }
  }
  return out;
}

UndistortMap build_undistort_map(const Intrinsics& intr, int w, int h) {
  intr.validate();
  UndistortMap map = UndistortMap::identity(w, h);
  if (!intr.has_distortion()) return map;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double x = (u - intr.u0) / intr.f_du;
      const double y = (v - intr.v0) / intr.f_dv;
      const double r2 = x * x + y * y;
      const double radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3));
      const std::size_t i = static_cast<std::size_t>(v) * static_cast<std::size_t>(w) +
                            static_cast<std::size_t>(u);
      map.src_x[i] = intr.f_du * x * radial + intr.u0;
      map.src_y[i] = intr.f_dv * y * radial + intr.v0;
    }
  }
  return map;
}

ImageGray remap_bilinear(const ImageGray& img, const UndistortMap& map) {
  ImageGray out(map.width, map.height);
  const int w = img.width();
  const int h = img.height();
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(map.width) +
                            static_cast<std::size_t>(x);
      bilinear_sample<double>(
          map.src_x[i], map.src_y[i], w, h,
          [&](int x0, int y0, int x1, int y1, double fx, double fy) {
            const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
            const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
            return top * (1.0 - fy) + bottom * fy;
          },
          [&](double v) { out(x, y) = v; });
    }
  }
  return out;
}

ImageRgb remap_bilinear(const ImageRgb& img, const UndistortMap& map) {
  ImageRgb out(map.width, map.height);
  const int w = img.width();
  const int h = img.height();
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(map.width) +
                            static_cast<std::size_t>(x);
      bilinear_sample<Rgb>(
          map.src_x[i], map.src_y[i], w, h,
          [&](int x0, int y0, int x1, int y1, double fx, double fy) {
            auto lerp = [&](double Rgb::*c) {
              const double top = img(x0, y0).*c * (1.0 - fx) + img(x1, y0).*c * fx;
              const double bottom = img(x0, y1).*c * (1.0 - fx) + img(x1, y1).*c * fx;
              return top * (1.0 - fy) + bottom * fy;
            };
            return Rgb{lerp(&Rgb::r), lerp(&Rgb::g), lerp(&Rgb::b)};
          },
          [&](const Rgb& v) { out(x, y) = v; });
    }
  }
  return out;
}

std::vector<std::uint8_t> remap_valid_mask(const UndistortMap& map, int src_width,
                                           int src_height) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(map.width) *
                                 static_cast<std::size_t>(map.height));
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      mask[static_cast<std::size_t>(y) * static_cast<std::size_t>(map.width) +
           static_cast<std::size_t>(x)] = map.source_inside(x, y, src_width, src_height) ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace uavrecon
