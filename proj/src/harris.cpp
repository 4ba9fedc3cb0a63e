#include "uavrecon/harris.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable smoothing with zero padding.
std::vector<double> smooth(const std::vector<double>& src, int w, int h,
                           const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(src.size(), 0.0);
  std::vector<double> out(src.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = std::max(-r, -x); i <= std::min(r, w - 1 - x); ++i) {
        acc += kernel[static_cast<std::size_t>(i + r)] * src[static_cast<std::size_t>(y * w + x + i)];
      }
      tmp[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = std::max(-r, -y); i <= std::min(r, h - 1 - y); ++i) {
        acc += kernel[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>((y + i) * w + x)];
      }
      out[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  return out;
}

}  // namespace

void HarrisParams::validate() const {
  if (!(k > 0.0 && k < 0.25)) throw std::invalid_argument("harris k must lie in (0, 0.25)");
  if (!(window_sigma > 0.0)) throw std::invalid_argument("harris window_sigma must be > 0");
  if (grid_cols < 1 || grid_rows < 1) throw std::invalid_argument("harris grid must be >= 1x1");
  if (max_per_cell < 1) throw std::invalid_argument("harris max_per_cell must be >= 1");
}

int HarrisParams::window_radius() const { return static_cast<int>(std::ceil(3.0 * window_sigma)); }

std::vector<double> harris_response(const ImageGray& img, const HarrisParams& p) {
  p.validate();
  const int w = img.width();
  const int h = img.height();
  const int margin = p.border_margin();
  if (w <= 2 * margin + 2 || h <= 2 * margin + 2) {
    throw DimensionError("image too small for the Harris window support");
  }
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<double> axx(n, 0.0), axy(n, 0.0), ayy(n, 0.0);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const double a = 0.5 * (img(x + 1, y) - img(x - 1, y));
      const double b = 0.5 * (img(x, y + 1) - img(x, y - 1));
      const std::size_t i = static_cast<std::size_t>(y * w + x);
      axx[i] = a * a;
      axy[i] = a * b;
      ayy[i] = b * b;
    }
  }
  const auto kernel = gaussian_kernel(p.window_sigma, p.window_radius());
  const auto sxx = smooth(axx, w, h, kernel);
  const auto sxy = smooth(axy, w, h, kernel);
  const auto syy = smooth(ayy, w, h, kernel);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double det = sxx[i] * syy[i] - sxy[i] * sxy[i];
    const double tr = sxx[i] + syy[i];
    r[i] = det - p.k * tr * tr;
  }
  return r;
}

std::vector<Corner> harris_detect(const ImageGray& img, const HarrisParams& p) {
  const auto r = harris_response(img, p);
  const int w = img.width();
  const int h = img.height();
  const int margin = p.border_margin();
  auto at = [&](int x, int y) { return r[static_cast<std::size_t>(y * w + x)]; };

  double max_r = 0.0;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) max_r = std::max(max_r, at(x, y));
  }
  const double thresh = std::max(p.threshold, p.relative_threshold * max_r);

  std::vector<std::vector<Corner>> cells(static_cast<std::size_t>(p.grid_cols * p.grid_rows));
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const double c = at(x, y);
      if (!(c > 0.0) || c < thresh) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx || dy) && at(x + dx, y + dy) >= c) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      const int cx = static_cast<int>(static_cast<long long>(x) * p.grid_cols / w);
      const int cy = static_cast<int>(static_cast<long long>(y) * p.grid_rows / h);
      cells[static_cast<std::size_t>(cy * p.grid_cols + cx)].push_back({x, y, c});
    }
  }

  // Within a cell candidates arrive in raster order, so a stable sort keeps
  // raster order among equal responses.
  auto stronger = [](const Corner& a, const Corner& b) { return a.response > b.response; };
  std::vector<Corner> out;
  for (auto& cell : cells) {
    std::stable_sort(cell.begin(), cell.end(), stronger);
    const auto keep = std::min<std::size_t>(cell.size(), static_cast<std::size_t>(p.max_per_cell));
    out.insert(out.end(), cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(out.begin(), out.end(), [](const Corner& a, const Corner& b) {
    if (a.response != b.response) return a.response > b.response;
    return a.v != b.v ? a.v < b.v : a.u < b.u;
  });
  return out;
}

}  // namespace uavrecon
