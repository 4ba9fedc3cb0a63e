#include "uavrecon/jbu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

using Row = Eigen::Array<double, Eigen::Dynamic, 1, 0, 2 * kMaxJbuRadius + 1, 1>;

}  // namespace

void JbuParams::validate() const {
  if (!(sigma_spatial > 0.0)) throw std::invalid_argument("jbu sigma_spatial must be > 0");
  if (!(sigma_range > 0.0)) throw std::invalid_argument("jbu sigma_range must be > 0");
  if (radius < 1 || radius > kMaxJbuRadius) {
    throw std::invalid_argument("jbu radius must be in [1, " + std::to_string(kMaxJbuRadius) + "]");
  }
  if (scale < 1) throw std::invalid_argument("jbu scale must be >= 1");
}

DisparityMap jbu_upsample(const DisparityMap& low, const ImageGray& guide, const JbuParams& p) {
  p.validate();
  if (guide.width() != low.width * p.scale || guide.height() != low.height * p.scale) {
    throw DimensionError("guide must be the low-res map scaled by the upsampling factor");
  }
  const int s = p.scale;
  const int r = p.radius;
  const double inv_2ss = 1.0 / (2.0 * p.sigma_spatial * p.sigma_spatial);
  const double inv_2sr = 1.0 / (2.0 * p.sigma_range * p.sigma_range);

  // Guide intensity at each low-res pixel's anchor; invalid pixels get zero
  // weight and a zero value so that window rows can be evaluated densely.
  std::vector<double> valid(low.disp.size());
  std::vector<double> disp(low.disp.size());
  for (std::size_t i = 0; i < low.disp.size(); ++i) {
    valid[i] = low.valid[i] ? 1.0 : 0.0;
    disp[i] = low.valid[i] ? low.disp[i] : 0.0;
  }
  std::vector<double> anchor(low.disp.size());
  for (int qy = 0; qy < low.height; ++qy) {
    for (int qx = 0; qx < low.width; ++qx) anchor[low.index(qx, qy)] = guide(qx * s, qy * s);
  }

  // Spatial weights depend only on the sub-pixel phase and the tap offset.
  const int taps = 2 * r + 1;
  std::vector<double> spatial(static_cast<std::size_t>(s * s * taps * taps));
  std::vector<int> centre_offset(static_cast<std::size_t>(s));
  for (int phase = 0; phase < s; ++phase) {
    const double frac = static_cast<double>(phase) / s;
    centre_offset[static_cast<std::size_t>(phase)] = frac >= 0.5 ? 1 : 0;
  }
  for (int py = 0; py < s; ++py) {
    for (int px = 0; px < s; ++px) {
      const double fx = static_cast<double>(px) / s - centre_offset[static_cast<std::size_t>(px)];
      const double fy = static_cast<double>(py) / s - centre_offset[static_cast<std::size_t>(py)];
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const double ex = fx - dx;
          const double ey = fy - dy;
          spatial[static_cast<std::size_t>(((py * s + px) * taps + (dy + r)) * taps + (dx + r))] =
              std::exp(-(ex * ex + ey * ey) * inv_2ss);
        }
      }
    }
  }

  DisparityMap out(guide.width(), guide.height());
  for (int y = 0; y < guide.height(); ++y) {
    const int py = y % s;
    const int cy = y / s + centre_offset[static_cast<std::size_t>(py)];
    for (int x = 0; x < guide.width(); ++x) {
      const int px = x % s;
      const int cx = x / s + centre_offset[static_cast<std::size_t>(px)];
      const double ip = guide(x, y);
      const double* sw = &spatial[static_cast<std::size_t>((py * s + px) * taps * taps)];
      double num = 0.0;
      double den = 0.0;
      const int y0 = std::max(cy - r, 0);
      const int y1 = std::min(cy + r, low.height - 1);
      const int x0 = std::max(cx - r, 0);
      const int x1 = std::min(cx + r, low.width - 1);
      const int n = x1 - x0 + 1;
      for (int qy = y0; qy <= y1; ++qy) {
        const std::size_t q0 = low.index(x0, qy);
        const Row diff = ip - Eigen::Map<const Row>(&anchor[q0], n);
        const Row wgt = Eigen::Map<const Row>(&sw[(qy - cy + r) * taps + (x0 - cx + r)], n) *
                        (-diff.square() * inv_2sr).exp() * Eigen::Map<const Row>(&valid[q0], n);
        num += (wgt * Eigen::Map<const Row>(&disp[q0], n)).sum();
        den += wgt.sum();
      }
      if (den > 0.0) {
        out.set(x, y, num / den);
      }
    }
  }
  return out;
}

}  // namespace uavrecon
