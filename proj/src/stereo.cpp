#include "uavrecon/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "uavrecon/errors.hpp"

namespace uavrecon {

Cost to_cost(double value) { return static_cast<Cost>(std::llround(value * kCostScale)); }

void BpParams::validate() const {
  if (max_disparity < 2) throw std::invalid_argument("bp.max_disparity must be >= 2");
  if (iterations < 1) throw std::invalid_argument("bp.iterations must be >= 1");
  if (!(tau_data > 0.0)) throw std::invalid_argument("bp.tau_data must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("bp.lambda must be >= 0");
  if (!(tau_smooth >= 1.0)) throw std::invalid_argument("bp.tau_smooth must be >= 1");
}

CostVolume::CostVolume(int width, int height, int labels)
    : width_(width), height_(height), labels_(labels) {
  costs_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                    static_cast<std::size_t>(labels),
                0);
}

MessageField::MessageField(int width, int height, int labels)
    : width_(width), height_(height), labels_(labels) {
  for (auto& m : msgs_) {
    m.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                 static_cast<std::size_t>(labels),
             0);
  }
}

void min_convolution(std::span<const Cost> h, Cost lambda, Cost truncation, std::span<Cost> out) {
  const std::size_t n = h.size();
  std::copy(h.begin(), h.end(), out.begin());
  for (std::size_t d = 1; d < n; ++d) out[d] = std::min(out[d], out[d - 1] + lambda);
  for (std::size_t d = n - 1; d-- > 0;) out[d] = std::min(out[d], out[d + 1] + lambda);
  const Cost floor = *std::min_element(h.begin(), h.end()) + truncation;
  for (std::size_t d = 0; d < n; ++d) out[d] = std::min(out[d], floor);
}

CostVolume build_cost_volume(const ImageGray& left, const ImageGray& right, const BpParams& p) {
  p.validate();
  if (!left.same_size(right)) throw DimensionError("stereo images differ in size");
  CostVolume cv(left.width(), left.height(), p.max_disparity);
  const Cost tau = to_cost(p.tau_data);
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < left.width(); ++x) {
      for (int d = 0; d < p.max_disparity; ++d) {
        if (CostVolume::is_border(x, d)) {
          cv.at(x, y, d) = tau;
        } else {
          cv.at(x, y, d) = std::min(to_cost(std::abs(left(x, y) - right(x - d, y))), tau);
        }
      }
    }
  }
  return cv;
}

MessageField bp_iterate(const CostVolume& cv, const MessageField& msgs, const BpParams& p) {
  if (msgs.width() != cv.width() || msgs.height() != cv.height() || msgs.labels() != cv.labels()) {
    throw DimensionError("message field does not match cost volume");
  }
  const int w = cv.width();
  const int h = cv.height();
  const auto labels = static_cast<std::size_t>(cv.labels());
  const Cost lambda = p.lambda_cost();
  const Cost trunc = p.truncation_cost();

  MessageField next(w, h, cv.labels());
  std::vector<Cost> belief(labels);
  std::vector<Cost> partial(labels);

  // Sends the message from (x, y) that arrives at the neighbour on side `arrives`.
  auto send = [&](From exclude, std::span<Cost> dst, int x, int y) {
    const auto in = msgs.incoming(exclude, x, y);
    for (std::size_t d = 0; d < labels; ++d) partial[d] = belief[d] - in[d];
    min_convolution(partial, lambda, trunc, dst);
    const Cost lo = *std::min_element(dst.begin(), dst.end());
    for (auto& m : dst) m -= lo;
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto data = cv.pixel(x, y);
      const auto l = msgs.incoming(From::Left, x, y);
      const auto r = msgs.incoming(From::Right, x, y);
      const auto u = msgs.incoming(From::Up, x, y);
      const auto dn = msgs.incoming(From::Down, x, y);
      for (std::size_t d = 0; d < labels; ++d) belief[d] = data[d] + l[d] + r[d] + u[d] + dn[d];

      // A message toward the left neighbour excludes what that neighbour sent
      // us, and arrives at it from its right.
      if (x > 0) send(From::Left, next.incoming(From::Right, x - 1, y), x, y);
      if (x + 1 < w) send(From::Right, next.incoming(From::Left, x + 1, y), x, y);
      if (y > 0) send(From::Up, next.incoming(From::Down, x, y - 1), x, y);
      if (y + 1 < h) send(From::Down, next.incoming(From::Up, x, y + 1), x, y);
    }
  }
  return next;
}

DisparityMap bp_decide(const CostVolume& cv, const MessageField& msgs) {
  if (msgs.width() != cv.width() || msgs.height() != cv.height() || msgs.labels() != cv.labels()) {
    throw DimensionError("message field does not match cost volume");
  }
  DisparityMap out(cv.width(), cv.height());
  for (int y = 0; y < cv.height(); ++y) {
    for (int x = 0; x < cv.width(); ++x) {
      const auto data = cv.pixel(x, y);
      const auto l = msgs.incoming(From::Left, x, y);
      const auto r = msgs.incoming(From::Right, x, y);
      const auto u = msgs.incoming(From::Up, x, y);
      const auto dn = msgs.incoming(From::Down, x, y);
      int best = 0;
      Cost best_cost = std::numeric_limits<Cost>::max();
      for (int d = 0; d < cv.labels(); ++d) {
        const auto i = static_cast<std::size_t>(d);
        const Cost e = data[i] + l[i] + r[i] + u[i] + dn[i];
        if (e < best_cost) {
          best_cost = e;
          best = d;
        }
      }
      if (CostVolume::is_border(x, best)) {
        out.invalidate(x, y);
      } else {
        out.set(x, y, best);
      }
    }
  }
  return out;
}

DisparityMap match_stereo(const ImageGray& left, const ImageGray& right, const BpParams& p) {
  const CostVolume cv = build_cost_volume(left, right, p);
  MessageField msgs(cv.width(), cv.height(), cv.labels());
  for (int it = 0; it < p.iterations; ++it) msgs = bp_iterate(cv, msgs, p);
  return bp_decide(cv, msgs);
}

std::int64_t mrf_energy(const CostVolume& cv, std::span<const int> labels, const BpParams& p) {
  const std::size_t n = static_cast<std::size_t>(cv.width()) * static_cast<std::size_t>(cv.height());
  if (labels.size() != n) throw DimensionError("labeling size does not match cost volume");
  const Cost lambda = p.lambda_cost();
  const Cost trunc = p.truncation_cost();
  auto pairwise = [&](int a, int b) -> std::int64_t {
    return std::min<std::int64_t>(static_cast<std::int64_t>(lambda) * std::abs(a - b), trunc);
  };
  std::int64_t e = 0;
  for (int y = 0; y < cv.height(); ++y) {
    for (int x = 0; x < cv.width(); ++x) {
      const int l = labels[static_cast<std::size_t>(y * cv.width() + x)];
      e += cv.at(x, y, l);
      if (x + 1 < cv.width()) e += pairwise(l, labels[static_cast<std::size_t>(y * cv.width() + x + 1)]);
      if (y + 1 < cv.height()) e += pairwise(l, labels[static_cast<std::size_t>((y + 1) * cv.width() + x)]);
    }
  }
  return e;
}

}  // namespace uavrecon
