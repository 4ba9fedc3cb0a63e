#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "uavrecon/disparity.hpp"
#include "uavrecon/image.hpp"

namespace uavrecon {

// Matching costs are fixed point: one intensity unit is kCostScale ticks.
// Integer arithmetic makes every message update exact and reproducible.
using Cost = std::int32_t;
inline constexpr double kCostScale = 65536.0;

Cost to_cost(double value);

struct BpParams {
  int max_disparity = 16;  // labels 0 .. max_disparity - 1
  int iterations = 5;
  double tau_data = 0.06;
  double lambda = 0.35;
  double tau_smooth = 4.0;

  void validate() const;
  Cost lambda_cost() const { return to_cost(lambda); }
  /// Saturated pairwise penalty, lambda * tau_smooth.
  Cost truncation_cost() const { return to_cost(lambda * tau_smooth); }
};

/// Data term per pixel and label. Entries with x - d < 0 are "border" labels:
/// they carry the truncated cost and can never be reported as a match.
class CostVolume {
 public:
  CostVolume() = default;
  CostVolume(int width, int height, int labels);

  int width() const { return width_; }
  int height() const { return height_; }
  int labels() const { return labels_; }

  Cost at(int x, int y, int d) const { return costs_[offset(x, y) + static_cast<std::size_t>(d)]; }
  Cost& at(int x, int y, int d) { return costs_[offset(x, y) + static_cast<std::size_t>(d)]; }
  std::span<const Cost> pixel(int x, int y) const {
    return {costs_.data() + offset(x, y), static_cast<std::size_t>(labels_)};
  }
  static bool is_border(int x, int d) { return x - d < 0; }

  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(labels_);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int labels_ = 0;
  std::vector<Cost> costs_;
};

/// Incoming messages per pixel, indexed by the side they arrive from.
enum class From : int { Left = 0, Right = 1, Up = 2, Down = 3 };

class MessageField {
 public:
  MessageField() = default;
  MessageField(int width, int height, int labels);

  int width() const { return width_; }
  int height() const { return height_; }
  int labels() const { return labels_; }

  std::span<const Cost> incoming(From side, int x, int y) const {
    return {msgs_[static_cast<int>(side)].data() + offset(x, y), static_cast<std::size_t>(labels_)};
  }
  std::span<Cost> incoming(From side, int x, int y) {
    return {msgs_[static_cast<int>(side)].data() + offset(x, y), static_cast<std::size_t>(labels_)};
  }

  friend bool operator==(const MessageField&, const MessageField&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(labels_);
  }

  int width_ = 0;
  int height_ = 0;
  int labels_ = 0;
  std::array<std::vector<Cost>, 4> msgs_;
};

/// out(d) = min over d' of h(d') + min(lambda |d - d'|, truncation), in O(labels)
/// via a forward and a backward distance-transform pass.
void min_convolution(std::span<const Cost> h, Cost lambda, Cost truncation, std::span<Cost> out);

CostVolume build_cost_volume(const ImageGray& left, const ImageGray& right, const BpParams& p);

/// One synchronous sweep; every outgoing message reads only `msgs`.
MessageField bp_iterate(const CostVolume& cv, const MessageField& msgs, const BpParams& p);

DisparityMap bp_decide(const CostVolume& cv, const MessageField& msgs);

DisparityMap match_stereo(const ImageGray& left, const ImageGray& right, const BpParams& p);

/// MRF energy of a labeling (data + 4-neighbour truncated-linear smoothness),
/// in cost ticks. `labels` is row-major, one label per pixel.
std::int64_t mrf_energy(const CostVolume& cv, std::span<const int> labels, const BpParams& p);

}  // namespace uavrecon
