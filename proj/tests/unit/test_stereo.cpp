#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/test_util.hpp"
#include "uavrecon/disparity.hpp"
#include "uavrecon/errors.hpp"
#include "uavrecon/stereo.hpp"

using namespace uavrecon;

namespace {

std::vector<Cost> naive_min_convolution(const std::vector<Cost>& h, Cost lambda, Cost trunc) {
  std::vector<Cost> out(h.size(), std::numeric_limits<Cost>::max());
  for (std::size_t d = 0; d < h.size(); ++d) {
    for (std::size_t e = 0; e < h.size(); ++e) {
      const auto dist = static_cast<Cost>(d > e ? d - e : e - d);
      out[d] = std::min(out[d], h[e] + std::min(lambda * dist, trunc));
    }
  }
  return out;
}

// Quadratic-time synchronous sweep, written directly from the message definition.
MessageField naive_sweep(const CostVolume& cv, const MessageField& msgs, const BpParams& p) {
  const int w = cv.width(), h = cv.height(), L = cv.labels();
  const Cost lambda = p.lambda_cost(), trunc = p.truncation_cost();
  MessageField next(w, h, L);
  struct Nb {
    int dx, dy;
    From toward;    // side of (x, y) the neighbour lives on
    From arrives;   // side the message arrives from at the neighbour
  };
  const Nb nbs[] = {{-1, 0, From::Left, From::Right},
                    {1, 0, From::Right, From::Left},
                    {0, -1, From::Up, From::Down},
                    {0, 1, From::Down, From::Up}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (const Nb& nb : nbs) {
        const int nx = x + nb.dx, ny = y + nb.dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        std::vector<Cost> out(static_cast<std::size_t>(L), std::numeric_limits<Cost>::max());
        for (int d = 0; d < L; ++d) {
          for (int dp = 0; dp < L; ++dp) {
            Cost s = cv.at(x, y, dp);
            for (From side : {From::Left, From::Right, From::Up, From::Down}) {
              if (side != nb.toward) s += msgs.incoming(side, x, y)[static_cast<std::size_t>(dp)];
            }
            s += std::min(lambda * std::abs(d - dp), trunc);
            out[static_cast<std::size_t>(d)] = std::min(out[static_cast<std::size_t>(d)], s);
          }
        }
        const Cost lo = *std::min_element(out.begin(), out.end());
        auto dst = next.incoming(nb.arrives, nx, ny);
        for (int d = 0; d < L; ++d) dst[static_cast<std::size_t>(d)] = out[static_cast<std::size_t>(d)] - lo;
      }
    }
  }
  return next;
}

CostVolume random_volume(int w, int h, int labels, std::mt19937& rng, Cost max_cost) {
  std::uniform_int_distribution<Cost> u(0, max_cost);
  CostVolume cv(w, h, labels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int d = 0; d < labels; ++d) cv.at(x, y, d) = u(rng);
    }
  }
  return cv;
}

std::int64_t exhaustive_min_energy(const CostVolume& cv, const BpParams& p, std::vector<int>* best_labels = nullptr) {
  const int n = cv.width() * cv.height();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  while (true) {
    const std::int64_t e = mrf_energy(cv, labels, p);
    if (e < best) {
      best = e;
      if (best_labels) *best_labels = labels;
    }
    int i = 0;
    while (i < n && ++labels[static_cast<std::size_t>(i)] == cv.labels()) labels[static_cast<std::size_t>(i++)] = 0;
    if (i == n) break;
  }
  return best;
}

// Labels chosen by the belief argmin (ties to the smaller label), including
// border labels that bp_decide would report as invalid.
std::vector<int> bp_labels(const CostVolume& cv, const BpParams& p) {
  MessageField m(cv.width(), cv.height(), cv.labels());
  for (int i = 0; i < p.iterations; ++i) m = bp_iterate(cv, m, p);
  std::vector<int> out;
  for (int y = 0; y < cv.height(); ++y) {
    for (int x = 0; x < cv.width(); ++x) {
      int best = 0;
      Cost best_cost = std::numeric_limits<Cost>::max();
      for (int l = 0; l < cv.labels(); ++l) {
        const auto i = static_cast<std::size_t>(l);
        const Cost e = cv.at(x, y, l) + m.incoming(From::Left, x, y)[i] + m.incoming(From::Right, x, y)[i] +
                       m.incoming(From::Up, x, y)[i] + m.incoming(From::Down, x, y)[i];
        if (e < best_cost) {
          best_cost = e;
          best = l;
        }
      }
      out.push_back(best);
    }
  }
  return out;
}

struct SmallInstance {
  ImageGray left;
  ImageGray right;
};

// Random image pair of at most 2x3 pixels (either orientation) with 2 or 3 labels.
SmallInstance small_instance(std::mt19937& rng, BpParams& p) {
  std::uniform_int_distribution<int> wd(1, 3), hd(1, 2), ld(2, 3), flip(0, 1);
  int w = wd(rng), h = hd(rng);
  if (flip(rng)) std::swap(w, h);
  p.max_disparity = ld(rng);
  return {testutil::random_gray(w, h, rng), testutil::random_gray(w, h, rng)};
}

ImageGray texture(int w, int h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  return testutil::random_gray(w, h, rng);
}

double interior_fraction_at(const DisparityMap& d, int value, int margin) {
  int hit = 0, total = 0;
  for (int y = margin; y < d.height - margin; ++y) {
    for (int x = margin; x < d.width - margin; ++x) {
      ++total;
      if (d.is_valid(x, y) && d.at(x, y) == value) ++hit;
    }
  }
  return static_cast<double>(hit) / total;
}

}  // namespace

TEST(MinConvolution, MatchesQuadraticFormExactly) {
  std::mt19937 rng(42);
  std::uniform_int_distribution<Cost> u(0, 400000);
  std::uniform_int_distribution<int> len(1, 24);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Cost> h(static_cast<std::size_t>(len(rng)));
    for (Cost& c : h) c = u(rng);
    const Cost lambda = u(rng) / 8, trunc = u(rng);
    std::vector<Cost> fast(h.size());
    min_convolution(h, lambda, trunc, fast);
    EXPECT_EQ(fast, naive_min_convolution(h, lambda, trunc));
  }
}

TEST(BpIterate, ZeroVolumeIsFixedPoint) {
  const BpParams p;
  const CostVolume cv(6, 4, 5);
  MessageField m(6, 4, 5);
  const MessageField zero = m;
  for (int i = 0; i < 7; ++i) m = bp_iterate(cv, m, p);
  EXPECT_EQ(m, zero);
}

TEST(BpIterate, TwoPixelMessagesMatchHandEnumeration) {
  BpParams p;
  p.max_disparity = 2;
  CostVolume cv(2, 1, 2);
  cv.at(0, 0, 0) = 100;
  cv.at(0, 0, 1) = 30000;
  cv.at(1, 0, 0) = 50000;
  cv.at(1, 0, 1) = 0;
  const MessageField m = bp_iterate(cv, MessageField(2, 1, 2), p);
  const Cost lam = p.lambda_cost(), tr = p.truncation_cost();
  // Message from pixel 0 into pixel 1, label d: min over d' of data0(d') + V(d, d').
  const Cost to1_d0 = std::min<Cost>(100, 30000 + std::min(lam, tr));
  const Cost to1_d1 = std::min<Cost>(100 + std::min(lam, tr), 30000);
  const Cost lo1 = std::min(to1_d0, to1_d1);
  EXPECT_EQ(m.incoming(From::Left, 1, 0)[0], to1_d0 - lo1);
  EXPECT_EQ(m.incoming(From::Left, 1, 0)[1], to1_d1 - lo1);
  const Cost to0_d0 = std::min<Cost>(50000, 0 + std::min(lam, tr));
  const Cost to0_d1 = std::min<Cost>(50000 + std::min(lam, tr), 0);
  const Cost lo0 = std::min(to0_d0, to0_d1);
  EXPECT_EQ(m.incoming(From::Right, 0, 0)[0], to0_d0 - lo0);
  EXPECT_EQ(m.incoming(From::Right, 0, 0)[1], to0_d1 - lo0);
}

TEST(BpIterate, FiveSweepsMatchQuadraticOracle) {
  std::mt19937 rng(9);
  BpParams p;
  p.max_disparity = 4;
  p.tau_smooth = 2.0;
  const CostVolume cv = random_volume(3, 3, 4, rng, to_cost(p.tau_data));
  MessageField fast(3, 3, 4), slow(3, 3, 4);
  for (int i = 0; i < 5; ++i) {
    fast = bp_iterate(cv, fast, p);
    slow = naive_sweep(cv, slow, p);
    ASSERT_EQ(fast, slow) << "sweep " << i;
  }
}

TEST(BpIterate, MessagesAreNormalisedToZeroMinimum) {
  std::mt19937 rng(17);
  const BpParams p;
  const CostVolume cv = random_volume(7, 5, 6, rng, to_cost(p.tau_data));
  MessageField m(7, 5, 6);
  for (int i = 0; i < 4; ++i) {
    m = bp_iterate(cv, m, p);
    for (From side : {From::Left, From::Right, From::Up, From::Down}) {
      for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 7; ++x) {
          const bool exists = (side == From::Left && x > 0) || (side == From::Right && x < 6) ||
                              (side == From::Up && y > 0) || (side == From::Down && y < 4);
          if (!exists) continue;
          const auto in = m.incoming(side, x, y);
          EXPECT_EQ(*std::min_element(in.begin(), in.end()), 0);
        }
      }
    }
  }
}

TEST(BpIterate, RejectsMismatchedField) {
  const CostVolume cv(4, 4, 3);
  EXPECT_THROW(bp_iterate(cv, MessageField(4, 3, 3), BpParams{}), DimensionError);
}

TEST(CostVolume, TruncatedAbsoluteDifference) {
  BpParams p;
  p.max_disparity = 3;
  const ImageGray left(4, 1, {0.5, 0.52, 0.9, 0.1});
  const ImageGray right(4, 1, {0.5, 0.5, 0.5, 0.5});
  const CostVolume cv = build_cost_volume(left, right, p);
  EXPECT_EQ(cv.at(0, 0, 0), 0);
  EXPECT_EQ(cv.at(1, 0, 1), to_cost(0.02));
  EXPECT_EQ(cv.at(2, 0, 2), to_cost(p.tau_data));
  EXPECT_EQ(cv.at(0, 0, 1), to_cost(p.tau_data));  // border label
  EXPECT_TRUE(CostVolume::is_border(1, 2));
  EXPECT_FALSE(CostVolume::is_border(2, 2));
}

TEST(CostVolume, RejectsSizeMismatch) {
  EXPECT_THROW(build_cost_volume(ImageGray(4, 4), ImageGray(5, 4), BpParams{}), DimensionError);
}

TEST(BpDecide, ZeroMessagesGiveDataArgmin) {
  CostVolume cv(5, 2, 4);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 5; ++x) {
      for (int d = 0; d < 4; ++d) cv.at(x, y, d) = 1000 + 10 * std::abs(d - x % 4);
    }
  }
  const DisparityMap out = bp_decide(cv, MessageField(5, 2, 4));
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 5; ++x) {
      ASSERT_TRUE(out.is_valid(x, y));
      EXPECT_EQ(out.at(x, y), x % 4);
    }
  }
}

TEST(BpDecide, TiesGoToSmallerLabelAndBorderWinnersAreInvalid) {
  CostVolume cv(3, 1, 3);
  cv.at(2, 0, 1) = 0;  // all zero at x = 2: tie resolves to 0
  cv.at(0, 0, 0) = 5;
  cv.at(0, 0, 1) = 1;  // border winner at x = 0
  cv.at(0, 0, 2) = 9;
  cv.at(1, 0, 0) = 4;
  cv.at(1, 0, 1) = 2;
  cv.at(1, 0, 2) = 2;
  const DisparityMap out = bp_decide(cv, MessageField(3, 1, 3));
  EXPECT_FALSE(out.is_valid(0, 0));
  EXPECT_EQ(out.at(1, 0), 1);
  EXPECT_EQ(out.at(2, 0), 0);
}

TEST(MatchStereo, IdenticalImagesGiveZeroDisparity) {
  const ImageGray img = texture(40, 30, 1);
  const DisparityMap d = match_stereo(img, img, BpParams{});
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) {
      ASSERT_TRUE(d.is_valid(x, y));
      EXPECT_EQ(d.at(x, y), 0.0);
    }
  }
}

TEST(MatchStereo, RecoversThreePixelShift) {
  const ImageGray wide = texture(67, 48, 21);
  ImageGray left(64, 48), right(64, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      left(x, y) = wide(x, y);
      right(x, y) = wide(x + 3, y);
    }
  }
  // right(x - 3) = wide(x) = left(x), so the true disparity is 3.
  const DisparityMap d = match_stereo(left, right, BpParams{});
  EXPECT_GE(interior_fraction_at(d, 3, 4), 0.95);
}

TEST(MatchStereo, RecoversSevenPixelShift) {
  const ImageGray wide = texture(107, 60, 5);
  ImageGray left(100, 60), right(100, 60);
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 100; ++x) {
      left(x, y) = wide(x, y);
      right(x, y) = wide(x + 7, y);
    }
  }
  const DisparityMap d = match_stereo(left, right, BpParams{});
  EXPECT_GE(interior_fraction_at(d, 7, 8), 0.95);
}

TEST(MatchStereo, TwoByTwoFindsExhaustiveMinimum) {
  BpParams p;
  p.max_disparity = 2;
  const ImageGray left(2, 2, {0.3, 0.7, 0.6, 0.2});
  const ImageGray right(2, 2, {0.7, 0.31, 0.2, 0.58});
  const CostVolume cv = build_cost_volume(left, right, p);
  std::vector<int> best;
  const std::int64_t e_min = exhaustive_min_energy(cv, p, &best);
  EXPECT_EQ(mrf_energy(cv, bp_labels(cv, p), p), e_min);
  // Column 0 has no right-image pixel at disparity 1, so that winner is reported invalid.
  const DisparityMap d = match_stereo(left, right, p);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      const int label = best[static_cast<std::size_t>(y * 2 + x)];
      EXPECT_EQ(d.is_valid(x, y), !CostVolume::is_border(x, label));
      if (d.is_valid(x, y)) EXPECT_EQ(d.at(x, y), label);
    }
  }
}

TEST(MatchStereo, EnergyNearGlobalMinimumOnSmallInstances) {
  std::mt19937 rng(2024);
  int close = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BpParams p;
    const SmallInstance inst = small_instance(rng, p);
    const CostVolume cv = build_cost_volume(inst.left, inst.right, p);
    const std::vector<int> labels = bp_labels(cv, p);
    const DisparityMap d = match_stereo(inst.left, inst.right, p);
    for (int y = 0; y < cv.height(); ++y) {
      for (int x = 0; x < cv.width(); ++x) {
        if (d.is_valid(x, y)) EXPECT_EQ(d.at(x, y), labels[static_cast<std::size_t>(y * cv.width() + x)]);
      }
    }
    const std::int64_t e_bp = mrf_energy(cv, labels, p);
    const std::int64_t e_zero = mrf_energy(cv, std::vector<int>(labels.size(), 0), p);
    const std::int64_t e_min = exhaustive_min_energy(cv, p);
    if (e_bp <= e_zero && static_cast<double>(e_bp) <= 1.1 * static_cast<double>(e_min)) ++close;
  }
  EXPECT_GE(close, 90);
}

TEST(MatchStereo, TreeShapedInstancesAreSolvedExactly) {
  // On a single row or column, min-sum message passing is exact once messages
  // have crossed the chain.
  std::mt19937 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    BpParams p;
    p.max_disparity = 3;
    const bool row = trial % 2 == 0;
    const CostVolume cv = random_volume(row ? 3 : 1, row ? 1 : 3, 3, rng, to_cost(p.tau_data));
    EXPECT_EQ(mrf_energy(cv, bp_labels(cv, p), p), exhaustive_min_energy(cv, p));
  }
}

TEST(MatchStereo, Deterministic) {
  const ImageGray a = texture(48, 32, 3), b = texture(48, 32, 4);
  EXPECT_EQ(match_stereo(a, b, BpParams{}), match_stereo(a, b, BpParams{}));
}

TEST(BpParams, ValidationRejectsBadValues) {
  BpParams p;
  p.max_disparity = 1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = BpParams{};
  p.tau_data = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = BpParams{};
  p.iterations = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(DisparityIo, RoundTripQuantisesToQuarterStep) {
  const auto dir = testutil::scratch_dir("disp");
  DisparityMap d(5, 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 5; ++x) {
      if ((x + y) % 3 == 0) {
        d.invalidate(x, y);
      } else {
        d.set(x, y, 0.37 * x + 2.0 * y + 0.001);
      }
    }
  }
  write_disparity(dir / "d", d);
  const DisparityMap back = read_disparity(dir / "d");
  ASSERT_EQ(back.width, 5);
  ASSERT_EQ(back.height, 3);
  EXPECT_EQ(back.valid, d.valid);
  for (std::size_t i = 0; i < d.disp.size(); ++i) EXPECT_NEAR(back.disp[i], d.disp[i], 0.5 / 256.0 + 1e-12);
}
