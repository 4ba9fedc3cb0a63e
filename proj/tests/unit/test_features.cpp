#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include <gtest/gtest.h>

#include "support/test_util.hpp"
#include "uavrecon/errors.hpp"
#include "uavrecon/harris.hpp"
#include "uavrecon/matching.hpp"

using namespace uavrecon;

namespace {

// R at one pixel, summing the Gaussian-weighted structure tensor directly
// over the 2D window (zero contribution outside the image).
double harris_oracle(const ImageGray& img, int x, int y, const HarrisParams& p) {
  const int r = p.window_radius();
  double norm = 0.0;
  for (int i = -r; i <= r; ++i) norm += std::exp(-0.5 * i * i / (p.window_sigma * p.window_sigma));
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const int qx = x + dx, qy = y + dy;
      if (qx < 1 || qy < 1 || qx >= img.width() - 1 || qy >= img.height() - 1) continue;
      const double w = std::exp(-0.5 * (dx * dx + dy * dy) / (p.window_sigma * p.window_sigma)) / (norm * norm);
      const double a = 0.5 * (img(qx + 1, qy) - img(qx - 1, qy));
      const double b = 0.5 * (img(qx, qy + 1) - img(qx, qy - 1));
      sxx += w * a * a;
      sxy += w * a * b;
      syy += w * b * b;
    }
  }
  return sxx * syy - sxy * sxy - p.k * (sxx + syy) * (sxx + syy);
}

double zssd_oracle(const ImageGray& a, int u1, int v1, const ImageGray& b, int u2, int v2, int r) {
  double ma = 0.0, mb = 0.0;
  const int n = (2 * r + 1) * (2 * r + 1);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      ma += a(u1 + dx, v1 + dy);
      mb += b(u2 + dx, v2 + dy);
    }
  }
  ma /= n;
  mb /= n;
  double s = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double e = (a(u1 + dx, v1 + dy) - ma) - (b(u2 + dx, v2 + dy) - mb);
      s += e * e;
    }
  }
  return s;
}

// Smooth random texture: box-blurred noise, so corners are well separated.
ImageGray blob_texture(int w, int h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  const ImageGray noise = testutil::random_gray(w, h, rng);
  ImageGray out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int qx = std::clamp(x + dx, 0, w - 1), qy = std::clamp(y + dy, 0, h - 1);
          s += noise(qx, qy);
          ++n;
        }
      }
      out(x, y) = s / n;
    }
  }
  return out;
}

HarrisParams unbucketed() {
  HarrisParams p;
  p.grid_cols = 1;
  p.grid_rows = 1;
  p.max_per_cell = 1 << 20;
  return p;
}

}  // namespace

TEST(Harris, ConstantImageHasNoCorners) {
  EXPECT_TRUE(harris_detect(ImageGray(40, 30, 0.5), HarrisParams{}).empty());
}

TEST(Harris, SinglePixelIsStrongestCorner) {
  ImageGray img(41, 41, 0.0);
  img(20, 20) = 1.0;
  const auto corners = harris_detect(img, HarrisParams{});
  ASSERT_FALSE(corners.empty());
  EXPECT_LE(std::abs(corners[0].u - 20), 1);
  EXPECT_LE(std::abs(corners[0].v - 20), 1);
}

TEST(Harris, ResponseMatchesWindowOracle) {
  std::mt19937 rng(4);
  const ImageGray img = testutil::random_gray(30, 24, rng);
  HarrisParams p;
  p.window_sigma = 1.2;
  const auto r = harris_response(img, p);
  for (int y = 0; y < 24; y += 3) {
    for (int x = 0; x < 30; x += 2) EXPECT_NEAR(r[static_cast<std::size_t>(y * 30 + x)], harris_oracle(img, x, y, p), 1e-14);
  }
}

TEST(Harris, CornerPositiveEdgeNonPositive) {
  ImageGray corner(40, 40, 0.0), edge(40, 40, 0.0);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (x >= 20 && y >= 20) corner(x, y) = 1.0;
      if (x >= 20) edge(x, y) = 1.0;
    }
  }
  const HarrisParams p;
  EXPECT_GT(harris_response(corner, p)[20 * 40 + 20], 0.0);
  const auto re = harris_response(edge, p);
  for (int y = 10; y < 30; ++y) {
    for (int x = 10; x < 30; ++x) EXPECT_LE(re[static_cast<std::size_t>(y * 40 + x)], 1e-18);
  }
}

TEST(Harris, QuarterTurnRotatesCornerSet) {
  const int n = 64;
  const ImageGray img = blob_texture(n, n, 31);
  ImageGray rot(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) rot(n - 1 - y, x) = img(x, y);
  }
  const auto a = harris_detect(img, unbucketed());
  const auto b = harris_detect(rot, unbucketed());
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a.size(), b.size());
  std::set<std::pair<int, int>> mapped, got;
  for (const Corner& c : a) mapped.insert({n - 1 - c.v, c.u});
  for (const Corner& c : b) got.insert({c.u, c.v});
  EXPECT_EQ(mapped, got);
}

TEST(Harris, BucketingCapsCount) {
  const ImageGray img = blob_texture(120, 90, 2);
  HarrisParams p;
  p.grid_cols = 4;
  p.grid_rows = 3;
  p.max_per_cell = 2;
  const auto corners = harris_detect(img, p);
  EXPECT_LE(corners.size(), 24u);
  EXPECT_GT(corners.size(), 12u);
  for (std::size_t i = 1; i < corners.size(); ++i) EXPECT_GE(corners[i - 1].response, corners[i].response);
  const int margin = p.border_margin();
  for (const Corner& c : corners) {
    EXPECT_GE(c.u, margin);
    EXPECT_LT(c.u, 120 - margin);
    EXPECT_GE(c.v, margin);
    EXPECT_LT(c.v, 90 - margin);
  }
}

TEST(Harris, TooSmallImageThrows) {
  EXPECT_THROW(harris_detect(ImageGray(8, 8), HarrisParams{}), DimensionError);
}

TEST(Harris, ValidationRejectsBadK) {
  HarrisParams p;
  p.k = 0.3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Zssd, IdenticalAndBiasedPatchesCostZero) {
  std::mt19937 rng(6);
  const ImageGray img = testutil::random_gray(20, 20, rng);
  ImageGray biased(20, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) biased(x, y) = img(x, y) + 0.25;
  }
  EXPECT_EQ(zssd_cost(img, 10, 10, img, 10, 10, 3), 0.0);
  EXPECT_NEAR(zssd_cost(img, 10, 10, biased, 10, 10, 3), 0.0, 1e-24);
}

TEST(Zssd, MatchesDirectSumAndIsSymmetric) {
  std::mt19937 rng(7);
  const ImageGray a = testutil::random_gray(16, 16, rng);
  const ImageGray b = testutil::random_gray(16, 16, rng);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> c(2, 13);
    const int u1 = c(rng), v1 = c(rng), u2 = c(rng), v2 = c(rng);
    const double got = zssd_cost(a, u1, v1, b, u2, v2, 2);
    EXPECT_NEAR(got, zssd_oracle(a, u1, v1, b, u2, v2, 2), 1e-12);
    EXPECT_NEAR(got, zssd_cost(b, u2, v2, a, u1, v1, 2), 1e-12);
  }
}

TEST(Zssd, OutOfBoundsPatchThrows) {
  const ImageGray img(10, 10, 0.3);
  EXPECT_THROW(zssd_cost(img, 1, 5, img, 5, 5, 2), std::out_of_range);
  EXPECT_THROW(zssd_cost(img, 5, 5, img, 5, 8, 2), std::out_of_range);
}

TEST(PatchMean, AveragesWindow) {
  ImageGray img(5, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) img(x, y) = x + 10 * y;
  }
  EXPECT_DOUBLE_EQ(patch_mean(img, 2, 2, 1), 22.0);
}

TEST(MatchCorners, SelfMatchAtZeroCost) {
  const ImageGray img = blob_texture(160, 120, 3);
  const auto corners = harris_detect(img, HarrisParams{});
  MatchParams p;
  p.search_radius = 10;
  const CorrespondenceSet set = match_corners(img, corners, img, p);
  ASSERT_FALSE(set.pairs.empty());
  for (const Correspondence& c : set.pairs) {
    EXPECT_EQ(c.u1, c.u2);
    EXPECT_EQ(c.v1, c.v2);
    EXPECT_EQ(c.cost, 0.0);
  }
  std::set<std::size_t> seen;
  for (const Correspondence& c : set.pairs) EXPECT_TRUE(seen.insert(c.corner_index).second);
}

TEST(MatchCorners, RecoversHorizontalShiftOfSeven) {
  const ImageGray wide = blob_texture(200, 120, 9);
  ImageGray img1(190, 120), img2(190, 120);
  for (int y = 0; y < 120; ++y) {
    for (int x = 0; x < 190; ++x) {
      img1(x, y) = wide(x + 7, y);
      img2(x, y) = wide(x, y);
    }
  }
  // img2(x + 7) = img1(x), so every feature moves by +7 in x.
  const auto corners = harris_detect(img1, HarrisParams{});
  MatchParams p;
  p.search_radius = 12;
  const CorrespondenceSet set = match_corners(img1, corners, img2, p);
  const int r = p.patch_radius;
  int interior = 0;
  for (const Corner& c : corners) {
    if (c.u >= r && c.u + 7 + r < 190 && c.v >= r && c.v + r < 120) ++interior;
  }
  int correct = 0;
  for (const Correspondence& c : set.pairs) {
    EXPECT_EQ(c.u2 - c.u1, 7);
    EXPECT_EQ(c.v2, c.v1);
    EXPECT_LE(c.cost, p.max_cost);
    if (c.u2 - c.u1 == 7 && c.v2 == c.v1) ++correct;
  }
  ASSERT_GT(interior, 0);
  EXPECT_GE(static_cast<double>(correct) / interior, 0.95);
}

TEST(MatchCorners, RecoversDiagonalTranslation) {
  const ImageGray wide = blob_texture(220, 160, 12);
  ImageGray img1(200, 140), img2(200, 140);
  for (int y = 0; y < 140; ++y) {
    for (int x = 0; x < 200; ++x) {
      img1(x, y) = wide(x + 13, y + 9);
      img2(x, y) = wide(x + 2, y + 20);
    }
  }
  // img2(x + 11, y - 11) = img1(x, y).
  const auto corners = harris_detect(img1, HarrisParams{});
  const CorrespondenceSet set = match_corners(img1, corners, img2, MatchParams{});
  int interior = 0;
  for (const Corner& c : corners) {
    if (c.u + 11 + 5 < 200 && c.v - 11 - 5 >= 0) ++interior;
  }
  int correct = 0;
  for (const Correspondence& c : set.pairs) {
    if (c.u2 - c.u1 == 11 && c.v2 - c.v1 == -11) ++correct;
  }
  ASSERT_GT(interior, 0);
  EXPECT_GE(static_cast<double>(correct) / interior, 0.95);
}

TEST(MatchCorners, TexturelessTargetIsRejected) {
  const ImageGray img = blob_texture(100, 80, 5);
  const auto corners = harris_detect(img, HarrisParams{});
  ASSERT_FALSE(corners.empty());
  const CorrespondenceSet set = match_corners(img, corners, ImageGray(100, 80, 0.5), MatchParams{});
  EXPECT_TRUE(set.pairs.empty());
}
