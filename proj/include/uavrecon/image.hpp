#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace uavrecon {

/// Single-channel image, row-major, intensities in [0, 1].
class ImageGray {
 public:
  ImageGray() = default;
  ImageGray(int width, int height, double fill = 0.0);
  ImageGray(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  double operator()(int x, int y) const { return data_[index(x, y)]; }
  double& operator()(int x, int y) { return data_[index(x, y)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool same_size(const ImageGray& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImageGray&, const ImageGray&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Three-channel image, row-major, channels in [0, 1].
class ImageRgb {
 public:
  ImageRgb() = default;
  ImageRgb(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  const Rgb& operator()(int x, int y) const { return data_[index(x, y)]; }
  Rgb& operator()(int x, int y) { return data_[index(x, y)]; }

  std::span<const Rgb> data() const { return data_; }

  /// Replicates a gray image into all three channels.
  static ImageRgb from_gray(const ImageGray& gray);

  friend bool operator==(const ImageRgb&, const ImageRgb&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> data_;
};

/// Pinhole camera with 3-term radial distortion. Focal lengths are in pixels
/// along each axis (f/du and f/dv).
struct Intrinsics {
  double f_du = 1.0;
  double f_dv = 1.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;

  void validate() const;
  bool has_distortion() const { return k1 != 0.0 || k2 != 0.0 || k3 != 0.0; }

  /// Intrinsics of an area-downsampled image (factor > 1 shrinks). Pixel
  /// centers are preserved: u_low = (u + 0.5) / factor - 0.5.
  Intrinsics scaled_down(double factor_x, double factor_y) const;
  /// Same camera with the distortion terms removed.
  Intrinsics undistorted() const;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

/// Destination-to-source lookup table: pixel (x, y) of the output reads the
/// input at (src_x, src_y).
struct UndistortMap {
  int width = 0;
  int height = 0;
  std::vector<double> src_x;
  std::vector<double> src_y;

  /// True when the source coordinate of (x, y) lies inside a w x h image.
  bool source_inside(int x, int y, int src_width, int src_height) const;
  static UndistortMap identity(int width, int height);
};

ImageGray to_gray(const ImageRgb& img);

/// Area-weighted box downsampling. Throws std::invalid_argument for zero or
/// enlarging target sizes.
ImageGray downsample_area(const ImageGray& img, int out_w, int out_h);
ImageRgb downsample_area(const ImageRgb& img, int out_w, int out_h);

UndistortMap build_undistort_map(const Intrinsics& intr, int w, int h);

/// Bilinear lookup; sources outside the image produce 0.
ImageGray remap_bilinear(const ImageGray& img, const UndistortMap& map);
ImageRgb remap_bilinear(const ImageRgb& img, const UndistortMap& map);
/// 1 where the map's source falls inside the source image, 0 elsewhere.
std::vector<std::uint8_t> remap_valid_mask(const UndistortMap& map, int src_width,
                                           int src_height);

}  // namespace uavrecon
