#pragma once

#include <cstdint>
#include <vector>

namespace polygate {

/// Axis-aligned box in continuous pixel coordinates (y down).
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  double center_x() const noexcept { return 0.5 * (x_min + x_max); }
  double center_y() const noexcept { return 0.5 * (y_min + y_max); }

  /// Finite coordinates and strictly positive extent on both axes.
  bool valid() const noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Throws DomainError unless `b.valid()`.
void require_valid(const BBox& b);

/// YOLO-style box: class plus center/size normalized by the image dimensions.
struct NormBox {
  int class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const noexcept;

  friend bool operator==(const NormBox&, const NormBox&) = default;
};

/// Slack allowed on the image border for normalized boxes.
inline constexpr double kNormSlack = 1e-6;

/// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

class BinaryMask {
 public:
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }

  std::size_t count() const noexcept;
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// One connected set of foreground pixels. Bounds are inclusive pixel indices.
struct Component {
  std::vector<Pixel> pixels;  // raster order
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;
  int max_y = 0;

  std::size_t size() const noexcept { return pixels.size(); }
};

enum class Connectivity { Four = 4, Eight = 8 };

/// Throws DomainError unless `value` is 4 or 8.
Connectivity connectivity_from_int(int value);

double iou(const BBox& a, const BBox& b);

/// Bit set iff intensity >= threshold.
BinaryMask binarize(const GrayImage& image, int threshold = 128);

/// Maximal connected foreground sets, ordered by (min_y, min_x) of their bounds.
std::vector<Component> connected_components(const BinaryMask& mask,
                                             Connectivity connectivity = Connectivity::Eight);

/// Pixel-tight half-open boxes (x_max = rightmost pixel + 1); components with
/// fewer than `min_area` pixels are dropped.
std::vector<BBox> components_to_boxes(const std::vector<Component>& components,
                                       std::size_t min_area = 64);

NormBox to_norm(const BBox& b, double img_w, double img_h, int class_id = 0);
BBox from_norm(const NormBox& n, double img_w, double img_h);

}  // namespace polygate
