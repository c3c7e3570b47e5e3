#include "polygate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "polygate/error.hpp"

namespace polygate {

bool BBox::valid() const noexcept {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min < x_max && y_min < y_max;
}

void require_valid(const BBox& b) {
  if (!b.valid()) {
    throw DomainError("invalid box (" + std::to_string(b.x_min) + ", " + std::to_string(b.y_min) +
                      ", " + std::to_string(b.x_max) + ", " + std::to_string(b.y_max) + ")");
  }
}

bool NormBox::valid() const noexcept {
  if (class_id < 0) return false;
  if (!(std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h))) return false;
  if (cx < 0.0 || cx > 1.0 || cy < 0.0 || cy > 1.0) return false;
  if (!(w > 0.0 && w <= 1.0 && h > 0.0 && h <= 1.0)) return false;
  return cx - 0.5 * w >= -kNormSlack && cx + 0.5 * w <= 1.0 + kNormSlack &&
         cy - 0.5 * h >= -kNormSlack && cy + 0.5 * h <= 1.0 + kNormSlack;
}

BinaryMask::BinaryMask(int width, int height)
    : BinaryMask(width, height,
                 std::vector<std::uint8_t>(
                     width > 0 && height > 0 ? static_cast<std::size_t>(width) * height : 0, 0)) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width_ <= 0 || height_ <= 0) throw DomainError("mask dimensions must be positive");
  if (bits_.size() != static_cast<std::size_t>(width_) * height_) {
    throw DomainError("mask bit count does not match width*height");
  }
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](auto b) { return b != 0; }));
}

Connectivity connectivity_from_int(int value) {
  if (value == 4) return Connectivity::Four;
  if (value == 8) return Connectivity::Eight;
  throw DomainError("connectivity must be 4 or 8, got " + std::to_string(value));
}

double iou(const BBox& a, const BBox& b) {
  require_valid(a);
  require_valid(b);
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  if (a == b) return 1.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BinaryMask binarize(const GrayImage& image, int threshold) {
  if (image.width <= 0 || image.height <= 0 || image.pixels.empty()) {
    throw DomainError("cannot binarize an empty image");
  }
  if (threshold < 0 || threshold > 255) throw DomainError("threshold must be in [0,255]");
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw DomainError("image pixel count does not match dimensions");
  }
  std::vector<std::uint8_t> bits(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), bits.begin(),
                 [threshold](std::uint8_t v) -> std::uint8_t { return v >= threshold ? 1 : 0; });
  return BinaryMask(image.width, image.height, std::move(bits));
}

namespace {

class DisjointSets {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }

  std::uint32_t find(std::uint32_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void join(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

constexpr std::uint32_t kBackground = 0xFFFFFFFFu;

}  // namespace

std::vector<Component> connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  const bool diagonal = connectivity == Connectivity::Eight;
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(w) * h, kBackground);
  DisjointSets sets;

  // First pass: provisional labels from the already-visited half of the neighborhood.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y)) continue;
      std::uint32_t label = kBackground;
      auto consider = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        const std::uint32_t other = labels[static_cast<std::size_t>(ny) * w + nx];
        if (other == kBackground) return;
        if (label == kBackground) {
          label = other;
        } else {
          sets.join(label, other);
        }
      };
      consider(x - 1, y);
      consider(x, y - 1);
      if (diagonal) {
        consider(x - 1, y - 1);
        consider(x + 1, y - 1);
      }
      if (label == kBackground) label = sets.make();
      labels[static_cast<std::size_t>(y) * w + x] = label;
    }
  }

  // Second pass: gather pixels per root in raster order.
  std::vector<Component> components;
  std::vector<std::uint32_t> slot_of_root;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint32_t label = labels[static_cast<std::size_t>(y) * w + x];
      if (label == kBackground) continue;
      const std::uint32_t root = sets.find(label);
      if (root >= slot_of_root.size()) slot_of_root.resize(root + 1, kBackground);
      if (slot_of_root[root] == kBackground) {
        slot_of_root[root] = static_cast<std::uint32_t>(components.size());
        components.push_back(Component{{}, x, y, x, y});
      }
      Component& c = components[slot_of_root[root]];
      c.pixels.push_back({x, y});
      c.min_x = std::min(c.min_x, x);
      c.max_x = std::max(c.max_x, x);
      c.max_y = std::max(c.max_y, y);
    }
  }

  // Components were created in order of their first raster pixel; a stable
  // sort keeps that as the tie-break for equal (min_y, min_x).
  std::stable_sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
    if (a.min_y != b.min_y) return a.min_y < b.min_y;
    return a.min_x < b.min_x;
  });
  return components;
}

std::vector<BBox> components_to_boxes(const std::vector<Component>& components, std::size_t min_area) {
  std::vector<BBox> boxes;
  boxes.reserve(components.size());
  for (const auto& c : components) {
    if (c.size() < min_area || c.size() == 0) continue;
    boxes.push_back({static_cast<double>(c.min_x), static_cast<double>(c.min_y),
                     static_cast<double>(c.max_x + 1), static_cast<double>(c.max_y + 1)});
  }
  return boxes;
}

NormBox to_norm(const BBox& b, double img_w, double img_h, int class_id) {
  require_valid(b);
  if (!(img_w > 0.0 && img_h > 0.0)) throw DomainError("image dimensions must be positive");
  if (b.x_min < 0.0 || b.y_min < 0.0 || b.x_max > img_w || b.y_max > img_h) {
    throw DomainError("box exceeds image bounds");
  }
  if (class_id < 0) throw DomainError("class id must be non-negative");
  return NormBox{class_id, b.center_x() / img_w, b.center_y() / img_h, b.width() / img_w,
                 b.height() / img_h};
}

BBox from_norm(const NormBox& n, double img_w, double img_h) {
  if (!n.valid()) throw DomainError("invalid normalized box");
  if (!(img_w > 0.0 && img_h > 0.0)) throw DomainError("image dimensions must be positive");
  const double hw = 0.5 * n.w;
  const double hh = 0.5 * n.h;
  BBox b{(n.cx - hw) * img_w, (n.cy - hh) * img_h, (n.cx + hw) * img_w, (n.cy + hh) * img_h};
  require_valid(b);
  return b;
}

}  // namespace polygate
