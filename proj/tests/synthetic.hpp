#pragma once

// Deterministic synthetic colonoscopy-like frames and masks for tests.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "polygate/image_io.hpp"

namespace synth {

struct Rect {
  int x0, y0, x1, y1;  // half-open
};

struct Frame {
  std::string stem;
  std::vector<Rect> polyps;
  bool corrupted = false;
};

inline polygate::GrayImage mask_of(int w, int h, const std::vector<Rect>& rects) {
  polygate::GrayImage m{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
  for (const auto& r : rects)
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) m.pixels[static_cast<std::size_t>(y) * w + x] = 255;
  return m;
}

/// Reddish mucosa with a vertical gradient, noise, and brighter polyp blobs.
inline polygate::Image frame_image(std::mt19937& rng, int w, int h, const std::vector<Rect>& polyps) {
  std::normal_distribution<double> noise(0.0, 6.0);
  std::uniform_real_distribution<double> shift(-8.0, 8.0);
  const double bias = shift(rng);
  polygate::Image img{w, h, 3, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool in_polyp = false;
      for (const auto& r : polyps) in_polyp |= x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1;
      const double base = 150.0 + bias + 20.0 * y / h + (in_polyp ? 35.0 : 0.0);
      const double rgb[3] = {base + 30.0, base - 50.0, base - 60.0};
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(rgb[c] + noise(rng), 0.0, 255.0);
        img.data[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<std::uint8_t>(v);
      }
    }
  }
  return img;
}

/// Writes `n` frames to root/images and root/masks. Frames listed in
/// `corrupted` are all-black images (masks stay valid). Polyp counts cycle 1, 2, 0.
inline std::vector<Frame> write_corpus(const std::filesystem::path& root, int n, const std::set<int>& corrupted,
                                       unsigned seed, int w = 96, int h = 80) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> size(12, 24);
  std::vector<Frame> frames;
  for (int i = 0; i < n; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%03d", i);
    Frame f{stem, {}, corrupted.count(i) > 0};
    const int count = i % 3 == 0 ? 1 : (i % 3 == 1 ? 2 : 0);
    for (int p = 0; p < count; ++p) {
      const int sw = size(rng);
      const int sh = size(rng);
      // Left and right halves keep two polyps apart.
      const int half = w / 2;
      std::uniform_int_distribution<int> px(p * half, p * half + half - sw - 1);
      std::uniform_int_distribution<int> py(0, h - sh);
      const int x0 = count == 1 ? std::uniform_int_distribution<int>(0, w - sw)(rng) : px(rng);
      const int y0 = py(rng);
      f.polyps.push_back({x0, y0, x0 + sw, y0 + sh});
    }
    polygate::Image img = frame_image(rng, w, h, f.polyps);
    if (f.corrupted) std::fill(img.data.begin(), img.data.end(), std::uint8_t{0});
    polygate::write_png(root / "images" / (f.stem + ".png"), img);
    polygate::write_png(root / "masks" / (f.stem + ".png"), mask_of(w, h, f.polyps));
    frames.push_back(std::move(f));
  }
  return frames;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("polygate_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace synth
