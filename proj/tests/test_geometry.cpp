#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "polygate/error.hpp"
#include "polygate/geometry.hpp"

using namespace polygate;

namespace {

BinaryMask mask_from(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m.set(x, y, rows[y][x] == '#');
  return m;
}

BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
  std::bernoulli_distribution bit(density);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, bit(rng));
  return m;
}

BBox random_box(std::mt19937& rng, double extent) {
  std::uniform_real_distribution<double> u(0.0, extent);
  double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  if (a == b) b += 1.0;
  if (c == d) d += 1.0;
  return {std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
}

}  // namespace

TEST_CASE("iou worked values") {
  CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0);
  CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == 0.0);
  // 1/7: confirmed by a 200 cells/unit rasterization count in the oracle script.
  CHECK(iou({0, 0, 2, 2}, {1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  // Edge-touching boxes have zero intersection area.
  CHECK(iou({0, 0, 1, 1}, {1, 0, 2, 1}) == 0.0);
}

TEST_CASE("iou rejects invalid boxes") {
  CHECK_THROWS_AS(iou({0, 0, 0, 1}, {0, 0, 1, 1}), DomainError);
  CHECK_THROWS_AS(iou({0, 0, 1, 1}, {2, 0, 1, 1}), DomainError);
  CHECK_THROWS_AS(iou({0, 0, std::nan(""), 1}, {0, 0, 1, 1}), DomainError);
}

TEST_CASE("iou properties on random boxes") {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const BBox a = random_box(rng, 10.0);
    const BBox b = random_box(rng, 10.0);
    const double ab = iou(a, b);
    CHECK(ab == iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(iou(a, a) == 1.0);
    if (!(a == b)) CHECK(ab < 1.0);
  }
}

TEST_CASE("binarize") {
  GrayImage zeros{4, 3, std::vector<std::uint8_t>(12, 0)};
  CHECK(binarize(zeros, 128).count() == 0);

  GrayImage full{4, 3, std::vector<std::uint8_t>(12, 255)};
  CHECK(binarize(full, 128).count() == 12);

  GrayImage checker{8, 8, std::vector<std::uint8_t>(64)};
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) checker.pixels[y * 8 + x] = (x + y) % 2 ? 255 : 0;
  const BinaryMask m = binarize(checker, 128);
  CHECK(m.count() == 32);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(m.get(x, y) == ((x + y) % 2 == 1));

  GrayImage edge{2, 1, {127, 128}};
  const BinaryMask e = binarize(edge, 128);
  CHECK_FALSE(e.get(0, 0));
  CHECK(e.get(1, 0));

  CHECK_THROWS_AS(binarize(GrayImage{}, 128), DomainError);
  CHECK_THROWS_AS(binarize(full, 256), DomainError);
}

TEST_CASE("connected components fixtures") {
  SUBCASE("empty mask") { CHECK(connected_components(BinaryMask(5, 5)).empty()); }

  SUBCASE("two squares with a gap") {
    const auto m = mask_from({
        "###..###",
        "###..###",
        "###..###",
    });
    const auto comps = connected_components(m, Connectivity::Eight);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].size() == 9);
    CHECK(comps[1].size() == 9);
    CHECK(comps[0].min_x == 0);
    CHECK(comps[1].min_x == 5);
  }

  SUBCASE("diagonal touch depends on connectivity") {
    const auto m = mask_from({
        "#.",
        ".#",
    });
    CHECK(connected_components(m, Connectivity::Eight).size() == 1);
    CHECK(connected_components(m, Connectivity::Four).size() == 2);
  }

  SUBCASE("U shape merges through the bottom") {
    const auto m = mask_from({
        "#...#",
        "#...#",
        "#####",
    });
    const auto comps = connected_components(m, Connectivity::Four);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].size() == 9);
  }

  SUBCASE("ordering by (min_y, min_x)") {
    const auto m = mask_from({
        "....#",
        "#....",
        "..#..",
    });
    const auto comps = connected_components(m, Connectivity::Four);
    REQUIRE(comps.size() == 3);
    CHECK(comps[0].min_y == 0);
    CHECK(comps[1].min_x == 0);
    CHECK(comps[2].min_y == 2);
  }
}

TEST_CASE("connected components match flood fill on random masks") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> side(1, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const int conn = trial % 2 ? 4 : 8;
    const auto m = random_mask(rng, side(rng), side(rng), 0.45);
    const auto comps = connected_components(m, connectivity_from_int(conn));
    const auto expected = oracle::flood_fill(m, conn);

    std::set<std::set<std::pair<int, int>>> got;
    for (const auto& c : comps) {
      std::set<std::pair<int, int>> s;
      for (const auto& p : c.pixels) s.insert({p.x, p.y});
      CHECK(s.size() == c.size());
      got.insert(s);
    }
    CHECK(got == std::set<std::set<std::pair<int, int>>>(expected.begin(), expected.end()));
    for (std::size_t i = 1; i < comps.size(); ++i) {
      const bool ordered = comps[i - 1].min_y < comps[i].min_y ||
                           (comps[i - 1].min_y == comps[i].min_y && comps[i - 1].min_x <= comps[i].min_x);
      CHECK(ordered);
    }
  }
}

TEST_CASE("components to boxes") {
  BinaryMask m(10, 10);
  for (int y = 3; y <= 7; ++y)
    for (int x = 2; x <= 5; ++x) m.set(x, y);
  const auto boxes = components_to_boxes(connected_components(m), 1);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == BBox{2, 3, 6, 8});

  BinaryMask small(6, 6);
  small.set(1, 1);
  small.set(2, 1);
  small.set(1, 2);
  small.set(2, 2);
  CHECK(components_to_boxes(connected_components(small), 16).empty());

  BinaryMask two(40, 20);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) two.set(x, y);
  for (int x = 20; x < 28; ++x) two.set(x, 15);
  CHECK(components_to_boxes(connected_components(two), 16).size() == 1);
}

TEST_CASE("component boxes are pixel tight") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_mask(rng, 32, 32, 0.3);
    const auto comps = connected_components(m);
    const auto boxes = components_to_boxes(comps, 0);
    REQUIRE(boxes.size() == comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
      bool touches[4] = {false, false, false, false};
      for (const auto& p : comps[i].pixels) {
        CHECK(p.x >= boxes[i].x_min);
        CHECK(p.x + 1 <= boxes[i].x_max);
        CHECK(p.y >= boxes[i].y_min);
        CHECK(p.y + 1 <= boxes[i].y_max);
        touches[0] |= p.x == boxes[i].x_min;
        touches[1] |= p.x + 1 == boxes[i].x_max;
        touches[2] |= p.y == boxes[i].y_min;
        touches[3] |= p.y + 1 == boxes[i].y_max;
      }
      CHECK((touches[0] && touches[1] && touches[2] && touches[3]));
    }
  }
}

TEST_CASE("normalized conversion") {
  const NormBox full = to_norm({0, 0, 640, 480}, 640, 480);
  CHECK(full.cx == 0.5);
  CHECK(full.cy == 0.5);
  CHECK(full.w == 1.0);
  CHECK(full.h == 1.0);

  CHECK(from_norm({0, 0.5, 0.5, 0.5, 0.5}, 100, 100) == BBox{25, 25, 75, 75});

  CHECK_THROWS_AS(to_norm({0, 0, 101, 50}, 100, 100), DomainError);
  CHECK_THROWS_AS(to_norm({-1, 0, 10, 50}, 100, 100), DomainError);
  CHECK_THROWS_AS(from_norm({0, 0.9, 0.5, 0.5, 0.5}, 100, 100), DomainError);
}

TEST_CASE("normalized round trip on 10000 random boxes") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dim(1.0, 4000.0);
  for (int i = 0; i < 10000; ++i) {
    const double w = dim(rng);
    const double h = dim(rng);
    std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h);
    double a = ux(rng), b = ux(rng), c = uy(rng), d = uy(rng);
    if (a == b || c == d) continue;
    const BBox box{std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
    const BBox back = from_norm(to_norm(box, w, h), w, h);
    CHECK(std::abs(back.x_min - box.x_min) <= 1e-9);
    CHECK(std::abs(back.y_min - box.y_min) <= 1e-9);
    CHECK(std::abs(back.x_max - box.x_max) <= 1e-9);
    CHECK(std::abs(back.y_max - box.y_max) <= 1e-9);
  }
}
