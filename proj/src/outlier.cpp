#include "polygate/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polygate/error.hpp"

namespace polygate {

namespace {

struct AxisSpan {
  int first = 0;                 // first source index touched
  std::vector<double> weights;   // overlap of each source cell with the output cell
};

// Overlap of source cells [x, x+1) with the output cell [j*scale, (j+1)*scale).
std::vector<AxisSpan> area_weights(int src, int dst) {
  const double scale = static_cast<double>(src) / dst;
  std::vector<AxisSpan> spans(dst);
  for (int j = 0; j < dst; ++j) {
    const double lo = j * scale;
    const double hi = (j + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
    spans[j].first = first;
    for (int x = first; x <= last; ++x) {
      const double overlap = std::min(hi, x + 1.0) - std::max(lo, static_cast<double>(x));
      spans[j].weights.push_back(std::max(0.0, overlap));
    }
  }
  return spans;
}

std::vector<double> luminance(const Image& image) {
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  std::vector<double> out(n);
  if (image.channels == 1) {
    std::copy(image.data.begin(), image.data.begin() + static_cast<std::ptrdiff_t>(n), out.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = 0.299 * image.data[3 * i] + 0.587 * image.data[3 * i + 1] + 0.114 * image.data[3 * i + 2];
    }
  }
  return out;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

void validate_points(const std::vector<FeatureVector>& points) {
  if (points.empty()) return;
  const std::size_t dim = points.front().values.size();
  for (const auto& p : points) {
    if (p.values.size() != dim) throw DomainError("feature vectors differ in length: " + p.sample_id);
    for (double v : p.values) {
      if (!std::isfinite(v)) throw DomainError("non-finite feature value in " + p.sample_id);
    }
  }
}

}  // namespace

FeatureVector extract_features(std::string sample_id, const Image& image, int side) {
  if (side < 2) throw DomainError("feature side must be >= 2");
  if (image.width <= 0 || image.height <= 0 || image.data.empty()) {
    throw DomainError("cannot featurize an empty image: " + sample_id);
  }
  if (image.channels != 1 && image.channels != 3) throw DomainError("unsupported channel count");

  const std::vector<double> lum = luminance(image);
  const auto cols = area_weights(image.width, side);
  const auto rows = area_weights(image.height, side);
  const double cell_area = (static_cast<double>(image.width) / side) * (static_cast<double>(image.height) / side);

  FeatureVector fv{std::move(sample_id), std::vector<double>(static_cast<std::size_t>(side) * side)};
  std::vector<double> row_sums(side);
  for (int i = 0; i < side; ++i) {
    std::fill(row_sums.begin(), row_sums.end(), 0.0);
    const AxisSpan& rs = rows[i];
    for (std::size_t dy = 0; dy < rs.weights.size(); ++dy) {
      const double wy = rs.weights[dy];
      if (wy == 0.0) continue;
      const std::size_t base = static_cast<std::size_t>(rs.first + static_cast<int>(dy)) * image.width;
      for (int j = 0; j < side; ++j) {
        const AxisSpan& cs = cols[j];
        double acc = 0.0;
        for (std::size_t dx = 0; dx < cs.weights.size(); ++dx) {
          acc += cs.weights[dx] * lum[base + static_cast<std::size_t>(cs.first) + dx];
        }
        row_sums[j] += wy * acc;
      }
    }
    for (int j = 0; j < side; ++j) {
      fv.values[static_cast<std::size_t>(i) * side + j] = row_sums[j] / cell_area;
    }
  }
  return fv;
}

void standardize_features(std::vector<FeatureVector>& dataset) {
  if (dataset.empty()) return;
  validate_points(dataset);
  const std::size_t dim = dataset.front().values.size();
  const double n = static_cast<double>(dataset.size());
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& p : dataset) mean += p.values[d];
    mean /= n;
    double var = 0.0;
    for (const auto& p : dataset) var += (p.values[d] - mean) * (p.values[d] - mean);
    const double stdev = std::sqrt(var / n);
    for (auto& p : dataset) p.values[d] = stdev < 1e-12 ? 0.0 : (p.values[d] - mean) / stdev;
  }
}

std::vector<FeatureVector> featurize_files(
    const std::vector<std::pair<std::string, std::filesystem::path>>& files, int side) {
  std::vector<FeatureVector> out;
  out.reserve(files.size());
  for (const auto& [id, path] : files) out.push_back(extract_features(id, load_image(path), side));
  standardize_features(out);
  return out;
}

std::vector<NeighborSet> knn(const std::vector<FeatureVector>& points, int k) {
  if (k < 1) throw DomainError("k must be >= 1");
  const std::size_t n = points.size();
  if (n <= static_cast<std::size_t>(k)) {
    throw DomainError("need more than k samples for k-NN (n=" + std::to_string(n) +
                      ", k=" + std::to_string(k) + ")");
  }
  validate_points(points);

  // Symmetric distance table, each entry computed once.
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean(points[i].values, points[j].values);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }

  std::vector<NeighborSet> sets(n);
  std::vector<Neighbor> row;
  row.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back({j, dist[i * n + j]});
    }
    std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    });
    const double kd = row[static_cast<std::size_t>(k) - 1].distance;
    auto end = std::find_if(row.begin() + k, row.end(), [kd](const Neighbor& nb) { return nb.distance > kd; });
    sets[i].k_distance = kd;
    sets[i].neighbors.assign(row.begin(), end);
  }
  return sets;
}

NeighborIndex::NeighborIndex(std::vector<FeatureVector> points, int k)
    : points_(std::move(points)), k_(k), sets_(knn(points_, k)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!by_id_.emplace(points_[i].sample_id, i).second) {
      throw DomainError("duplicate sample id: " + points_[i].sample_id);
    }
  }
}

std::size_t NeighborIndex::index_of(std::string_view sample_id) const {
  auto it = by_id_.find(std::string(sample_id));
  if (it == by_id_.end()) throw DomainError("unknown sample id: " + std::string(sample_id));
  return it->second;
}

double NeighborIndex::distance(std::size_t a, std::size_t b) const {
  return euclidean(points_.at(a).values, points_.at(b).values);
}

double NeighborIndex::reach_dist(std::size_t p, std::size_t s) const {
  return std::max(sets_.at(s).k_distance, distance(p, s));
}

double NeighborIndex::reach_dist(std::string_view p_id, std::string_view s_id) const {
  return reach_dist(index_of(p_id), index_of(s_id));
}

double NeighborIndex::lrd(std::size_t p) const {
  const NeighborSet& set = sets_.at(p);
  double sum = 0.0;
  for (const Neighbor& nb : set.neighbors) sum += std::max(sets_[nb.index].k_distance, nb.distance);
  const double mean = sum / static_cast<double>(set.neighbors.size());
  return 1.0 / std::max(mean, kMinMeanReachability);
}

double NeighborIndex::lrd(std::string_view p_id) const { return lrd(index_of(p_id)); }

LofResult lof_scores(const std::vector<FeatureVector>& points, int k) {
  const NeighborIndex index(points, k);
  const std::size_t n = index.size();
  std::vector<double> densities(n);
  for (std::size_t i = 0; i < n; ++i) densities[i] = index.lrd(i);

  LofResult result;
  result.scores.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nbs = index.neighbors(i).neighbors;
    double sum = 0.0;
    for (const Neighbor& nb : nbs) sum += densities[nb.index];
    const double score = sum / static_cast<double>(nbs.size()) / densities[i];
    result.scores.push_back({points[i].sample_id, score, densities[i]});
  }
  return result;
}

std::size_t removal_count(std::size_t n, double contamination) {
  if (!(contamination >= 0.0 && contamination < 1.0)) {
    throw DomainError("contamination must be in [0, 1)");
  }
  // Guard against products like 0.29 * 100 landing just below an integer.
  return static_cast<std::size_t>(std::floor(contamination * static_cast<double>(n) + 1e-9));
}

LofResult filter_outliers(LofResult result, double contamination) {
  const std::size_t n = result.scores.size();
  const std::size_t m = removal_count(n, contamination);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = result.scores[a];
    const auto& sb = result.scores[b];
    if (sa.lof != sb.lof) return sa.lof > sb.lof;
    return sa.sample_id < sb.sample_id;
  });

  result.kept_ids.clear();
  result.removed_ids.clear();
  for (std::size_t r = 0; r < n; ++r) {
    (r < m ? result.removed_ids : result.kept_ids).push_back(result.scores[order[r]].sample_id);
  }
  std::sort(result.kept_ids.begin(), result.kept_ids.end());
  std::sort(result.removed_ids.begin(), result.removed_ids.end());
  return result;
}

}  // namespace polygate
