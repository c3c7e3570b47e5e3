#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polygate/image_io.hpp"

namespace polygate {

/// Fixed-length descriptor of one sample; a point in Euclidean space.
struct FeatureVector {
  std::string sample_id;
  std::vector<double> values;
};

/// Luminance of `image` resampled to side x side by exact area averaging,
/// flattened row-major. Not standardized.
FeatureVector extract_features(std::string sample_id, const Image& image, int side = 32);

/// Standardizes every dimension across `dataset` to mean 0, stdev 1.
/// Dimensions with stdev < 1e-12 are set to 0.
void standardize_features(std::vector<FeatureVector>& dataset);

/// Loads each (id, path), extracts features, and standardizes across the set.
std::vector<FeatureVector> featurize_files(
    const std::vector<std::pair<std::string, std::filesystem::path>>& files, int side = 32);

struct Neighbor {
  std::size_t index = 0;  // into the point list
  double distance = 0.0;
};

/// N_k(p): every point within the k-distance, nearest first (ties by index).
struct NeighborSet {
  std::vector<Neighbor> neighbors;
  double k_distance = 0.0;
};

/// Exact brute-force k-NN. Throws DomainError when n <= k or k < 1.
std::vector<NeighborSet> knn(const std::vector<FeatureVector>& points, int k);

/// Points plus their neighbor sets; answers reachability and density queries by id.
class NeighborIndex {
 public:
  NeighborIndex(std::vector<FeatureVector> points, int k);

  std::size_t size() const noexcept { return points_.size(); }
  int k() const noexcept { return k_; }
  const std::vector<FeatureVector>& points() const noexcept { return points_; }
  const NeighborSet& neighbors(std::size_t index) const { return sets_.at(index); }

  /// Throws DomainError for an unknown id.
  std::size_t index_of(std::string_view sample_id) const;

  double distance(std::size_t a, std::size_t b) const;

  /// max(k_distance(s), d(p, s)).
  double reach_dist(std::string_view p_id, std::string_view s_id) const;
  double reach_dist(std::size_t p, std::size_t s) const;

  /// Inverse mean reachability from p to its neighbor set; mean clamped at 1e-12.
  double lrd(std::string_view p_id) const;
  double lrd(std::size_t p) const;

 private:
  std::vector<FeatureVector> points_;
  int k_;
  std::vector<NeighborSet> sets_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

inline constexpr double kMinMeanReachability = 1e-12;

struct LofScore {
  std::string sample_id;
  double lof = 0.0;
  double lrd = 0.0;
};

struct LofResult {
  std::vector<LofScore> scores;         // input order
  std::vector<std::string> kept_ids;    // ascending
  std::vector<std::string> removed_ids; // ascending
};

/// Local outlier factor of every point. kept/removed are left empty.
LofResult lof_scores(const std::vector<FeatureVector>& points, int k);

/// Removes the floor(contamination * n) highest scores. Among equal scores the
/// lower sample id is removed first. Throws DomainError unless 0 <= contamination < 1.
LofResult filter_outliers(LofResult result, double contamination);

/// Number of samples removed at a contamination rate.
std::size_t removal_count(std::size_t n, double contamination);

}  // namespace polygate
