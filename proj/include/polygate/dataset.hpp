#pragma once

#include <cstdint>
#include <random>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "polygate/evaluation.hpp"
#include "polygate/geometry.hpp"

namespace polygate {

struct ConvertOptions {
  int threshold = 128;
  std::size_t min_area = 64;
  Connectivity connectivity = Connectivity::Eight;
};

/// One image of a corpus with the boxes derived from its mask.
struct Sample {
  std::string sample_id;  // "<dataset>/<stem>"
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
  int width = 0;
  int height = 0;
  std::vector<NormBox> boxes;
  std::size_t dropped_components = 0;  // components below min_area
};

/// Boxes of one mask: binarize, label components, box them, normalize.
std::vector<NormBox> mask_to_boxes(const GrayImage& mask, const ConvertOptions& options,
                                   std::size_t* dropped = nullptr);

/// Pairs every image in `image_dir` with the mask of the same stem in
/// `mask_dir`. Returns samples sorted by id, or throws IngestError listing
/// every failure.
std::vector<Sample> ingest(const std::filesystem::path& image_dir, const std::filesystem::path& mask_dir,
                           const std::string& dataset_name, const ConvertOptions& options = {});

/// `class cx cy w h` per line, 6 decimals, LF-terminated.
std::string format_labels(const std::vector<NormBox>& boxes);
std::filesystem::path label_path(const std::filesystem::path& root, std::string_view sample_id);
void write_labels(const Sample& sample, const std::filesystem::path& out_dir);

/// `origin` names the source in error messages.
std::vector<NormBox> parse_label_text(std::string_view text, const std::string& origin);
std::vector<NormBox> parse_labels(const std::filesystem::path& path);

/// `class cx cy w h conf` per line, 6 decimals, LF-terminated.
std::string format_predictions(const std::vector<Detection>& dets, double img_w, double img_h);
std::vector<Detection> parse_prediction_text(std::string_view text, const std::string& origin,
                                             const std::string& image_id, double img_w, double img_h);
std::vector<Detection> parse_predictions(const std::filesystem::path& path, const std::string& image_id,
                                         double img_w, double img_h);

/// Ids of all `*.txt` files under `root`, as relative paths without extension.
std::vector<std::string> list_label_ids(const std::filesystem::path& root);

struct Removal {
  std::string id;
  double score = 0.0;
  friend bool operator==(const Removal&, const Removal&) = default;
};

struct Fold {
  std::vector<std::string> train;  // ascending
  std::vector<std::string> val;    // ascending
  std::vector<std::string> test;   // ascending
  std::vector<Removal> removed;    // ascending by id

  std::vector<std::string> cleaned_train() const;
  std::vector<std::string> cleaned_val() const;
  /// train ∪ val, ascending.
  std::vector<std::string> train_and_val() const;
};

inline constexpr const char* kShufflePrng = "mt19937_64/fisher-yates-rejection";

struct SplitManifest {
  std::uint64_t seed = 0;
  std::string prng = kShufflePrng;
  std::vector<Fold> folds;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

/// Unbiased draw in [0, bound) from a 64-bit Mersenne Twister; portable across
/// standard libraries (unlike std::uniform_int_distribution).
std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t bound);

/// Sorted ids shuffled once, cut into rotating test blocks; each fold's
/// remainder is split into val and train.
SplitManifest kfold_split(std::vector<std::string> ids, int folds = 5, double test = 0.20, double val = 0.15,
                          std::uint64_t seed = 0);

/// Replaces the fold's removal list. Every id must lie in that fold's train or val.
SplitManifest attach_removals(SplitManifest manifest, std::size_t fold, std::vector<Removal> removed);

/// Throws DomainError naming the first violated manifest invariant.
void check_manifest(const SplitManifest& manifest, std::size_t corpus_size, double test, double val);

}  // namespace polygate
