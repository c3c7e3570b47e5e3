#include "polygate/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "polygate/atomic_file.hpp"
#include "polygate/error.hpp"
#include "polygate/image_io.hpp"

namespace polygate {

namespace fs = std::filesystem;

std::vector<NormBox> mask_to_boxes(const GrayImage& mask, const ConvertOptions& options, std::size_t* dropped) {
  const auto components = connected_components(binarize(mask, options.threshold), options.connectivity);
  const auto boxes = components_to_boxes(components, options.min_area);
  if (dropped != nullptr) *dropped = components.size() - boxes.size();
  std::vector<NormBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back(to_norm(b, mask.width, mask.height));
  return out;
}

namespace {

std::map<std::string, std::vector<fs::path>> images_by_stem(const fs::path& dir) {
  std::map<std::string, std::vector<fs::path>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      out[entry.path().stem().string()].push_back(entry.path());
    }
  }
  for (auto& [stem, paths] : out) std::sort(paths.begin(), paths.end());
  return out;
}

}  // namespace

std::vector<Sample> ingest(const fs::path& image_dir, const fs::path& mask_dir, const std::string& dataset_name,
                           const ConvertOptions& options) {
  if (dataset_name.empty() || dataset_name.find('/') != std::string::npos) {
    throw DomainError("dataset name must be non-empty and contain no '/'");
  }
  if (!fs::is_directory(image_dir)) throw IoError("image directory not found: " + image_dir.string());
  if (!fs::is_directory(mask_dir)) throw IoError("mask directory not found: " + mask_dir.string());

  const auto images = images_by_stem(image_dir);
  const auto masks = images_by_stem(mask_dir);
  if (images.empty()) throw IngestError({"no images found in " + image_dir.string()});

  std::vector<std::string> errors;
  std::vector<Sample> samples;
  for (const auto& [stem, image_paths] : images) {
    if (image_paths.size() > 1) {
      errors.push_back("several images share the stem '" + stem + "' in " + image_dir.string());
      continue;
    }
    auto mask_it = masks.find(stem);
    if (mask_it == masks.end()) {
      errors.push_back("missing mask for " + image_paths.front().string());
      continue;
    }
    if (mask_it->second.size() > 1) {
      errors.push_back("several masks share the stem '" + stem + "' in " + mask_dir.string());
      continue;
    }
    Sample s;
    s.sample_id = dataset_name + "/" + stem;
    s.image_path = image_paths.front();
    s.mask_path = mask_it->second.front();
    try {
      const Image image = load_image(s.image_path);
      const GrayImage mask = load_gray(s.mask_path);
      if (image.width != mask.width || image.height != mask.height) {
        errors.push_back("dimension mismatch: " + s.image_path.string() + " is " + std::to_string(image.width) +
                         "x" + std::to_string(image.height) + ", mask is " + std::to_string(mask.width) + "x" +
                         std::to_string(mask.height));
        continue;
      }
      s.width = image.width;
      s.height = image.height;
      s.boxes = mask_to_boxes(mask, options, &s.dropped_components);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
      continue;
    }
    samples.push_back(std::move(s));
  }
  if (!errors.empty()) throw IngestError(std::move(errors));
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });
  return samples;
}

namespace {

void append_fixed(std::string& out, double v) {
  if (v == 0.0) v = 0.0;  // no "-0.000000"
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.6f", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Calls `fn(fields, line_number)` for each non-empty line.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    fn(fields, line_no);
  }
}

NormBox parse_norm_fields(const std::vector<std::string_view>& f, const std::string& origin, std::size_t line) {
  NormBox b;
  if (!parse_number(f[0], b.class_id) || b.class_id < 0) {
    throw ParseError(origin, line, "class id must be a non-negative integer");
  }
  double* dst[4] = {&b.cx, &b.cy, &b.w, &b.h};
  for (int i = 0; i < 4; ++i) {
    if (!parse_number(f[static_cast<std::size_t>(i) + 1], *dst[i])) {
      throw ParseError(origin, line, "field " + std::to_string(i + 2) + " is not a number");
    }
  }
  if (!b.valid()) throw ParseError(origin, line, "box is outside the unit square or has non-positive size");
  return b;
}

}  // namespace

std::string format_labels(const std::vector<NormBox>& boxes) {
  std::string out;
  for (const auto& b : boxes) {
    out += std::to_string(b.class_id);
    for (double v : {b.cx, b.cy, b.w, b.h}) {
      out += ' ';
      append_fixed(out, v);
    }
    out += '\n';
  }
  return out;
}

fs::path label_path(const fs::path& root, std::string_view sample_id) {
  fs::path p = root / fs::path(std::string(sample_id));
  p += ".txt";
  return p;
}

void write_labels(const Sample& sample, const fs::path& out_dir) {
  write_file_atomic(label_path(out_dir, sample.sample_id), format_labels(sample.boxes));
}

std::vector<NormBox> parse_label_text(std::string_view text, const std::string& origin) {
  std::vector<NormBox> out;
  for_each_line(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 5) {
      throw ParseError(origin, line, "expected 5 fields (class cx cy w h), got " + std::to_string(f.size()));
    }
    out.push_back(parse_norm_fields(f, origin, line));
  });
  return out;
}

std::vector<NormBox> parse_labels(const fs::path& path) { return parse_label_text(read_file(path), path.string()); }

std::string format_predictions(const std::vector<Detection>& dets, double img_w, double img_h) {
  std::string out;
  for (const auto& d : dets) {
    const NormBox n = to_norm(d.box, img_w, img_h, d.class_id);
    out += std::to_string(n.class_id);
    for (double v : {n.cx, n.cy, n.w, n.h, d.confidence}) {
      out += ' ';
      append_fixed(out, v);
    }
    out += '\n';
  }
  return out;
}

std::vector<Detection> parse_prediction_text(std::string_view text, const std::string& origin,
                                             const std::string& image_id, double img_w, double img_h) {
  std::vector<Detection> out;
  for_each_line(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 6) {
      throw ParseError(origin, line,
                       "expected 6 fields (class cx cy w h conf), got " + std::to_string(f.size()));
    }
    const NormBox n = parse_norm_fields(f, origin, line);
    double conf = 0.0;
    if (!parse_number(f[5], conf)) throw ParseError(origin, line, "confidence is not a number");
    if (!(conf >= 0.0 && conf <= 1.0)) throw ParseError(origin, line, "confidence outside [0,1]");
    out.push_back({image_id, n.class_id, from_norm(n, img_w, img_h), conf});
  });
  return out;
}

std::vector<Detection> parse_predictions(const fs::path& path, const std::string& image_id, double img_w,
                                         double img_h) {
  return parse_prediction_text(read_file(path), path.string(), image_id, img_w, img_h);
}

std::vector<std::string> list_label_ids(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("label directory not found: " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    fs::path rel = fs::relative(entry.path(), root);
    rel.replace_extension();
    ids.push_back(rel.generic_string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

std::vector<std::string> without(const std::vector<std::string>& ids, const std::vector<Removal>& removed) {
  std::set<std::string> drop;
  for (const auto& r : removed) drop.insert(r.id);
  std::vector<std::string> out;
  std::copy_if(ids.begin(), ids.end(), std::back_inserter(out), [&](const auto& id) { return !drop.count(id); });
  return out;
}

bool contains_sorted(const std::vector<std::string>& v, const std::string& id) {
  return std::binary_search(v.begin(), v.end(), id);
}

}  // namespace

std::vector<std::string> Fold::cleaned_train() const { return without(train, removed); }
std::vector<std::string> Fold::cleaned_val() const { return without(val, removed); }

std::vector<std::string> Fold::train_and_val() const {
  std::vector<std::string> out;
  std::merge(train.begin(), train.end(), val.begin(), val.end(), std::back_inserter(out));
  return out;
}

std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t bound) {
  if (bound == 0) throw DomainError("bounded_draw needs a positive bound");
  // Reject the top partial bucket: 2^64 mod bound == (-bound) mod bound.
  const std::uint64_t reject_below = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= reject_below) return r % bound;
  }
}

SplitManifest kfold_split(std::vector<std::string> ids, int folds, double test, double val, std::uint64_t seed) {
  if (folds < 2) throw DomainError("need at least 2 folds");
  if (!(test > 0.0 && val > 0.0 && test + val < 1.0)) {
    throw DomainError("test and val fractions must be positive and sum to less than 1");
  }
  if (test * folds > 1.0 + 1e-9) throw DomainError("test fraction times fold count exceeds 1");
  const std::size_t n = ids.size();
  if (n < static_cast<std::size_t>(folds)) {
    throw DomainError("corpus of " + std::to_string(n) + " samples is smaller than the fold count");
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw DomainError("duplicate sample ids");

  std::mt19937_64 gen(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(ids[i], ids[bounded_draw(gen, i + 1)]);

  const auto k = static_cast<std::size_t>(folds);
  const bool full_rotation = test * folds >= 1.0 - 1e-9;

  SplitManifest m;
  m.seed = seed;
  m.config = {{"folds", folds}, {"test", test}, {"val", val}, {"seed", seed}};
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t begin = f * n / k;
    const std::size_t end =
        full_rotation ? (f + 1) * n / k
                      : begin + static_cast<std::size_t>(std::llround(test * static_cast<double>(n)));
    const std::size_t n_test = end - begin;
    // Val absorbs half of this fold's test rounding so train stays within one of its target too.
    const double test_error = static_cast<double>(n_test) - test * static_cast<double>(n);
    const auto n_val = static_cast<std::size_t>(std::max(0LL, std::llround(val * static_cast<double>(n) - test_error / 2)));
    if (n_val + n_test >= n) throw DomainError("corpus too small: no training samples left in fold");

    Fold fold;
    fold.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(begin), ids.begin() + static_cast<std::ptrdiff_t>(end));
    // Walk the rest of the shuffled order cyclically, starting after the test block.
    for (std::size_t step = 0; step < n - n_test; ++step) {
      const std::string& id = ids[(end + step) % n];
      (step < n_val ? fold.val : fold.train).push_back(id);
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.val.begin(), fold.val.end());
    std::sort(fold.test.begin(), fold.test.end());
    m.folds.push_back(std::move(fold));
  }
  return m;
}

SplitManifest attach_removals(SplitManifest manifest, std::size_t fold, std::vector<Removal> removed) {
  if (fold >= manifest.folds.size()) throw DomainError("fold index " + std::to_string(fold) + " out of range");
  Fold& f = manifest.folds[fold];
  std::sort(removed.begin(), removed.end(), [](const Removal& a, const Removal& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < removed.size(); ++i) {
    const std::string& id = removed[i].id;
    if (i > 0 && removed[i - 1].id == id) throw DomainError("sample removed twice: " + id);
    if (contains_sorted(f.test, id)) throw DomainError("cannot remove test sample " + id);
    if (!contains_sorted(f.train, id) && !contains_sorted(f.val, id)) {
      throw DomainError("removed id not in fold " + std::to_string(fold) + ": " + id);
    }
  }
  f.removed = std::move(removed);
  return manifest;
}

void check_manifest(const SplitManifest& m, std::size_t corpus_size, double test, double val) {
  const auto fail = [](const std::string& what) { throw DomainError("manifest invariant violated: " + what); };
  std::set<std::string> tested;
  for (std::size_t fi = 0; fi < m.folds.size(); ++fi) {
    const Fold& f = m.folds[fi];
    const std::string tag = "fold " + std::to_string(fi) + ": ";
    for (const auto* list : {&f.train, &f.val, &f.test}) {
      if (!std::is_sorted(list->begin(), list->end())) fail(tag + "id list not sorted");
    }
    std::set<std::string> all;
    for (const auto* list : {&f.train, &f.val, &f.test}) all.insert(list->begin(), list->end());
    if (all.size() != f.train.size() + f.val.size() + f.test.size()) fail(tag + "lists overlap");
    if (all.size() != corpus_size) fail(tag + "lists do not cover the corpus");
    const auto near = [&](std::size_t size, double fraction) {
      return std::abs(static_cast<double>(size) - fraction * static_cast<double>(corpus_size)) <= 1.0 + 1e-9;
    };
    if (!near(f.test.size(), test)) fail(tag + "test size off target");
    if (!near(f.val.size(), val)) fail(tag + "val size off target");
    if (!near(f.train.size(), 1.0 - test - val)) fail(tag + "train size off target");
    for (const auto& r : f.removed) {
      if (!contains_sorted(f.train, r.id) && !contains_sorted(f.val, r.id)) fail(tag + "removed id outside train/val");
    }
    for (const auto& id : f.test) {
      if (!tested.insert(id).second) fail("sample tested in more than one fold: " + id);
    }
  }
  if (std::abs(test * static_cast<double>(m.folds.size()) - 1.0) <= 1e-9 && tested.size() != corpus_size) {
    fail("test blocks do not cover the corpus");
  }
}

}  // namespace polygate
