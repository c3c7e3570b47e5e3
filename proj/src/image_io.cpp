#include "polygate/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "polygate/error.hpp"

namespace polygate {

namespace {

cv::Mat read_raw(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("cannot open image: " + path.string());
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_IGNORE_ORIENTATION);
  if (mat.empty()) throw IoError("cannot decode image: " + path.string());
  if (mat.depth() == CV_16U) mat.convertTo(mat, CV_8U, 1.0 / 257.0);
  if (mat.depth() != CV_8U) throw IoError("unsupported pixel depth: " + path.string());
  return mat;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  cv::Mat mat = read_raw(path);
  Image out;
  out.width = mat.cols;
  out.height = mat.rows;
  const int ch = mat.channels();
  out.channels = ch == 1 ? 1 : 3;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      std::size_t dst = (static_cast<std::size_t>(y) * out.width + x) * out.channels;
      if (ch == 1) {
        out.data[dst] = row[x];
      } else if (ch == 2) {
        // Gray + alpha.
        out.data[dst] = out.data[dst + 1] = out.data[dst + 2] = row[2 * x];
      } else {
        // OpenCV stores BGR(A).
        out.data[dst] = row[ch * x + 2];
        out.data[dst + 1] = row[ch * x + 1];
        out.data[dst + 2] = row[ch * x];
      }
    }
  }
  return out;
}

GrayImage load_gray(const std::filesystem::path& path) {
  Image img = load_image(path);
  GrayImage out{img.width, img.height, {}};
  if (img.channels == 1) {
    out.pixels = std::move(img.data);
    return out;
  }
  out.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double lum = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] + 0.114 * img.data[3 * i + 2];
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(lum + 0.5, 0.0, 255.0));
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw DomainError("write_png expects 1 or 3 channels");
  cv::Mat mat(image.height, image.width, image.channels == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      const std::size_t src = (static_cast<std::size_t>(y) * image.width + x) * image.channels;
      if (image.channels == 1) {
        row[x] = image.data[src];
      } else {
        row[3 * x] = image.data[src + 2];
        row[3 * x + 1] = image.data[src + 1];
        row[3 * x + 2] = image.data[src];
      }
    }
  }
  if (!cv::imwrite(path.string(), mat)) throw IoError("cannot write image: " + path.string());
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_png(path, Image{image.width, image.height, 1, image.pixels});
}

bool is_image_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".tif" ||
         ext == ".tiff";
}

}  // namespace polygate
