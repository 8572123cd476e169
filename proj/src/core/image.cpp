#include "image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace declarui {

namespace {

GrayImage from_mat(const cv::Mat& mat) {
  GrayImage image;
  image.width = mat.cols;
  image.height = mat.rows;
  image.luma.resize(static_cast<size_t>(mat.cols) * mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      image.luma[static_cast<size_t>(y) * mat.cols + x] =
          static_cast<double>(mat.at<std::uint8_t>(y, x));
    }
  }
  return image;
}

cv::Mat to_mat(const GrayImage& image) {
  cv::Mat mat(image.height, image.width, CV_8UC1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      double v = image.at(x, y);
      v = std::min(255.0, std::max(0.0, v));
      mat.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(v + 0.5);
    }
  }
  return mat;
}

}  // namespace

GrayImage load_screenshot(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw ImageError("cannot decode image: " + path);
  }
  cv::Mat gray(bgr.rows, bgr.cols, CV_8UC1);
  for (int y = 0; y < bgr.rows; ++y) {
    for (int x = 0; x < bgr.cols; ++x) {
      const cv::Vec3b& px = bgr.at<cv::Vec3b>(y, x);
      // BT.601 luma; px is BGR.
      double luma = 0.299 * px[2] + 0.587 * px[1] + 0.114 * px[0];
      gray.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(luma + 0.5);
    }
  }
  return from_mat(gray);
}

std::pair<GrayImage, GrayImage> match_dimensions(GrayImage a, GrayImage b) {
  if (a.width == b.width && a.height == b.height) {
    return {std::move(a), std::move(b)};
  }
  int target_w = std::max(a.width, b.width);
  int target_h = std::max(a.height, b.height);
  auto upscale = [&](GrayImage& image) {
    if (image.width == target_w && image.height == target_h) {
      return;
    }
    cv::Mat resized;
    cv::resize(to_mat(image), resized, cv::Size(target_w, target_h), 0, 0,
               cv::INTER_LINEAR);
    image = from_mat(resized);
  };
  upscale(a);
  upscale(b);
  return {std::move(a), std::move(b)};
}

GrayImage gray_from_bytes(int width, int height,
                          const std::vector<std::uint8_t>& pixels) {
  if (static_cast<size_t>(width) * height != pixels.size()) {
    throw ImageError("pixel buffer size does not match dimensions");
  }
  GrayImage image;
  image.width = width;
  image.height = height;
  image.luma.assign(pixels.begin(), pixels.end());
  return image;
}

void write_gray_png(const std::string& path, const GrayImage& image) {
  if (!cv::imwrite(path, to_mat(image))) {
    throw ImageError("cannot write image: " + path);
  }
}

std::pair<int, int> png_dimensions(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (mat.empty()) {
    throw ImageError("cannot decode image: " + path);
  }
  return {mat.cols, mat.rows};
}

}  // namespace declarui
