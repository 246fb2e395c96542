#include "image_io.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "errors.h"

namespace foveapano {

namespace {

RasterImage FromBgr8(const cv::Mat& bgr) {
  RasterImage img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.set_pixel(x, y, {row[x][2] / 255.0, row[x][1] / 255.0,
                           row[x][0] / 255.0});
    }
  }
  return img;
}

cv::Mat ReadUnchanged(const std::string& path) {
  Require(std::filesystem::exists(path), ErrorCode::kIo,
          "image not found: " + path);
  cv::Mat raw;
  try {
    raw = cv::imread(path, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kIo, "failed to decode " + path + ": " + e.what());
  }
  Require(!raw.empty(), ErrorCode::kIo, "failed to decode image: " + path);
  return raw;
}

}  // namespace

RasterImage LoadImage(const std::string& path) {
  cv::Mat raw = ReadUnchanged(path);
  if (raw.depth() != CV_8U) {
    cv::Mat scaled;
    const double alpha = raw.depth() == CV_16U ? 1.0 / 257.0 : 1.0;
    raw.convertTo(scaled, CV_8U, alpha);
    raw = scaled;
  }
  cv::Mat bgr;
  switch (raw.channels()) {
    case 1: cv::cvtColor(raw, bgr, cv::COLOR_GRAY2BGR); break;
    case 3: bgr = raw; break;
    case 4: cv::cvtColor(raw, bgr, cv::COLOR_BGRA2BGR); break;
    default:
      throw Error(ErrorCode::kIo, "unsupported channel count in " + path);
  }
  return FromBgr8(bgr);
}

RasterImage LoadRgbPngStrict(const std::string& path) {
  const cv::Mat raw = ReadUnchanged(path);
  Require(raw.depth() == CV_8U && raw.channels() == 3, ErrorCode::kIo,
          path + " is not an 8-bit RGB image");
  return FromBgr8(raw);
}

void SavePng(const RasterImage& img, const std::string& path) {
  Require(!img.empty(), ErrorCode::kIo, "cannot write an empty raster");
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
        row[x][2 - c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  bool ok = false;
  try {
    ok = cv::imwrite(path, bgr);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kIo, "failed to write " + path + ": " + e.what());
  }
  Require(ok, ErrorCode::kIo, "failed to write " + path);
}

}  // namespace foveapano
