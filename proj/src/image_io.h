#ifndef FOVEAPANO_IMAGE_IO_H_
#define FOVEAPANO_IMAGE_IO_H_

#include <string>

#include "raster.h"

namespace foveapano {

// Reads PNG or JPEG; 8-bit samples are mapped linearly to [0,1].
// Grayscale inputs are expanded to RGB; alpha is dropped.
RasterImage LoadImage(const std::string& path);

// Reads a PNG and requires it to be 8-bit, three-channel RGB.
RasterImage LoadRgbPngStrict(const std::string& path);

// Writes an 8-bit RGB PNG (samples clamped to [0,1], rounded to nearest).
void SavePng(const RasterImage& img, const std::string& path);

}  // namespace foveapano

#endif  // FOVEAPANO_IMAGE_IO_H_
