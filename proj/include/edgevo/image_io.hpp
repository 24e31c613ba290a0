#pragma once

#include <string>

#include "edgevo/core.hpp"

namespace edgevo {

/// Loads an 8- or 16-bit grayscale or RGB image (PNG or PGM/PPM by magic
/// bytes) as float intensities; RGB converts by luminance, 16-bit values are
/// kept as raw counts.
GrayImage load_image_gray(const std::string& path);

/// Loads a 16-bit grayscale depth image and converts raw counts to meters by
/// dividing with depth_scale; raw zeros become invalid (0).
DepthImage load_depth_image(const std::string& path, double depth_scale);

void save_pgm8(const GrayImage& img, const std::string& path);
void save_pgm16(const Image<uint16_t>& img, const std::string& path);

/// Scales the float image to the 0..255 range (min->0, max->255) and saves an
/// 8-bit PGM; used for field inspection dumps.
void save_normalized_pgm(const Image<float>& img, const std::string& path);

/// Writes a header-less CSV of an integer map (one row per image row).
void save_index_csv(const Image<int32_t>& img, const std::string& path);

}  // namespace edgevo
