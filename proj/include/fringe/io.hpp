#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fringe/grid.hpp"

namespace fringe::io {

// Raw real-valued tensor in the FPT1 layout: "FPT1", u32 rank, rank x u32
// dims, row-major little-endian f32 payload.
struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
};

void write_fpt(std::ostream& out, const RawTensor& t);
RawTensor read_fpt(std::istream& in);
void write_fpt(const std::filesystem::path& path, const RawTensor& t);
RawTensor read_fpt(const std::filesystem::path& path);

RawTensor to_raw(const Image& img);
// Stacks equally sized images into a rank-3 tensor (count, H, W).
RawTensor to_raw(const std::vector<Image>& images);
Image image_from_raw(const RawTensor& t);
std::vector<Image> images_from_raw(const RawTensor& t);

void write_image_fpt(const std::filesystem::path& path, const Image& img);
Image read_image_fpt(const std::filesystem::path& path);

// 8-bit binary PGM (P5). Values are rounded and clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const Image& img);
void write_pgm(const std::filesystem::path& path, const Mask& mask);
Image read_pgm(const std::filesystem::path& path);
Mask read_mask_pgm(const std::filesystem::path& path);

// Loads a fringe image from either .pgm or .fpt, chosen by extension.
Image read_image(const std::filesystem::path& path);

// Deterministic PNG encoders (no timestamp or text chunks).
void write_png_gray(const std::filesystem::path& path, const Image& img, double lo, double hi);
void write_png_heatmap(const std::filesystem::path& path, const Image& img, double lo, double hi,
                       const Mask* mask = nullptr);

// 'jet' colour map, t in [0, 1].
std::array<std::uint8_t, 3> jet(double t);

}  // namespace fringe::io
