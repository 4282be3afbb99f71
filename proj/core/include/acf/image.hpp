#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "acf/geometry.hpp"

namespace acf {

inline constexpr int kReferenceDpi = 96;

/// Row-major 8-bit RGB image. Used both for widget patches and full screenshots.
struct ImagePatch {
  int width = 0;
  int height = 0;
  int dpi = kReferenceDpi;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  ImagePatch() = default;
  ImagePatch(int w, int h, std::array<std::uint8_t, 3> fill = {0, 0, 0}, int dpi = kReferenceDpi);

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
  std::uint8_t at(int x, int y, int c) const { return pixels[offset(x, y) + static_cast<std::size_t>(c)]; }
  std::uint8_t& at(int x, int y, int c) { return pixels[offset(x, y) + static_cast<std::size_t>(c)]; }
  void set(int x, int y, std::array<std::uint8_t, 3> rgb);
  void fill_rect(const Rect& r, std::array<std::uint8_t, 3> rgb);

  /// Copy of the part of `r` that lies inside the image; empty when disjoint.
  ImagePatch crop(const Rect& r) const;
  /// Copies `src` with its top-left corner at (x, y), clipped to the image.
  void paste(const ImagePatch& src, int x, int y);

  friend bool operator==(const ImagePatch&, const ImagePatch&) = default;
};

/// Rescales a patch captured at `source_dpi` to the reference 96 DPI using
/// bilinear interpolation (pixel-center aligned). Output dimensions are
/// round(dim * 96 / source_dpi), at least 1. A 96 DPI input is returned
/// unchanged.
ImagePatch normalize_dpi(const ImagePatch& patch, int source_dpi);

/// Integer upscale by pixel replication; used to emulate high-DPI captures.
ImagePatch upscale_nearest(const ImagePatch& patch, int factor);

/// Grows the image by `margin` pixels on every side, replicating edge pixels.
ImagePatch pad_replicate(const ImagePatch& patch, int margin);

/// Cheap per-patch features compared before any correlation is computed.
struct PatchFeatures {
  int width = 0;
  int height = 0;
  std::array<double, 3> mean_rgb{};
};

PatchFeatures compute_features(const ImagePatch& patch);

/// Binary PPM (P6, maxval 255).
void write_ppm(std::ostream& out, const ImagePatch& image);
void write_ppm(const std::filesystem::path& path, const ImagePatch& image);
ImagePatch read_ppm(std::istream& in);
ImagePatch read_ppm(const std::filesystem::path& path);

}  // namespace acf
