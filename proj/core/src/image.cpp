#include "acf/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "acf/errors.hpp"

namespace acf {

ImagePatch::ImagePatch(int w, int h, std::array<std::uint8_t, 3> fill, int dpi_)
    : width(w), height(h), dpi(dpi_) {
  if (w < 0 || h < 0) throw ContractViolation("negative image size");
  pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

void ImagePatch::set(int x, int y, std::array<std::uint8_t, 3> rgb) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const auto o = offset(x, y);
  pixels[o] = rgb[0];
  pixels[o + 1] = rgb[1];
  pixels[o + 2] = rgb[2];
}

void ImagePatch::fill_rect(const Rect& r, std::array<std::uint8_t, 3> rgb) {
  const int x0 = std::max(0, r.x), x1 = std::min(width, r.x + r.w);
  const int y0 = std::max(0, r.y), y1 = std::min(height, r.y + r.h);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) set(x, y, rgb);
}

ImagePatch ImagePatch::crop(const Rect& r) const {
  const int x0 = std::max(0, r.x), x1 = std::min(width, r.x + r.w);
  const int y0 = std::max(0, r.y), y1 = std::min(height, r.y + r.h);
  if (x1 <= x0 || y1 <= y0) return {};
  ImagePatch out(x1 - x0, y1 - y0, {0, 0, 0}, dpi);
  for (int y = y0; y < y1; ++y) {
    std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(offset(x0, y)),
                static_cast<std::ptrdiff_t>(out.width) * 3,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(out.offset(0, y - y0)));
  }
  return out;
}

void ImagePatch::paste(const ImagePatch& src, int x, int y) {
  for (int sy = 0; sy < src.height; ++sy) {
    for (int sx = 0; sx < src.width; ++sx) {
      const auto o = src.offset(sx, sy);
      set(x + sx, y + sy, {src.pixels[o], src.pixels[o + 1], src.pixels[o + 2]});
    }
  }
}

ImagePatch normalize_dpi(const ImagePatch& patch, int source_dpi) {
  if (source_dpi <= 0) throw ContractViolation("source_dpi must be positive");
  if (source_dpi == kReferenceDpi || patch.empty()) {
    ImagePatch out = patch;
    out.dpi = kReferenceDpi;
    return out;
  }
  const double scale = static_cast<double>(kReferenceDpi) / source_dpi;
  const int out_w = std::max(1, static_cast<int>(std::lround(patch.width * scale)));
  const int out_h = std::max(1, static_cast<int>(std::lround(patch.height * scale)));
  ImagePatch out(out_w, out_h);
  const double sx = static_cast<double>(patch.width) / out_w;
  const double sy = static_cast<double>(patch.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, patch.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, patch.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, patch.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, patch.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = patch.at(x0, y0, c) * (1 - wx) + patch.at(x1, y0, c) * wx;
        const double bottom = patch.at(x0, y1, c) * (1 - wx) + patch.at(x1, y1, c) * wx;
        const double v = top * (1 - wy) + bottom * wy;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

ImagePatch upscale_nearest(const ImagePatch& patch, int factor) {
  if (factor < 1) throw ContractViolation("upscale factor must be >= 1");
  ImagePatch out(patch.width * factor, patch.height * factor, {0, 0, 0}, patch.dpi * factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = patch.at(x / factor, y / factor, c);
  return out;
}

ImagePatch pad_replicate(const ImagePatch& patch, int margin) {
  if (margin < 0) throw ContractViolation("margin must be >= 0");
  if (patch.empty()) return patch;
  ImagePatch out(patch.width + 2 * margin, patch.height + 2 * margin, {0, 0, 0}, patch.dpi);
  for (int y = 0; y < out.height; ++y) {
    const int sy = std::clamp(y - margin, 0, patch.height - 1);
    for (int x = 0; x < out.width; ++x) {
      const int sx = std::clamp(x - margin, 0, patch.width - 1);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = patch.at(sx, sy, c);
    }
  }
  return out;
}

PatchFeatures compute_features(const ImagePatch& patch) {
  PatchFeatures f;
  f.width = patch.width;
  f.height = patch.height;
  std::array<std::uint64_t, 3> sum{};
  for (std::size_t i = 0; i < patch.pixels.size(); i += 3) {
    sum[0] += patch.pixels[i];
    sum[1] += patch.pixels[i + 1];
    sum[2] += patch.pixels[i + 2];
  }
  const double n = static_cast<double>(patch.width) * patch.height;
  for (int c = 0; c < 3; ++c) f.mean_rgb[static_cast<std::size_t>(c)] = n > 0 ? sum[static_cast<std::size_t>(c)] / n : 0.0;
  return f;
}

void write_ppm(std::ostream& out, const ImagePatch& image) {
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

void write_ppm(const std::filesystem::path& path, const ImagePatch& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_ppm(out, image);
}

namespace {

int read_header_int(std::istream& in) {
  // Skips whitespace and '#' comments between header tokens.
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  if (!(in >> value)) throw MalformedInput("ppm: bad header");
  return value;
}

}  // namespace

ImagePatch read_ppm(std::istream& in) {
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') throw MalformedInput("ppm: expected P6 magic");
  const int w = read_header_int(in);
  const int h = read_header_int(in);
  const int maxval = read_header_int(in);
  if (w <= 0 || h <= 0) throw MalformedInput("ppm: non-positive dimensions");
  if (maxval != 255) throw MalformedInput("ppm: only maxval 255 is supported");
  in.get();  // single whitespace before raster
  ImagePatch image(w, h);
  in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size()))
    throw MalformedInput("ppm: truncated raster");
  return image;
}

ImagePatch read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return read_ppm(in);
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

}  // namespace acf
