#include "acf/ncc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "acf/errors.hpp"

namespace acf {

namespace {

/// Summed-area tables for one channel: sum and sum of squares, (w+1) x (h+1).
struct ChannelTables {
  int stride = 0;
  std::vector<std::int64_t> sum;
  std::vector<std::int64_t> sq;

  std::int64_t box(const std::vector<std::int64_t>& t, int x, int y, int w, int h) const {
    const auto s = static_cast<std::size_t>(stride);
    const auto x0 = static_cast<std::size_t>(x), y0 = static_cast<std::size_t>(y);
    const auto x1 = x0 + static_cast<std::size_t>(w), y1 = y0 + static_cast<std::size_t>(h);
    return t[y1 * s + x1] - t[y0 * s + x1] - t[y1 * s + x0] + t[y0 * s + x0];
  }
};

ChannelTables build_tables(const ImagePatch& img, int c) {
  ChannelTables t;
  t.stride = img.width + 1;
  const auto size = static_cast<std::size_t>(img.width + 1) * static_cast<std::size_t>(img.height + 1);
  t.sum.assign(size, 0);
  t.sq.assign(size, 0);
  const auto s = static_cast<std::size_t>(t.stride);
  for (int y = 0; y < img.height; ++y) {
    std::int64_t row_sum = 0, row_sq = 0;
    for (int x = 0; x < img.width; ++x) {
      const std::int64_t v = img.at(x, y, c);
      row_sum += v;
      row_sq += v * v;
      const auto i = (static_cast<std::size_t>(y) + 1) * s + static_cast<std::size_t>(x) + 1;
      t.sum[i] = t.sum[i - s] + row_sum;
      t.sq[i] = t.sq[i - s] + row_sq;
    }
  }
  return t;
}

std::vector<double> plane(const ImagePatch& img, int c) {
  std::vector<double> p(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      p[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(x)] = img.at(x, y, c);
  return p;
}

/// Raw cross-correlation sum_t T(t) * I(offset + t) for every offset. Exact in
/// double for 8-bit inputs (all partial sums are integers below 2^53).
std::vector<double> cross_term(const std::vector<double>& tpl, int tw, int th,
                               const std::vector<double>& img, int iw, int out_w, int out_h) {
  std::vector<double> out(static_cast<std::size_t>(out_w) * static_cast<std::size_t>(out_h), 0.0);
  for (int oy = 0; oy < out_h; ++oy) {
    double* acc = out.data() + static_cast<std::size_t>(oy) * static_cast<std::size_t>(out_w);
    for (int ty = 0; ty < th; ++ty) {
      const double* irow = img.data() + static_cast<std::size_t>(oy + ty) * static_cast<std::size_t>(iw);
      const double* trow = tpl.data() + static_cast<std::size_t>(ty) * static_cast<std::size_t>(tw);
      for (int tx = 0; tx < tw; ++tx) {
        const double tv = trow[tx];
        if (tv == 0.0) continue;
        const double* src = irow + tx;
        for (int ox = 0; ox < out_w; ++ox) acc[ox] += tv * src[ox];
      }
    }
  }
  return out;
}

}  // namespace

double CorrelationMap::max() const {
  return values.empty() ? -1.0 : *std::max_element(values.begin(), values.end());
}

CorrelationMap ncc(const ImagePatch& templ, const ImagePatch& image) {
  if (templ.empty() || image.empty() || templ.width > image.width || templ.height > image.height)
    throw ContractViolation("ncc: template " + std::to_string(templ.width) + "x" +
                            std::to_string(templ.height) + " does not fit image " +
                            std::to_string(image.width) + "x" + std::to_string(image.height));
  const int tw = templ.width, th = templ.height;
  CorrelationMap map;
  map.width = image.width - tw + 1;
  map.height = image.height - th + 1;
  const auto cells = static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height);

  const std::int64_t n = static_cast<std::int64_t>(tw) * th;
  std::vector<double> score_sum(cells, 0.0);
  std::vector<int> informative(cells, 0);

  for (int c = 0; c < 3; ++c) {
    const auto tpl = plane(templ, c);
    std::int64_t t_sum = 0, t_sq = 0;
    for (double v : tpl) {
      const auto iv = static_cast<std::int64_t>(v);
      t_sum += iv;
      t_sq += iv * iv;
    }
    const std::int64_t t_var = n * t_sq - t_sum * t_sum;

    const auto tables = build_tables(image, c);
    const auto cross = cross_term(tpl, tw, th, plane(image, c), image.width, map.width, map.height);

    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) {
        const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(map.width) + static_cast<std::size_t>(x);
        const std::int64_t w_sum = tables.box(tables.sum, x, y, tw, th);
        const std::int64_t w_sq = tables.box(tables.sq, x, y, tw, th);
        const std::int64_t w_var = n * w_sq - w_sum * w_sum;
        if (t_var == 0 && w_var == 0) continue;
        ++informative[i];
        if (t_var == 0 || w_var == 0) continue;
        const std::int64_t numer = n * static_cast<std::int64_t>(cross[i]) - t_sum * w_sum;
        score_sum[i] += static_cast<double>(numer) /
                        std::sqrt(static_cast<double>(t_var) * static_cast<double>(w_var));
      }
    }
  }

  map.values.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    map.values[i] = informative[i] == 0 ? 0.0 : std::clamp(score_sum[i] / informative[i], -1.0, 1.0);
  }
  return map;
}

bool prefilter_compatible(const PatchFeatures& a, const PatchFeatures& b, int size_tol_px,
                          double color_tol) {
  if (std::abs(a.width - b.width) > size_tol_px) return false;
  if (std::abs(a.height - b.height) > size_tol_px) return false;
  for (std::size_t c = 0; c < 3; ++c) {
    if (std::abs(a.mean_rgb[c] - b.mean_rgb[c]) > color_tol) return false;
  }
  return true;
}

std::vector<ScreenMatch> locate_on_screen(const ImagePatch& patch, const ImagePatch& screenshot,
                                          double threshold) {
  if (patch.width > screenshot.width || patch.height > screenshot.height) return {};
  const CorrelationMap map = ncc(patch, screenshot);

  std::vector<ScreenMatch> peaks;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const double v = map.at(x, y);
      if (v < threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= map.width || ny >= map.height) continue;
          if (map.at(nx, ny) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({x, y, v});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const ScreenMatch& a, const ScreenMatch& b) { return a.score > b.score; });

  const std::int64_t area = static_cast<std::int64_t>(patch.width) * patch.height;
  std::vector<ScreenMatch> kept;
  for (const auto& p : peaks) {
    bool overlaps = false;
    for (const auto& k : kept) {
      const std::int64_t ix = std::max(0, patch.width - std::abs(p.x - k.x));
      const std::int64_t iy = std::max(0, patch.height - std::abs(p.y - k.y));
      if (2 * ix * iy > area) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) kept.push_back(p);
  }
  return kept;
}

}  // namespace acf
