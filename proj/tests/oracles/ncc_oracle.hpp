#pragma once

#include <algorithm>
#include <vector>

#include "acf/image.hpp"

namespace acf::oracle {

/// Direct double summation of the per-channel Pearson coefficient at every
/// placement, with the same conventions for flat channels as the library.
inline std::vector<double> brute_force_ncc(const ImagePatch& t, const ImagePatch& img) {
  const int ow = img.width - t.width + 1;
  const int oh = img.height - t.height + 1;
  const double n = static_cast<double>(t.width) * t.height;
  std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh), 0.0);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      double sum = 0.0;
      int informative = 0;
      for (int c = 0; c < 3; ++c) {
        double mt = 0, mi = 0;
        int tmin = 255, tmax = 0, imin = 255, imax = 0;
        for (int y = 0; y < t.height; ++y)
          for (int x = 0; x < t.width; ++x) {
            const int a = t.at(x, y, c);
            const int b = img.at(ox + x, oy + y, c);
            mt += a;
            mi += b;
            tmin = std::min(tmin, a);
            tmax = std::max(tmax, a);
            imin = std::min(imin, b);
            imax = std::max(imax, b);
          }
        const bool t_flat = tmin == tmax;
        const bool i_flat = imin == imax;
        if (t_flat && i_flat) continue;
        ++informative;
        if (t_flat || i_flat) continue;
        mt /= n;
        mi /= n;
        double num = 0, vt = 0, vi = 0;
        for (int y = 0; y < t.height; ++y)
          for (int x = 0; x < t.width; ++x) {
            const double a = t.at(x, y, c) - mt;
            const double b = img.at(ox + x, oy + y, c) - mi;
            num += a * b;
            vt += a * a;
            vi += b * b;
          }
        sum += num / std::sqrt(vt * vi);
      }
      const double v = informative ? sum / informative : 0.0;
      out[static_cast<std::size_t>(oy) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(ox)] =
          std::clamp(v, -1.0, 1.0);
    }
  }
  return out;
}

}  // namespace acf::oracle
