#pragma once

#include <vector>

#include "acf/image.hpp"

namespace acf {

/// Correlation scores for every placement of a template inside an image;
/// cell (x, y) is the placement with the template's top-left at (x, y).
struct CorrelationMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  double max() const;
};

/// Normalized correlation coefficient of `templ` against every equally sized
/// window of `image`.
///
/// Each cell is the Pearson correlation of the mean-centred template and
/// window, computed per colour channel and averaged over the channels that
/// carry signal. A channel that is flat in both template and window is left
/// out; a channel flat in exactly one of them contributes 0. A cell with no
/// informative channel is 0. Results are clamped to [-1, 1].
///
/// Window statistics come from integer summed-area tables and the cross term
/// is accumulated exactly, so scores are exact up to the final division.
/// Throws ContractViolation when the template does not fit in the image.
CorrelationMap ncc(const ImagePatch& templ, const ImagePatch& image);

/// True iff the sizes differ by at most `size_tol_px` in each dimension and
/// the mean colours by at most `color_tol` (0..255 scale) in every channel.
bool prefilter_compatible(const PatchFeatures& a, const PatchFeatures& b, int size_tol_px,
                          double color_tol);

struct ScreenMatch {
  int x = 0;
  int y = 0;
  double score = 0.0;
};

/// Finds every placement of `patch` in `screenshot` whose correlation is a
/// local maximum (8-neighbourhood) with score >= threshold. Overlapping hits
/// are non-maximum suppressed: a hit is dropped when it covers more than half
/// of an already accepted, higher-scoring hit. Sorted by descending score.
std::vector<ScreenMatch> locate_on_screen(const ImagePatch& patch, const ImagePatch& screenshot,
                                          double threshold);

}  // namespace acf
