#include "nrbm/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "nrbm/errors.hpp"

namespace nrbm {

void export_filters(const RbmParams& params, std::size_t image_width,
                    std::size_t image_height, std::size_t grid_cols,
                    const std::string& path) {
  params.check();
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();
  if (image_width * image_height != n) {
    throw DimError("export_filters: width*height must equal visible count");
  }
  if (grid_cols == 0) {
    grid_cols = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(k))));
  }
  const std::size_t grid_rows = (k + grid_cols - 1) / grid_cols;

  // 1-pixel white separator between tiles.
  const std::size_t sep = 1;
  const std::size_t out_w = grid_cols * image_width + (grid_cols - 1) * sep;
  const std::size_t out_h = grid_rows * image_height + (grid_rows - 1) * sep;
  std::vector<unsigned char> pixels(out_w * out_h, 255);

  for (std::size_t unit = 0; unit < k; ++unit) {
    double lo = params.weights(0, unit), hi = params.weights(0, unit);
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, params.weights(i, unit));
      hi = std::max(hi, params.weights(i, unit));
    }
    const double span = hi - lo;

    const std::size_t tile_r = unit / grid_cols;
    const std::size_t tile_c = unit % grid_cols;
    const std::size_t y0 = tile_r * (image_height + sep);
    const std::size_t x0 = tile_c * (image_width + sep);
    for (std::size_t y = 0; y < image_height; ++y) {
      for (std::size_t x = 0; x < image_width; ++x) {
        const double w = params.weights(y * image_width + x, unit);
        unsigned char byte;
        if (span > 0.0) {
          const double scaled = (w - lo) / span;  // 1 at the max weight
          byte = static_cast<unsigned char>(
              std::lround(255.0 * (1.0 - scaled)));
        } else {
          byte = 128;
        }
        pixels[(y0 + y) * out_w + (x0 + x)] = byte;
      }
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  out << "P5\n" << out_w << ' ' << out_h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace nrbm
