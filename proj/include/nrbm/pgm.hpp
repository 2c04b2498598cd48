#ifndef NRBM_PGM_HPP
#define NRBM_PGM_HPP

#include <cstddef>
#include <string>

#include "nrbm/rbm.hpp"

namespace nrbm {

// Renders each weight column w_.k as one image_width x image_height tile,
// min-max scaled per tile with larger weights darker (max -> byte 0), and
// tiles them into a grid written as binary PGM (P5, 8-bit). A constant
// tile renders mid-gray (128). grid_cols 0 picks ceil(sqrt(K)).
void export_filters(const RbmParams& params, std::size_t image_width,
                    std::size_t image_height, std::size_t grid_cols,
                    const std::string& path);

}  // namespace nrbm

#endif  // NRBM_PGM_HPP
