#ifndef FD_NETPBM_HPP
#define FD_NETPBM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fd/tensor.hpp"

namespace fd {

// Binary PPM (P6, maxval 255) preview of one video frame. Values are clamped
// to [0, 1] then linearly quantized. C==3 maps channels to RGB; any other
// channel count previews channel 0 as gray.
void write_ppm_frame(const std::string& path, const VideoTensor& video, uint32_t frame);

// Binary PGM (P5, maxval 255) of one H*W plane of values in [0, 1] (clamped,
// linearly quantized).
void write_pgm_plane(const std::string& path, const std::vector<double>& values,
                     uint32_t h, uint32_t w);

}  // namespace fd

#endif
