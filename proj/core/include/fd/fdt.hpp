#ifndef FD_FDT_HPP
#define FD_FDT_HPP

#include <string>

#include "fd/tensor.hpp"

namespace fd {

// FDT1 tensor file: magic "FDT1", four u32 little-endian dims (T, H, W, C),
// then T*H*W*C float32 little-endian values in [t][y][x][c] order.
//
// Malformed files (bad magic, zero dims, truncated or oversized payload,
// non-finite values) throw std::invalid_argument. In-memory values are
// double; writing quantizes to float32 (round to nearest).
VideoTensor read_fdt(const std::string& path);
void write_fdt(const std::string& path, const VideoTensor& tensor);

}  // namespace fd

#endif
