#ifndef FD_METRICS_HPP
#define FD_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fd/safc.hpp"
#include "fd/tensor.hpp"

namespace fd {

// Per-frame-pair displacement field: (T-1) x H x W x 2 values (dy, dx) in
// pixels. Displacements point from a destination pixel in frame t+1 back to
// its source location in frame t, so warping frame t by pair t reproduces
// frame t+1 (see warp_frame).
struct FlowField {
    uint32_t pairs = 0, h = 0, w = 0;
    std::vector<double> data;

    FlowField() = default;
    FlowField(uint32_t pairs_, uint32_t h_, uint32_t w_);
    size_t index(uint32_t p, uint32_t y, uint32_t x, uint32_t comp) const {
        return ((size_t(p) * h + y) * w + x) * 2 + comp;
    }
    double& dy(uint32_t p, uint32_t y, uint32_t x) { return data[index(p, y, x, 0)]; }
    double& dx(uint32_t p, uint32_t y, uint32_t x) { return data[index(p, y, x, 1)]; }
    double dy(uint32_t p, uint32_t y, uint32_t x) const { return data[index(p, y, x, 0)]; }
    double dx(uint32_t p, uint32_t y, uint32_t x) const { return data[index(p, y, x, 1)]; }
};

// FDT1 interchange: flow tensors are stored with C == 2.
FlowField flow_from_tensor(const VideoTensor& v);
VideoTensor flow_to_tensor(const FlowField& f);

struct MetricReport {
    double ssim_mean = 0.0;
    double warp_ssim = 0.0;
    double warp_l1 = 0.0;
    double warp_l2 = 0.0;
    double bg_preservation = 0.0;
};

// SSIM constants (dynamic range 1, uniform 7x7 window).
inline constexpr uint32_t kSsimWindow = 7;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr double kSsimL = 1.0;

// Mean local SSIM between two same-shape videos, one window per pixel
// (clamped at borders), statistics per channel then averaged, frames
// averaged. Inputs are expected in [0, 1].
double ssim(const VideoTensor& a, const VideoTensor& b);

// Backward warp of frame `frame` by flow pair `pair`:
// result(y, x) = frame(y + dy, x + dx) with bilinear interpolation;
// out-of-bounds sample coordinates clamp to the border. Returns a T=1 tensor.
VideoTensor warp_frame(const VideoTensor& video, uint32_t frame, const FlowField& flow,
                       uint32_t pair);

struct WarpMetrics {
    double warp_ssim = 0.0;
    double warp_l1 = 0.0;  // mean absolute difference
    double warp_l2 = 0.0;  // mean squared difference
};

// Temporal consistency: warp frame t of `video` by flow pair t and compare
// with frame t+1 of the same video; metrics are means over the T-1 pairs.
WarpMetrics warp_metrics(const VideoTensor& video, const FlowField& flow);

// Alternate pairing: warp frame t of `source` by flow pair t and compare with
// frame t+1 of `edited`.
WarpMetrics warp_metrics_source_pairing(const VideoTensor& edited, const VideoTensor& source,
                                        const FlowField& flow);

// Fraction of voxels outside the edit region (binary mask, broadcast over
// channels) where edited and source are exactly equal. Returns 1.0 when the
// region covers everything (vacuously preserved).
double background_preservation(const VideoTensor& edited, const VideoTensor& source,
                               const MaskVolume& edit_region);

}  // namespace fd

#endif
