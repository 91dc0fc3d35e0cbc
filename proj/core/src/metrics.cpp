#include "fd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fd {

FlowField::FlowField(uint32_t pairs_, uint32_t h_, uint32_t w_)
    : pairs(pairs_), h(h_), w(w_), data(size_t(pairs_) * h_ * w_ * 2, 0.0) {
    if (pairs == 0 || h == 0 || w == 0) {
        throw std::invalid_argument("FlowField: zero-sized field");
    }
}

FlowField flow_from_tensor(const VideoTensor& v) {
    if (v.channels() != 2) {
        throw std::invalid_argument("flow_from_tensor: expected C == 2, got " +
                                    std::to_string(v.channels()));
    }
    FlowField f(v.frames(), v.height(), v.width());
    f.data = v.data();
    return f;
}

VideoTensor flow_to_tensor(const FlowField& f) {
    return VideoTensor(TensorShape{f.pairs, f.h, f.w, 2}, f.data);
}

namespace {

struct WindowStats {
    double mean_a = 0.0, mean_b = 0.0, var_a = 0.0, var_b = 0.0, cov = 0.0;
};

WindowStats window_stats(const VideoTensor& a, const VideoTensor& b, uint32_t f, uint32_t c,
                         int y0, int y1, int x0, int x1) {
    WindowStats s;
    double n = double((y1 - y0 + 1) * (x1 - x0 + 1));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            s.mean_a += a.at(f, uint32_t(y), uint32_t(x), c);
            s.mean_b += b.at(f, uint32_t(y), uint32_t(x), c);
        }
    }
    s.mean_a /= n;
    s.mean_b /= n;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double da = a.at(f, uint32_t(y), uint32_t(x), c) - s.mean_a;
            double db = b.at(f, uint32_t(y), uint32_t(x), c) - s.mean_b;
            s.var_a += da * da;
            s.var_b += db * db;
            s.cov += da * db;
        }
    }
    s.var_a /= n;
    s.var_b /= n;
    s.cov /= n;
    return s;
}

}  // namespace

double ssim(const VideoTensor& a, const VideoTensor& b) {
    require_same_shape(a, b, "ssim");
    const double c1 = (kSsimK1 * kSsimL) * (kSsimK1 * kSsimL);
    const double c2 = (kSsimK2 * kSsimL) * (kSsimK2 * kSsimL);
    int r = int(kSsimWindow) / 2;
    uint32_t frames = a.frames(), h = a.height(), w = a.width(), ch = a.channels();
    double frame_acc = 0.0;
    for (uint32_t f = 0; f < frames; ++f) {
        double pixel_acc = 0.0;
        for (int y = 0; y < int(h); ++y) {
            int y0 = std::max(0, y - r), y1 = std::min(int(h) - 1, y + r);
            for (int x = 0; x < int(w); ++x) {
                int x0 = std::max(0, x - r), x1 = std::min(int(w) - 1, x + r);
                double channel_acc = 0.0;
                for (uint32_t c = 0; c < ch; ++c) {
                    WindowStats s = window_stats(a, b, f, c, y0, y1, x0, x1);
                    double num = (2.0 * s.mean_a * s.mean_b + c1) * (2.0 * s.cov + c2);
                    double den = (s.mean_a * s.mean_a + s.mean_b * s.mean_b + c1) *
                                 (s.var_a + s.var_b + c2);
                    channel_acc += num / den;
                }
                pixel_acc += channel_acc / double(ch);
            }
        }
        frame_acc += pixel_acc / double(size_t(h) * w);
    }
    return frame_acc / double(frames);
}

VideoTensor warp_frame(const VideoTensor& video, uint32_t frame, const FlowField& flow,
                       uint32_t pair) {
    if (frame >= video.frames()) {
        throw std::invalid_argument("warp_frame: frame index out of range");
    }
    if (pair >= flow.pairs) {
        throw std::invalid_argument("warp_frame: flow pair index out of range");
    }
    if (flow.h != video.height() || flow.w != video.width()) {
        throw std::invalid_argument("warp_frame: flow grid does not match the video");
    }
    uint32_t h = video.height(), w = video.width(), ch = video.channels();
    VideoTensor out(TensorShape{1, h, w, ch});
    for (uint32_t y = 0; y < h; ++y) {
        for (uint32_t x = 0; x < w; ++x) {
            double sy = std::clamp(double(y) + flow.dy(pair, y, x), 0.0, double(h - 1));
            double sx = std::clamp(double(x) + flow.dx(pair, y, x), 0.0, double(w - 1));
            uint32_t y0 = uint32_t(std::floor(sy));
            uint32_t x0 = uint32_t(std::floor(sx));
            uint32_t y1 = std::min(y0 + 1, h - 1);
            uint32_t x1 = std::min(x0 + 1, w - 1);
            double fy = sy - double(y0);
            double fx = sx - double(x0);
            for (uint32_t c = 0; c < ch; ++c) {
                double top = (1.0 - fx) * video.at(frame, y0, x0, c) +
                             fx * video.at(frame, y0, x1, c);
                double bot = (1.0 - fx) * video.at(frame, y1, x0, c) +
                             fx * video.at(frame, y1, x1, c);
                out.at(0, y, x, c) = (1.0 - fy) * top + fy * bot;
            }
        }
    }
    return out;
}

namespace {

WarpMetrics warp_metrics_pairing(const VideoTensor& reference, const VideoTensor& warped_from,
                                 const FlowField& flow) {
    require_same_shape(reference, warped_from, "warp metrics");
    if (reference.frames() < 2) {
        throw std::invalid_argument("warp metrics need at least two frames");
    }
    if (flow.pairs != reference.frames() - 1) {
        throw std::invalid_argument("warp metrics: flow pairs must equal frames - 1");
    }
    WarpMetrics m;
    uint32_t pairs = flow.pairs;
    for (uint32_t p = 0; p < pairs; ++p) {
        VideoTensor predicted = warp_frame(warped_from, p, flow, p);
        VideoTensor actual = slice_frame(reference, p + 1);
        m.warp_ssim += ssim(predicted, actual);
        double l1 = 0.0, l2 = 0.0;
        for (size_t i = 0; i < predicted.size(); ++i) {
            double d = predicted.data()[i] - actual.data()[i];
            l1 += std::fabs(d);
            l2 += d * d;
        }
        m.warp_l1 += l1 / double(predicted.size());
        m.warp_l2 += l2 / double(predicted.size());
    }
    m.warp_ssim /= double(pairs);
    m.warp_l1 /= double(pairs);
    m.warp_l2 /= double(pairs);
    return m;
}

}  // namespace

WarpMetrics warp_metrics(const VideoTensor& video, const FlowField& flow) {
    return warp_metrics_pairing(video, video, flow);
}

WarpMetrics warp_metrics_source_pairing(const VideoTensor& edited, const VideoTensor& source,
                                        const FlowField& flow) {
    return warp_metrics_pairing(edited, source, flow);
}

double background_preservation(const VideoTensor& edited, const VideoTensor& source,
                               const MaskVolume& edit_region) {
    require_same_shape(edited, source, "background_preservation");
    if (edit_region.t != edited.frames() || edit_region.h != edited.height() ||
        edit_region.w != edited.width()) {
        throw std::invalid_argument("background_preservation: region grid mismatch");
    }
    for (double v : edit_region.values) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("background_preservation: region must be binary");
        }
    }
    uint64_t outside = 0, equal = 0;
    uint32_t ch = edited.channels();
    for (uint32_t f = 0; f < edited.frames(); ++f) {
        for (uint32_t y = 0; y < edited.height(); ++y) {
            for (uint32_t x = 0; x < edited.width(); ++x) {
                if (edit_region.at(f, y, x) != 0.0) continue;
                for (uint32_t c = 0; c < ch; ++c) {
                    ++outside;
                    if (edited.at(f, y, x, c) == source.at(f, y, x, c)) ++equal;
                }
            }
        }
    }
    if (outside == 0) return 1.0;
    return double(equal) / double(outside);
}

}  // namespace fd
