#include "fd/safc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fd/noise.hpp"

namespace fd {

namespace {

void require_same_grid(uint32_t t1, uint32_t h1, uint32_t w1, uint32_t t2, uint32_t h2,
                       uint32_t w2, const char* what) {
    if (t1 != t2 || h1 != h2 || w1 != w2) {
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
    }
}

void require_binary(const MaskVolume& m, const char* what) {
    for (double v : m.values) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument(std::string(what) + ": mask is not binary (found " +
                                        std::to_string(v) + ")");
        }
    }
}

}  // namespace

AttentionMap::AttentionMap(uint32_t t_, uint32_t h_, uint32_t w_, double fill)
    : t(t_), h(h_), w(w_), values(size_t(t_) * h_ * w_, fill) {
    if (t == 0 || h == 0 || w == 0) {
        throw std::invalid_argument("AttentionMap: zero-sized grid");
    }
}

MaskVolume::MaskVolume(uint32_t t_, uint32_t h_, uint32_t w_, double fill)
    : t(t_), h(h_), w(w_), values(size_t(t_) * h_ * w_, fill) {
    if (t == 0 || h == 0 || w == 0) {
        throw std::invalid_argument("MaskVolume: zero-sized grid");
    }
}

void MaskConfig::validate() const {
    if (kernel < 1 || kernel % 2 == 0) {
        throw std::invalid_argument("MaskConfig: kernel must be odd and >= 1, got " +
                                    std::to_string(kernel));
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("MaskConfig: delta must be > 0");
    }
}

AttentionMap attention_saliency(const VelocityField& field, const VideoTensor& x, double t,
                                const Condition& c) {
    VideoTensor v_cond = field.evaluate(x, t, c);
    VideoTensor v_null = field.evaluate(x, t, unconditional());
    uint32_t frames = x.frames(), h = x.height(), w = x.width(), ch = x.channels();
    AttentionMap out(frames, h, w);
    double peak = 0.0;
    for (uint32_t f = 0; f < frames; ++f) {
        for (uint32_t y = 0; y < h; ++y) {
            for (uint32_t xx = 0; xx < w; ++xx) {
                double acc = 0.0;
                for (uint32_t k = 0; k < ch; ++k) {
                    size_t i = x.index(f, y, xx, k);
                    acc += std::fabs(v_cond.data()[i] - v_null.data()[i]);
                }
                double val = acc / double(ch);
                out.at(f, y, xx) = val;
                peak = std::max(peak, val);
            }
        }
    }
    if (peak > 0.0) {
        for (double& v : out.values) v /= peak;
    }
    return out;
}

AttentionMap VelocityDifferenceAttention::saliency(const VideoTensor& state, double t,
                                                   const Condition& c, uint32_t, uint32_t) const {
    return attention_saliency(*field_, state, t, c);
}

ScriptedAttention::ScriptedAttention(std::map<std::string, MaskVolume> relevance,
                                     double noise_amplitude, uint64_t noise_master)
    : relevance_(std::move(relevance)), noise_amplitude_(noise_amplitude),
      noise_master_(noise_master) {
    if (noise_amplitude_ < 0.0) {
        throw std::invalid_argument("ScriptedAttention: noise amplitude must be >= 0");
    }
}

AttentionMap ScriptedAttention::saliency(const VideoTensor& state, double, const Condition& c,
                                         uint32_t step, uint32_t sample) const {
    uint32_t frames = state.frames(), h = state.height(), w = state.width();
    AttentionMap out(frames, h, w);
    auto it = relevance_.find(c.keyword);
    if (it != relevance_.end()) {
        require_same_grid(it->second.t, it->second.h, it->second.w, frames, h, w,
                          "ScriptedAttention");
        out.values = it->second.values;
    }
    if (noise_amplitude_ > 0.0) {
        NoiseStream stream(SeedSpec{noise_master_, step, sample});
        for (double& v : out.values) v += noise_amplitude_ * stream.next_uniform();
    }
    return out;
}

AttentionMap spatial_smooth(const AttentionMap& a, uint32_t kernel) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw std::invalid_argument("spatial_smooth: kernel must be odd and >= 1, got " +
                                    std::to_string(kernel));
    }
    int r = int(kernel) / 2;
    AttentionMap out(a.t, a.h, a.w);
    for (uint32_t f = 0; f < a.t; ++f) {
        for (int y = 0; y < int(a.h); ++y) {
            int y0 = std::max(0, y - r), y1 = std::min(int(a.h) - 1, y + r);
            for (int x = 0; x < int(a.w); ++x) {
                int x0 = std::max(0, x - r), x1 = std::min(int(a.w) - 1, x + r);
                double sum = 0.0;
                for (int yy = y0; yy <= y1; ++yy) {
                    for (int xx = x0; xx <= x1; ++xx) {
                        sum += a.at(f, uint32_t(yy), uint32_t(xx));
                    }
                }
                out.at(f, uint32_t(y), uint32_t(x)) = sum / double((y1 - y0 + 1) * (x1 - x0 + 1));
            }
        }
    }
    return out;
}

MaskVolume binarize_global_mean(const AttentionMap& a) {
    double sum = 0.0;
    for (double v : a.values) sum += v;
    double threshold = sum / double(a.values.size());
    MaskVolume out(a.t, a.h, a.w);
    for (size_t i = 0; i < a.values.size(); ++i) {
        out.values[i] = a.values[i] >= threshold ? 1.0 : 0.0;
    }
    return out;
}

MaskVolume union_masks(const MaskVolume& a, const MaskVolume& b) {
    require_same_grid(a.t, a.h, a.w, b.t, b.h, b.w, "union_masks");
    require_binary(a, "union_masks");
    require_binary(b, "union_masks");
    MaskVolume out(a.t, a.h, a.w);
    for (size_t i = 0; i < a.values.size(); ++i) {
        out.values[i] = (a.values[i] == 1.0 || b.values[i] == 1.0) ? 1.0 : 0.0;
    }
    return out;
}

namespace {

// Sentinel for "no foreground reachable": large enough to survive
// (x - v)^2 additions without overflow, never mistaken for a real distance.
constexpr int64_t kFarAway = int64_t(1) << 40;

// Exact 1-D lower-envelope pass over squared distances. f holds per-position
// squared distances (or kFarAway); writes min_v ((q - v)^2 + f[v]) for every
// q. Parabola intersections are compared as exact rationals in int64, so the
// result matches a brute-force scan bit for bit.
void envelope_pass(const std::vector<int64_t>& f, std::vector<int64_t>& out) {
    int n = int(f.size());
    out.assign(f.size(), kFarAway);
    std::vector<int> hull;          // candidate positions
    std::vector<int64_t> z_num;     // boundary of hull segment k: z_num[k] / z_den[k]
    std::vector<int64_t> z_den;
    hull.reserve(f.size());
    for (int q = 0; q < n; ++q) {
        if (f[q] >= kFarAway) continue;
        // Intersection of parabola q with parabola v:
        //   s = (f[q] + q^2 - f[v] - v^2) / (2q - 2v).
        while (!hull.empty()) {
            int v = hull.back();
            int64_t num = f[q] + int64_t(q) * q - f[v] - int64_t(v) * v;
            int64_t den = 2 * int64_t(q - v);
            if (hull.size() == 1) {
                hull.push_back(q);
                z_num.push_back(num);
                z_den.push_back(den);
                break;
            }
            // Pop while s <= previous boundary (exact cross-multiplication;
            // denominators are positive).
            if (num * z_den.back() <= z_num.back() * den) {
                hull.pop_back();
                z_num.pop_back();
                z_den.pop_back();
                continue;
            }
            hull.push_back(q);
            z_num.push_back(num);
            z_den.push_back(den);
            break;
        }
        if (hull.empty()) hull.push_back(q);
    }
    if (hull.empty()) return;  // stays kFarAway
    size_t k = 0;
    for (int q = 0; q < n; ++q) {
        // Advance while the next segment starts at or before q.
        while (k + 1 < hull.size() && z_num[k] <= int64_t(q) * z_den[k]) ++k;
        int v = hull[k];
        out[q] = int64_t(q - v) * (q - v) + f[v];
    }
}

}  // namespace

std::vector<double> distance_transform(const MaskVolume& m) {
    require_binary(m, "distance_transform");
    std::vector<double> out(m.values.size());
    std::vector<int64_t> column(m.h), row(m.w), tmp(std::max(m.h, m.w));
    std::vector<int64_t> sq(size_t(m.h) * m.w);
    for (uint32_t f = 0; f < m.t; ++f) {
        // Column pass: squared distance to the nearest foreground in the same
        // column (two integer sweeps).
        for (uint32_t x = 0; x < m.w; ++x) {
            int64_t d = kFarAway;
            for (uint32_t y = 0; y < m.h; ++y) {
                d = m.at(f, y, x) == 1.0 ? 0 : (d >= kFarAway ? kFarAway : d + 1);
                column[y] = d;
            }
            d = kFarAway;
            for (int y = int(m.h) - 1; y >= 0; --y) {
                d = m.at(f, uint32_t(y), x) == 1.0 ? 0 : (d >= kFarAway ? kFarAway : d + 1);
                column[uint32_t(y)] = std::min(column[uint32_t(y)], d);
            }
            for (uint32_t y = 0; y < m.h; ++y) {
                int64_t c = column[y];
                sq[size_t(y) * m.w + x] = c >= kFarAway ? kFarAway : c * c;
            }
        }
        // Row pass: exact envelope over the column distances.
        for (uint32_t y = 0; y < m.h; ++y) {
            row.assign(sq.begin() + size_t(y) * m.w, sq.begin() + size_t(y + 1) * m.w);
            envelope_pass(row, tmp);
            for (uint32_t x = 0; x < m.w; ++x) {
                int64_t d2 = tmp[x];
                out[m.index(f, y, x)] = d2 >= kFarAway
                                            ? std::numeric_limits<double>::infinity()
                                            : std::sqrt(double(d2));
            }
        }
    }
    return out;
}

MaskVolume soften_edges(const MaskVolume& m, double delta) {
    if (!(delta > 0.0)) {
        throw std::invalid_argument("soften_edges: delta must be > 0");
    }
    std::vector<double> dist = distance_transform(m);
    MaskVolume out(m.t, m.h, m.w);
    for (size_t i = 0; i < m.values.size(); ++i) {
        // Foreground keeps exactly 1; background decays with distance. A
        // frame without foreground has infinite distances, hence exactly 0.
        out.values[i] = m.values[i] == 1.0 ? 1.0 : std::exp(-delta * dist[i]);
    }
    return out;
}

MaskVolume build_mask(const AttentionMap& a_src, const AttentionMap& a_tar,
                      const MaskConfig& cfg) {
    cfg.validate();
    require_same_grid(a_src.t, a_src.h, a_src.w, a_tar.t, a_tar.h, a_tar.w, "build_mask");
    MaskVolume m_src = binarize_global_mean(spatial_smooth(a_src, cfg.kernel));
    MaskVolume m_tar = binarize_global_mean(spatial_smooth(a_tar, cfg.kernel));
    MaskVolume joined = union_masks(m_src, m_tar);
    if (!cfg.apply_softening) return joined;
    return soften_edges(joined, cfg.delta);
}

VideoTensor apply_mask(const VideoTensor& velocity, const MaskVolume& mask) {
    require_same_grid(mask.t, mask.h, mask.w, velocity.frames(), velocity.height(),
                      velocity.width(), "apply_mask");
    VideoTensor out(velocity.shape());
    uint32_t ch = velocity.channels();
    for (uint32_t f = 0; f < velocity.frames(); ++f) {
        for (uint32_t y = 0; y < velocity.height(); ++y) {
            for (uint32_t x = 0; x < velocity.width(); ++x) {
                double m = mask.at(f, y, x);
                for (uint32_t k = 0; k < ch; ++k) {
                    size_t i = velocity.index(f, y, x, k);
                    out.data()[i] = m == 0.0 ? 0.0 : velocity.data()[i] * m;
                }
            }
        }
    }
    return out;
}

double mask_coverage(const MaskVolume& mask) {
    double sum = 0.0;
    for (double v : mask.values) sum += v;
    return sum / double(mask.values.size());
}

AttentionMap attention_from_tensor(const VideoTensor& v) {
    if (v.channels() != 1) {
        throw std::invalid_argument("attention_from_tensor: expected C == 1, got " +
                                    std::to_string(v.channels()));
    }
    AttentionMap out(v.frames(), v.height(), v.width());
    out.values = v.data();
    for (double x : out.values) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("attention_from_tensor: values must be finite and >= 0");
        }
    }
    return out;
}

VideoTensor attention_to_tensor(const AttentionMap& a) {
    return VideoTensor(TensorShape{a.t, a.h, a.w, 1}, a.values);
}

MaskVolume mask_from_tensor(const VideoTensor& v) {
    if (v.channels() != 1) {
        throw std::invalid_argument("mask_from_tensor: expected C == 1, got " +
                                    std::to_string(v.channels()));
    }
    MaskVolume out(v.frames(), v.height(), v.width());
    out.values = v.data();
    return out;
}

VideoTensor mask_to_tensor(const MaskVolume& m) {
    return VideoTensor(TensorShape{m.t, m.h, m.w, 1}, m.values);
}

}  // namespace fd
