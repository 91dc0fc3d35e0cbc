#ifndef FD_SAFC_HPP
#define FD_SAFC_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fd/condition.hpp"
#include "fd/fields.hpp"
#include "fd/tensor.hpp"

namespace fd {

// Per-voxel saliency over a video, one value per (frame, y, x). Values are
// nonnegative and finite; no upper bound is assumed.
struct AttentionMap {
    uint32_t t = 0, h = 0, w = 0;
    std::vector<double> values;

    AttentionMap() = default;
    AttentionMap(uint32_t t_, uint32_t h_, uint32_t w_, double fill = 0.0);
    size_t index(uint32_t f, uint32_t y, uint32_t x) const {
        return (size_t(f) * h + y) * w + x;
    }
    double& at(uint32_t f, uint32_t y, uint32_t x) { return values[index(f, y, x)]; }
    double at(uint32_t f, uint32_t y, uint32_t x) const { return values[index(f, y, x)]; }
    size_t size() const { return values.size(); }
};

// Editing-region weights in [0, 1], same layout as AttentionMap. Binary after
// thresholding / union; real-valued after edge softening.
struct MaskVolume {
    uint32_t t = 0, h = 0, w = 0;
    std::vector<double> values;

    MaskVolume() = default;
    MaskVolume(uint32_t t_, uint32_t h_, uint32_t w_, double fill = 0.0);
    size_t index(uint32_t f, uint32_t y, uint32_t x) const {
        return (size_t(f) * h + y) * w + x;
    }
    double& at(uint32_t f, uint32_t y, uint32_t x) { return values[index(f, y, x)]; }
    double at(uint32_t f, uint32_t y, uint32_t x) const { return values[index(f, y, x)]; }
    size_t size() const { return values.size(); }
};

enum class AttentionProviderKind { velocity_difference, scripted };

struct MaskConfig {
    uint32_t kernel = 11;   // odd smoothing window edge
    double delta = 0.25;    // feathering decay rate
    bool apply_softening = true;
    AttentionProviderKind provider = AttentionProviderKind::velocity_difference;

    void validate() const;  // throws std::invalid_argument
};

// Saliency of a condition at a branch state: per-voxel channel-mean of
// |v(x, t, c) - v(x, t, unconditional)|, max-normalized to [0, 1]. An
// all-zero difference yields an all-zero map (valid, not an error).
AttentionMap attention_saliency(const VelocityField& field, const VideoTensor& x,
                                double t, const Condition& c);

// Source of saliency maps for mask construction during an edit run.
class AttentionProvider {
public:
    virtual ~AttentionProvider() = default;
    virtual AttentionMap saliency(const VideoTensor& state, double t, const Condition& c,
                                  uint32_t step, uint32_t sample) const = 0;
};

// Derives saliency from the registered velocity field (see attention_saliency).
class VelocityDifferenceAttention : public AttentionProvider {
public:
    explicit VelocityDifferenceAttention(const VelocityField& field) : field_(&field) {}
    AttentionMap saliency(const VideoTensor& state, double t, const Condition& c,
                          uint32_t step, uint32_t sample) const override;

private:
    const VelocityField* field_;
};

// Returns ground-truth object relevance looked up by the condition's keyword,
// plus optional per-voxel uniform jitter in [0, noise_amplitude). Unknown
// keywords give an all-zero map. With zero amplitude the map is identical
// across steps and samples (static masks downstream).
class ScriptedAttention : public AttentionProvider {
public:
    ScriptedAttention(std::map<std::string, MaskVolume> relevance, double noise_amplitude,
                      uint64_t noise_master);
    AttentionMap saliency(const VideoTensor& state, double t, const Condition& c,
                          uint32_t step, uint32_t sample) const override;

private:
    std::map<std::string, MaskVolume> relevance_;
    double noise_amplitude_ = 0.0;
    uint64_t noise_master_ = 0;
};

// Per-frame 2-D window mean with an n x n kernel (n odd), window clamped at
// the borders to the valid region.
AttentionMap spatial_smooth(const AttentionMap& a, uint32_t kernel);

// Binary map: 1 where a >= mean(a), 0 elsewhere. The threshold is the global
// mean over all T*H*W values.
MaskVolume binarize_global_mean(const AttentionMap& a);

// Elementwise logical OR. Inputs must be strictly binary (every value exactly
// 0.0 or 1.0), otherwise std::invalid_argument.
MaskVolume union_masks(const MaskVolume& a, const MaskVolume& b);

// Per-frame 2-D exact Euclidean distance of each voxel to the nearest
// foreground (value 1) voxel of the same frame; 0 on foreground itself.
// Frames with no foreground get +infinity.
std::vector<double> distance_transform(const MaskVolume& m);

// Feathered mask: 1 on foreground, exp(-delta * D) on background where D is
// the distance transform. Frames with no foreground become all zeros
// (exp(-inf)); this is a documented convention, not an error.
MaskVolume soften_edges(const MaskVolume& m, double delta);

// Full mask construction: smooth both saliency maps, binarize each at its own
// global mean, union, then optionally soften edges.
MaskVolume build_mask(const AttentionMap& a_src, const AttentionMap& a_tar,
                      const MaskConfig& cfg);

// Gates a velocity tensor by the mask, broadcasting over channels. Voxels
// with mask 0 are exactly 0 in the output.
VideoTensor apply_mask(const VideoTensor& velocity, const MaskVolume& mask);

// Mean mask value (fraction of gated-through volume; equals the foreground
// fraction for binary masks).
double mask_coverage(const MaskVolume& mask);

// Conversions for FDT1 interchange (C must be 1).
AttentionMap attention_from_tensor(const VideoTensor& v);
VideoTensor attention_to_tensor(const AttentionMap& a);
MaskVolume mask_from_tensor(const VideoTensor& v);
VideoTensor mask_to_tensor(const MaskVolume& m);

}  // namespace fd

#endif
