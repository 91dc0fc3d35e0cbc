#ifndef FD_SCENES_HPP
#define FD_SCENES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fd/fields.hpp"
#include "fd/metrics.hpp"
#include "fd/noise.hpp"
#include "fd/safc.hpp"
#include "fd/tensor.hpp"

namespace fd {

struct BackgroundSpec {
    enum class Kind { constant, ramp, noise };
    Kind kind = Kind::constant;
    double value = 0.0;        // constant
    double dx = 0.0;           // ramp: horizontal slope over the full width
    double dy = 0.0;           // ramp: vertical slope over the full height
    double offset = 0.0;       // ramp / noise base level
    uint32_t cell = 8;         // noise: lattice cell size in pixels
    double amplitude = 0.0;    // noise
};

struct ObjectSpec {
    enum class Shape { disk, rectangle };
    Shape shape = Shape::disk;
    double radius = 0.0;                 // disk
    double size_h = 0.0, size_w = 0.0;   // rectangle
    std::vector<double> appearance;      // per channel (single value broadcasts)
    double pos_y = 0.0, pos_x = 0.0;     // disk center / rectangle top-left, frame 0
    double vel_y = 0.0, vel_x = 0.0;     // pixels per frame
};

struct ConditionEntry {
    std::vector<double> appearance;      // per channel (single value broadcasts)
    std::optional<double> sigma;         // none: point mass; value: Gaussian width
    std::string keyword;                 // scripted-attention lookup (may be empty)
};

// Declarative scene. In exact mode (default) positions, velocities and sizes
// must be integers, which makes rendering integer-shift exact and the ground
// truth flow reproduce each next frame precisely (constant backgrounds; a
// textured background is still exact wherever no pixel is uncovered).
struct SceneSpec {
    TensorShape canvas;
    BackgroundSpec background;
    std::vector<ObjectSpec> objects;
    std::map<std::string, ConditionEntry> conditions;
    bool exact = true;
    uint64_t seed = 0;  // background texture stream

    void validate() const;  // throws std::invalid_argument
};

struct SceneBundle {
    SceneSpec spec;
    VideoTensor video;
    FlowField flow;
    std::vector<MaskVolume> object_masks;  // per object, visible support
};

// Deterministic rendering: same spec and seed give bitwise-identical bundles.
// Anti-aliasing is off (hard shape membership). Objects are painted in order,
// later objects on top; masks record the finally visible owner. Objects must
// stay inside the canvas for all frames (std::invalid_argument names the
// object and frame otherwise).
SceneBundle render_scene(const SceneSpec& spec, const SeedSpec& seed);

// Distribution centered on the scene re-rendered with the condition's
// appearance substituted into every object (same shapes and trajectories).
// sigma absent gives a point mass, present an isotropic Gaussian with that
// exact sigma. Unknown ids throw std::invalid_argument.
DataDistribution condition_target(const SceneSpec& spec, const SeedSpec& seed,
                                  const std::string& condition_id);

// Materializes every declared condition into a registry.
ConditionRegistry build_registry(const SceneSpec& spec, const SeedSpec& seed);

// Union of the visible masks of all objects whose shape name equals the
// keyword ("disk" / "rectangle"). Unknown keyword gives an all-zero volume.
MaskVolume keyword_relevance(const SceneBundle& bundle, const std::string& keyword);

// Manifest (de)serialization. Parsing is strict: unknown keys and malformed
// fields throw std::invalid_argument naming the offending path.
SceneSpec parse_manifest_file(const std::string& path);
SceneSpec parse_manifest_text(const std::string& text);
std::string serialize_manifest(const SceneSpec& spec);

}  // namespace fd

#endif
