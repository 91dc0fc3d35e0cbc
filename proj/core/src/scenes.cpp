#include "fd/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fd {

namespace {

bool is_integer_valued(double v) { return std::isfinite(v) && std::floor(v) == v; }

const char* shape_name(ObjectSpec::Shape s) {
    return s == ObjectSpec::Shape::disk ? "disk" : "rectangle";
}

std::vector<double> broadcast_appearance(const std::vector<double>& a, uint32_t channels) {
    if (a.size() == channels) return a;
    return std::vector<double>(channels, a.at(0));
}

void validate_appearance(const std::vector<double>& a, uint32_t channels,
                         const std::string& path) {
    if (a.size() != 1 && a.size() != channels) {
        throw std::invalid_argument(path + ": appearance needs 1 or " +
                                    std::to_string(channels) + " values, got " +
                                    std::to_string(a.size()));
    }
    for (double v : a) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(path + ": appearance values must be finite");
        }
    }
}

struct Placement {
    double y = 0.0, x = 0.0;  // disk center / rectangle top-left at one frame
};

Placement placement_at(const ObjectSpec& obj, uint32_t frame) {
    return Placement{obj.pos_y + double(frame) * obj.vel_y,
                     obj.pos_x + double(frame) * obj.vel_x};
}

void require_inside_canvas(const ObjectSpec& obj, const Placement& p, const TensorShape& canvas,
                           size_t object_index, uint32_t frame) {
    bool ok;
    if (obj.shape == ObjectSpec::Shape::disk) {
        ok = p.y - obj.radius >= 0.0 && p.y + obj.radius <= double(canvas.h - 1) &&
             p.x - obj.radius >= 0.0 && p.x + obj.radius <= double(canvas.w - 1);
    } else {
        ok = p.y >= 0.0 && p.y + obj.size_h <= double(canvas.h) && p.x >= 0.0 &&
             p.x + obj.size_w <= double(canvas.w);
    }
    if (!ok) {
        throw std::invalid_argument("objects[" + std::to_string(object_index) +
                                    "]: leaves the canvas at frame " + std::to_string(frame));
    }
}

bool member(const ObjectSpec& obj, const Placement& p, uint32_t y, uint32_t x) {
    if (obj.shape == ObjectSpec::Shape::disk) {
        double dy = double(y) - p.y, dx = double(x) - p.x;
        return dy * dy + dx * dx <= obj.radius * obj.radius;
    }
    return double(y) >= p.y && double(y) < p.y + obj.size_h && double(x) >= p.x &&
           double(x) < p.x + obj.size_w;
}

// Static single-channel lattice value noise, bilinearly interpolated between
// grid points spaced `cell` pixels apart. Values land in offset +/- amplitude.
struct NoiseLattice {
    uint32_t cell = 1, rows = 0, cols = 0;
    std::vector<double> values;

    NoiseLattice(uint32_t h, uint32_t w, uint32_t cell_, NoiseStream& stream) : cell(cell_) {
        rows = (h - 1) / cell + 2;
        cols = (w - 1) / cell + 2;
        values.resize(size_t(rows) * cols);
        for (double& v : values) v = 2.0 * stream.next_uniform() - 1.0;
    }

    double at(uint32_t y, uint32_t x) const {
        uint32_t iy = y / cell, ix = x / cell;
        double fy = double(y % cell) / double(cell);
        double fx = double(x % cell) / double(cell);
        const double* row0 = &values[size_t(iy) * cols + ix];
        const double* row1 = row0 + cols;
        return (1.0 - fy) * ((1.0 - fx) * row0[0] + fx * row0[1]) +
               fy * ((1.0 - fx) * row1[0] + fx * row1[1]);
    }
};

double ramp_value(const BackgroundSpec& bg, uint32_t y, uint32_t x, const TensorShape& canvas) {
    double frac_y = canvas.h > 1 ? double(y) / double(canvas.h - 1) : 0.0;
    double frac_x = canvas.w > 1 ? double(x) / double(canvas.w - 1) : 0.0;
    return bg.offset + bg.dy * frac_y + bg.dx * frac_x;
}

}  // namespace

void SceneSpec::validate() const {
    require_valid_shape(canvas, "canvas");
    if (canvas.t < 2) {
        throw std::invalid_argument("canvas.t: a scene needs at least 2 frames");
    }
    switch (background.kind) {
        case BackgroundSpec::Kind::constant:
            if (!std::isfinite(background.value)) {
                throw std::invalid_argument("background.value: must be finite");
            }
            break;
        case BackgroundSpec::Kind::ramp:
            if (!std::isfinite(background.offset) || !std::isfinite(background.dx) ||
                !std::isfinite(background.dy)) {
                throw std::invalid_argument("background: ramp parameters must be finite");
            }
            break;
        case BackgroundSpec::Kind::noise:
            if (background.cell < 1) {
                throw std::invalid_argument("background.cell: must be >= 1");
            }
            if (!std::isfinite(background.offset) || !(background.amplitude >= 0.0)) {
                throw std::invalid_argument(
                    "background: offset must be finite and amplitude >= 0");
            }
            break;
    }
    for (size_t k = 0; k < objects.size(); ++k) {
        const ObjectSpec& obj = objects[k];
        std::string path = "objects[" + std::to_string(k) + "]";
        if (obj.shape == ObjectSpec::Shape::disk) {
            if (!(obj.radius > 0.0)) {
                throw std::invalid_argument(path + ".radius: must be > 0");
            }
        } else {
            if (!(obj.size_h > 0.0) || !(obj.size_w > 0.0)) {
                throw std::invalid_argument(path + ".size: must be > 0");
            }
        }
        if (obj.appearance.empty()) {
            throw std::invalid_argument(path + ".appearance: missing");
        }
        validate_appearance(obj.appearance, canvas.c, path);
        if (exact) {
            bool ints = is_integer_valued(obj.pos_y) && is_integer_valued(obj.pos_x) &&
                        is_integer_valued(obj.vel_y) && is_integer_valued(obj.vel_x);
            if (obj.shape == ObjectSpec::Shape::disk) {
                ints = ints && is_integer_valued(obj.radius);
            } else {
                ints = ints && is_integer_valued(obj.size_h) && is_integer_valued(obj.size_w);
            }
            if (!ints) {
                throw std::invalid_argument(
                    path + ": exact mode needs integer geometry (position, velocity, size)");
            }
        }
    }
    for (const auto& [id, entry] : conditions) {
        std::string path = "conditions." + id;
        if (id.empty()) {
            throw std::invalid_argument("conditions: empty id");
        }
        if (entry.appearance.empty()) {
            throw std::invalid_argument(path + ".appearance: missing");
        }
        validate_appearance(entry.appearance, canvas.c, path);
        if (entry.sigma && !(*entry.sigma > 0.0)) {
            throw std::invalid_argument(path + ".sigma: must be > 0");
        }
    }
}

SceneBundle render_scene(const SceneSpec& spec, const SeedSpec& seed) {
    spec.validate();
    const TensorShape& canvas = spec.canvas;
    SceneBundle bundle{spec, VideoTensor(canvas), FlowField(canvas.t - 1, canvas.h, canvas.w),
                       {}};
    bundle.object_masks.assign(spec.objects.size(),
                               MaskVolume(canvas.t, canvas.h, canvas.w));

    std::optional<NoiseLattice> lattice;
    if (spec.background.kind == BackgroundSpec::Kind::noise) {
        NoiseStream stream(
            SeedSpec{mix_seed(mix_seed(seed.master_seed, kDomainSceneTexture), spec.seed),
                     seed.step_index, seed.sample_index});
        lattice.emplace(canvas.h, canvas.w, spec.background.cell, stream);
    }
    auto background_at = [&](uint32_t y, uint32_t x) {
        switch (spec.background.kind) {
            case BackgroundSpec::Kind::constant:
                return spec.background.value;
            case BackgroundSpec::Kind::ramp:
                return ramp_value(spec.background, y, x, canvas);
            default:
                return spec.background.offset + spec.background.amplitude * lattice->at(y, x);
        }
    };

    std::vector<std::vector<double>> appearances;
    appearances.reserve(spec.objects.size());
    for (const auto& obj : spec.objects) {
        appearances.push_back(broadcast_appearance(obj.appearance, canvas.c));
    }

    std::vector<int> owner(size_t(canvas.h) * canvas.w);
    for (uint32_t f = 0; f < canvas.t; ++f) {
        std::fill(owner.begin(), owner.end(), -1);
        for (size_t k = 0; k < spec.objects.size(); ++k) {
            const ObjectSpec& obj = spec.objects[k];
            Placement p = placement_at(obj, f);
            require_inside_canvas(obj, p, canvas, k, f);
            for (uint32_t y = 0; y < canvas.h; ++y) {
                for (uint32_t x = 0; x < canvas.w; ++x) {
                    if (member(obj, p, y, x)) owner[size_t(y) * canvas.w + x] = int(k);
                }
            }
        }
        for (uint32_t y = 0; y < canvas.h; ++y) {
            for (uint32_t x = 0; x < canvas.w; ++x) {
                int k = owner[size_t(y) * canvas.w + x];
                if (k >= 0) {
                    bundle.object_masks[size_t(k)].at(f, y, x) = 1.0;
                    for (uint32_t c = 0; c < canvas.c; ++c) {
                        bundle.video.at(f, y, x, c) = appearances[size_t(k)][c];
                    }
                } else {
                    double v = background_at(y, x);
                    for (uint32_t c = 0; c < canvas.c; ++c) {
                        bundle.video.at(f, y, x, c) = v;
                    }
                }
            }
        }
    }

    // Displacements point backward: sampling frame p at (y, x) + flow lands on
    // the object's previous position, so the warp reproduces frame p + 1 (see
    // FlowField). Stamped over the union of both frames' visible supports, in
    // paint order so later objects win overlaps.
    for (uint32_t p = 0; p + 1 < canvas.t; ++p) {
        for (size_t k = 0; k < spec.objects.size(); ++k) {
            const ObjectSpec& obj = spec.objects[k];
            if (obj.vel_y == 0.0 && obj.vel_x == 0.0) continue;
            const MaskVolume& mask = bundle.object_masks[k];
            for (uint32_t y = 0; y < canvas.h; ++y) {
                for (uint32_t x = 0; x < canvas.w; ++x) {
                    if (mask.at(p, y, x) == 1.0 || mask.at(p + 1, y, x) == 1.0) {
                        bundle.flow.dy(p, y, x) = -obj.vel_y;
                        bundle.flow.dx(p, y, x) = -obj.vel_x;
                    }
                }
            }
        }
    }
    return bundle;
}

DataDistribution condition_target(const SceneSpec& spec, const SeedSpec& seed,
                                  const std::string& condition_id) {
    spec.validate();
    auto it = spec.conditions.find(condition_id);
    if (it == spec.conditions.end()) {
        throw std::invalid_argument("unknown condition id '" + condition_id + "'");
    }
    SceneSpec recolored = spec;
    for (auto& obj : recolored.objects) {
        obj.appearance = it->second.appearance;
    }
    VideoTensor video = render_scene(recolored, seed).video;
    if (it->second.sigma) {
        return DataDistribution::isotropic_gaussian(std::move(video), *it->second.sigma);
    }
    return DataDistribution::delta(std::move(video));
}

ConditionRegistry build_registry(const SceneSpec& spec, const SeedSpec& seed) {
    spec.validate();
    ConditionRegistry registry;
    // The unconditional distribution is the scene exactly as described.
    registry.add(kUnconditionalId, DataDistribution::delta(render_scene(spec, seed).video));
    for (const auto& [id, entry] : spec.conditions) {
        registry.add(id, condition_target(spec, seed, id));
    }
    return registry;
}

MaskVolume keyword_relevance(const SceneBundle& bundle, const std::string& keyword) {
    const TensorShape& canvas = bundle.spec.canvas;
    MaskVolume out(canvas.t, canvas.h, canvas.w);
    for (size_t k = 0; k < bundle.spec.objects.size(); ++k) {
        if (shape_name(bundle.spec.objects[k].shape) != keyword) continue;
        const MaskVolume& mask = bundle.object_masks[k];
        for (size_t i = 0; i < out.values.size(); ++i) {
            if (mask.values[i] == 1.0) out.values[i] = 1.0;
        }
    }
    return out;
}

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            fail(path, "unknown key '" + item.key() + "'");
        }
    }
}

const json& require_member(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

uint32_t as_dim(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<int64_t>() < 1 ||
        j.get<int64_t>() > int64_t(UINT32_MAX)) {
        fail(path, "expected a positive integer");
    }
    return uint32_t(j.get<int64_t>());
}

uint64_t as_seed(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<uint64_t>();
    if (j.is_number_integer() && j.get<int64_t>() >= 0) return uint64_t(j.get<int64_t>());
    fail(path, "expected a nonnegative integer");
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::vector<double> as_appearance(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array() || j.empty()) fail(path, "expected a number or a non-empty array");
    std::vector<double> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::pair<double, double> as_pair(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [y, x]");
    return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
}

TensorShape parse_canvas(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, {"t", "h", "w", "c"}, path);
    TensorShape shape;
    shape.t = as_dim(require_member(j, "t", path), path + ".t");
    shape.h = as_dim(require_member(j, "h", path), path + ".h");
    shape.w = as_dim(require_member(j, "w", path), path + ".w");
    shape.c = as_dim(require_member(j, "c", path), path + ".c");
    return shape;
}

BackgroundSpec parse_background(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    BackgroundSpec bg;
    std::string kind = as_string(require_member(j, "kind", path), path + ".kind");
    if (kind == "constant") {
        bg.kind = BackgroundSpec::Kind::constant;
        check_keys(j, {"kind", "value"}, path);
        if (j.contains("value")) bg.value = as_number(j["value"], path + ".value");
    } else if (kind == "ramp") {
        bg.kind = BackgroundSpec::Kind::ramp;
        check_keys(j, {"kind", "offset", "dx", "dy"}, path);
        if (j.contains("offset")) bg.offset = as_number(j["offset"], path + ".offset");
        if (j.contains("dx")) bg.dx = as_number(j["dx"], path + ".dx");
        if (j.contains("dy")) bg.dy = as_number(j["dy"], path + ".dy");
    } else if (kind == "noise") {
        bg.kind = BackgroundSpec::Kind::noise;
        check_keys(j, {"kind", "offset", "amplitude", "cell"}, path);
        if (j.contains("offset")) bg.offset = as_number(j["offset"], path + ".offset");
        if (j.contains("amplitude")) {
            bg.amplitude = as_number(j["amplitude"], path + ".amplitude");
        }
        if (j.contains("cell")) bg.cell = as_dim(j["cell"], path + ".cell");
    } else {
        fail(path + ".kind", "expected 'constant', 'ramp' or 'noise'");
    }
    return bg;
}

ObjectSpec parse_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    ObjectSpec obj;
    std::string shape = as_string(require_member(j, "shape", path), path + ".shape");
    if (shape == "disk") {
        obj.shape = ObjectSpec::Shape::disk;
        check_keys(j, {"shape", "radius", "appearance", "position", "velocity"}, path);
        obj.radius = as_number(require_member(j, "radius", path), path + ".radius");
    } else if (shape == "rectangle") {
        obj.shape = ObjectSpec::Shape::rectangle;
        check_keys(j, {"shape", "size", "appearance", "position", "velocity"}, path);
        auto [h, w] = as_pair(require_member(j, "size", path), path + ".size");
        obj.size_h = h;
        obj.size_w = w;
    } else {
        fail(path + ".shape", "expected 'disk' or 'rectangle'");
    }
    obj.appearance = as_appearance(require_member(j, "appearance", path), path + ".appearance");
    auto [py, px] = as_pair(require_member(j, "position", path), path + ".position");
    obj.pos_y = py;
    obj.pos_x = px;
    if (j.contains("velocity")) {
        auto [vy, vx] = as_pair(j["velocity"], path + ".velocity");
        obj.vel_y = vy;
        obj.vel_x = vx;
    }
    return obj;
}

ConditionEntry parse_condition(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, {"appearance", "sigma", "keyword"}, path);
    ConditionEntry entry;
    entry.appearance =
        as_appearance(require_member(j, "appearance", path), path + ".appearance");
    if (j.contains("sigma")) entry.sigma = as_number(j["sigma"], path + ".sigma");
    if (j.contains("keyword")) entry.keyword = as_string(j["keyword"], path + ".keyword");
    return entry;
}

}  // namespace

SceneSpec parse_manifest_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("manifest: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("manifest: expected a JSON object");
    }
    check_keys(j, {"canvas", "background", "objects", "conditions", "exact", "seed"},
               "manifest");
    SceneSpec spec;
    spec.canvas = parse_canvas(require_member(j, "canvas", "manifest"), "canvas");
    if (j.contains("background")) {
        spec.background = parse_background(j["background"], "background");
    }
    if (j.contains("objects")) {
        const json& objs = j["objects"];
        if (!objs.is_array()) throw std::invalid_argument("objects: expected an array");
        for (size_t k = 0; k < objs.size(); ++k) {
            spec.objects.push_back(parse_object(objs[k], "objects[" + std::to_string(k) + "]"));
        }
    }
    if (j.contains("conditions")) {
        const json& conds = j["conditions"];
        if (!conds.is_object()) throw std::invalid_argument("conditions: expected an object");
        for (const auto& item : conds.items()) {
            spec.conditions[item.key()] =
                parse_condition(item.value(), "conditions." + item.key());
        }
    }
    if (j.contains("exact")) spec.exact = as_bool(j["exact"], "exact");
    if (j.contains("seed")) spec.seed = as_seed(j["seed"], "seed");
    spec.validate();
    return spec;
}

SceneSpec parse_manifest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot open manifest " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest_text(buf.str());
}

std::string serialize_manifest(const SceneSpec& spec) {
    ordered j;
    j["canvas"] = {{"t", spec.canvas.t}, {"h", spec.canvas.h}, {"w", spec.canvas.w},
                   {"c", spec.canvas.c}};
    ordered bg;
    switch (spec.background.kind) {
        case BackgroundSpec::Kind::constant:
            bg["kind"] = "constant";
            bg["value"] = spec.background.value;
            break;
        case BackgroundSpec::Kind::ramp:
            bg["kind"] = "ramp";
            bg["offset"] = spec.background.offset;
            bg["dx"] = spec.background.dx;
            bg["dy"] = spec.background.dy;
            break;
        case BackgroundSpec::Kind::noise:
            bg["kind"] = "noise";
            bg["offset"] = spec.background.offset;
            bg["amplitude"] = spec.background.amplitude;
            bg["cell"] = spec.background.cell;
            break;
    }
    j["background"] = std::move(bg);
    j["objects"] = ordered::array();
    for (const auto& obj : spec.objects) {
        ordered o;
        o["shape"] = shape_name(obj.shape);
        if (obj.shape == ObjectSpec::Shape::disk) {
            o["radius"] = obj.radius;
        } else {
            o["size"] = {obj.size_h, obj.size_w};
        }
        o["appearance"] = obj.appearance;
        o["position"] = {obj.pos_y, obj.pos_x};
        o["velocity"] = {obj.vel_y, obj.vel_x};
        j["objects"].push_back(std::move(o));
    }
    j["conditions"] = ordered::object();
    for (const auto& [id, entry] : spec.conditions) {
        ordered c;
        c["appearance"] = entry.appearance;
        if (entry.sigma) c["sigma"] = *entry.sigma;
        c["keyword"] = entry.keyword;
        j["conditions"][id] = std::move(c);
    }
    j["exact"] = spec.exact;
    j["seed"] = spec.seed;
    return j.dump(2) + "\n";
}

}  // namespace fd
