#ifndef FDEDIT_RUN_CONFIG_HPP
#define FDEDIT_RUN_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "fd/dag.hpp"
#include "fd/engine.hpp"
#include "fd/safc.hpp"
#include "fd/scenes.hpp"

namespace fdedit {

// One edit run, fully described: the scene, the condition pair, the schedule
// and every pipeline knob. Parsing is strict (unknown keys rejected, errors
// name the offending path); serialize_run_config materializes all defaults.
struct RunConfig {
    fd::SceneSpec scene;
    std::string c_src;
    std::string c_tar;
    uint32_t n_total = 50;
    uint32_t n_skip = 10;
    fd::CfgScales scales;

    bool safc_enabled = true;
    fd::MaskConfig mask;
    double scripted_noise = 0.0;
    bool per_sample_masks = true;
    bool freeze_step0 = false;

    bool dag_enabled = true;
    fd::DagConfig dag;

    uint64_t master_seed = 0;
    std::optional<std::string> out;
};

// base_dir resolves a relative "scene" path (ignored for inline scenes).
RunConfig parse_run_config_text(const std::string& text, const std::string& base_dir);
RunConfig parse_run_config_file(const std::string& path);
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace fdedit

#endif
