#include "run_config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fdedit {

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

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

uint32_t as_u32(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<int64_t>() < 0 ||
        j.get<int64_t>() > int64_t(UINT32_MAX)) {
        fail(path, "expected a nonnegative integer");
    }
    return uint32_t(j.get<int64_t>());
}

uint64_t as_u64(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<uint64_t>();
    if (j.is_number_integer() && j.get<int64_t>() >= 0) return uint64_t(j.get<int64_t>());
    fail(path, "expected a nonnegative integer");
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

void parse_safc(const json& j, RunConfig& cfg) {
    if (!j.is_object()) fail("safc", "expected an object");
    check_keys(j,
               {"enabled", "kernel", "delta", "apply_softening", "provider", "scripted_noise",
                "per_sample_masks", "freeze_step0"},
               "safc");
    if (j.contains("enabled")) cfg.safc_enabled = as_bool(j["enabled"], "safc.enabled");
    if (j.contains("kernel")) cfg.mask.kernel = as_u32(j["kernel"], "safc.kernel");
    if (j.contains("delta")) cfg.mask.delta = as_number(j["delta"], "safc.delta");
    if (j.contains("apply_softening")) {
        cfg.mask.apply_softening = as_bool(j["apply_softening"], "safc.apply_softening");
    }
    if (j.contains("provider")) {
        std::string p = as_string(j["provider"], "safc.provider");
        if (p == "velocity_difference") {
            cfg.mask.provider = fd::AttentionProviderKind::velocity_difference;
        } else if (p == "scripted") {
            cfg.mask.provider = fd::AttentionProviderKind::scripted;
        } else {
            fail("safc.provider", "expected 'velocity_difference' or 'scripted'");
        }
    }
    if (j.contains("scripted_noise")) {
        cfg.scripted_noise = as_number(j["scripted_noise"], "safc.scripted_noise");
        if (cfg.scripted_noise < 0.0) fail("safc.scripted_noise", "must be >= 0");
    }
    if (j.contains("per_sample_masks")) {
        cfg.per_sample_masks = as_bool(j["per_sample_masks"], "safc.per_sample_masks");
    }
    if (j.contains("freeze_step0")) {
        cfg.freeze_step0 = as_bool(j["freeze_step0"], "safc.freeze_step0");
    }
}

void parse_dag(const json& j, RunConfig& cfg) {
    if (!j.is_object()) fail("dag", "expected an object");
    check_keys(j, {"enabled", "l_hq", "l_bl", "subset_mode", "k_subsets", "w", "subset_seed"},
               "dag");
    if (j.contains("enabled")) cfg.dag_enabled = as_bool(j["enabled"], "dag.enabled");
    if (j.contains("l_hq")) cfg.dag.l_hq = as_u32(j["l_hq"], "dag.l_hq");
    if (j.contains("l_bl")) cfg.dag.l_bl = as_u32(j["l_bl"], "dag.l_bl");
    if (j.contains("subset_mode")) {
        std::string m = as_string(j["subset_mode"], "dag.subset_mode");
        if (m == "exhaustive") {
            cfg.dag.subset_mode = fd::SubsetMode::exhaustive;
        } else if (m == "random") {
            cfg.dag.subset_mode = fd::SubsetMode::random;
        } else {
            fail("dag.subset_mode", "expected 'exhaustive' or 'random'");
        }
    }
    if (j.contains("k_subsets")) cfg.dag.k_subsets = as_u32(j["k_subsets"], "dag.k_subsets");
    if (j.contains("w")) cfg.dag.w = as_number(j["w"], "dag.w");
    if (j.contains("subset_seed")) cfg.dag.subset_seed = as_u64(j["subset_seed"], "dag.subset_seed");
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("run config: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("run config: expected a JSON object");
    }
    check_keys(j, {"scene", "c_src", "c_tar", "schedule", "cfg", "safc", "dag", "master_seed",
                   "out"},
               "run config");
    RunConfig cfg;

    auto scene_it = j.find("scene");
    if (scene_it == j.end()) {
        throw std::invalid_argument("run config: missing key 'scene'");
    }
    if (scene_it->is_string()) {
        std::filesystem::path p = scene_it->get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        cfg.scene = fd::parse_manifest_file(p.string());
    } else if (scene_it->is_object()) {
        cfg.scene = fd::parse_manifest_text(scene_it->dump());
    } else {
        fail("scene", "expected a manifest path or an inline manifest object");
    }

    auto c_src_it = j.find("c_src");
    auto c_tar_it = j.find("c_tar");
    if (c_src_it == j.end() || c_tar_it == j.end()) {
        throw std::invalid_argument("run config: missing key 'c_src' or 'c_tar'");
    }
    cfg.c_src = as_string(*c_src_it, "c_src");
    cfg.c_tar = as_string(*c_tar_it, "c_tar");

    if (j.contains("schedule")) {
        const json& s = j["schedule"];
        if (!s.is_object()) fail("schedule", "expected an object");
        check_keys(s, {"n_total", "n_skip"}, "schedule");
        if (s.contains("n_total")) cfg.n_total = as_u32(s["n_total"], "schedule.n_total");
        if (s.contains("n_skip")) cfg.n_skip = as_u32(s["n_skip"], "schedule.n_skip");
    }
    if (j.contains("cfg")) {
        const json& s = j["cfg"];
        if (!s.is_object()) fail("cfg", "expected an object");
        check_keys(s, {"s_src", "s_tar"}, "cfg");
        if (s.contains("s_src")) cfg.scales.s_src = as_number(s["s_src"], "cfg.s_src");
        if (s.contains("s_tar")) cfg.scales.s_tar = as_number(s["s_tar"], "cfg.s_tar");
    }
    if (j.contains("safc")) parse_safc(j["safc"], cfg);
    if (j.contains("dag")) parse_dag(j["dag"], cfg);
    if (j.contains("master_seed")) cfg.master_seed = as_u64(j["master_seed"], "master_seed");
    if (j.contains("out")) cfg.out = as_string(j["out"], "out");

    // Fail fast on settings the run would reject later anyway.
    cfg.mask.validate();
    if (cfg.dag_enabled) cfg.dag.validate();
    if (!cfg.scene.conditions.count(cfg.c_src)) {
        throw std::invalid_argument("c_src: unknown condition id '" + cfg.c_src + "'");
    }
    if (!cfg.scene.conditions.count(cfg.c_tar)) {
        throw std::invalid_argument("c_tar: unknown condition id '" + cfg.c_tar + "'");
    }
    if (cfg.n_total < 1 || cfg.n_skip >= cfg.n_total) {
        throw std::invalid_argument("schedule: need n_total >= 1 and n_skip < n_total");
    }
    return cfg;
}

RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot open run config " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config_text(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string serialize_run_config(const RunConfig& cfg) {
    ordered j;
    j["scene"] = ordered::parse(fd::serialize_manifest(cfg.scene));
    j["c_src"] = cfg.c_src;
    j["c_tar"] = cfg.c_tar;
    j["schedule"] = {{"n_total", cfg.n_total}, {"n_skip", cfg.n_skip}};
    j["cfg"] = {{"s_src", cfg.scales.s_src}, {"s_tar", cfg.scales.s_tar}};
    j["safc"] = {
        {"enabled", cfg.safc_enabled},
        {"kernel", cfg.mask.kernel},
        {"delta", cfg.mask.delta},
        {"apply_softening", cfg.mask.apply_softening},
        {"provider", cfg.mask.provider == fd::AttentionProviderKind::velocity_difference
                         ? "velocity_difference"
                         : "scripted"},
        {"scripted_noise", cfg.scripted_noise},
        {"per_sample_masks", cfg.per_sample_masks},
        {"freeze_step0", cfg.freeze_step0},
    };
    j["dag"] = {
        {"enabled", cfg.dag_enabled},
        {"l_hq", cfg.dag.l_hq},
        {"l_bl", cfg.dag.l_bl},
        {"subset_mode", cfg.dag.subset_mode == fd::SubsetMode::exhaustive ? "exhaustive"
                                                                          : "random"},
        {"k_subsets", cfg.dag.k_subsets},
        {"w", cfg.dag.w},
        {"subset_seed", cfg.dag.subset_seed},
    };
    j["master_seed"] = cfg.master_seed;
    if (cfg.out) j["out"] = *cfg.out;
    return j.dump(2) + "\n";
}

}  // namespace fdedit
