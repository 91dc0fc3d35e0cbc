#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>

#include "json.hpp"

#include "fd/engine.hpp"
#include "fd/fdt.hpp"
#include "fd/metrics.hpp"
#include "fd/netpbm.hpp"
#include "fd/noise.hpp"
#include "fd/scenes.hpp"
#include "run_config.hpp"

namespace fdedit {

namespace fs = std::filesystem;

namespace {

// Scenes and condition registries are rendered with a fixed seed so the
// source video depends only on the manifest (its own "seed" drives textures);
// --seed steers the edit noise alone.
const fd::SeedSpec kSceneSeed{0, 0, 0};

void note(const GlobalFlags& g, const fs::path& p) {
    if (!g.quiet) std::cout << "wrote " << p.string() << "\n";
}

template <class Fn>
void write_atomic(const fs::path& path, Fn&& fn) {
    fs::path tmp = path;
    tmp += ".tmp";
    fn(tmp.string());
    fs::rename(tmp, path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + path);
}

std::string frame_name(const char* stem, const char* ext, uint32_t f) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03u.%s", stem, f, ext);
    return buf;
}

fs::path resolve_out(const RunConfig& cfg, const GlobalFlags& g) {
    if (g.out) return *g.out;
    if (cfg.out) return *cfg.out;
    throw std::invalid_argument("no output directory: pass --out or set \"out\" in the run config");
}

struct EditSetup {
    fd::SceneBundle bundle;
    std::shared_ptr<fd::RegistryField> field;
    fd::Condition c_src;
    fd::Condition c_tar;
    fd::EditSchedule schedule;
    fd::RunOptions options;
};

EditSetup prepare_run(const RunConfig& cfg) {
    EditSetup s{fd::render_scene(cfg.scene, kSceneSeed),
                std::make_shared<fd::RegistryField>(fd::build_registry(cfg.scene, kSceneSeed)),
                {},
                {},
                fd::make_schedule(cfg.n_total, cfg.n_skip),
                {}};
    const auto& src_entry = cfg.scene.conditions.at(cfg.c_src);
    const auto& tar_entry = cfg.scene.conditions.at(cfg.c_tar);
    s.c_src = fd::Condition{cfg.c_src, src_entry.keyword};
    s.c_tar = fd::Condition{cfg.c_tar, tar_entry.keyword};
    s.options.scales = cfg.scales;
    if (cfg.dag_enabled) s.options.dag = cfg.dag;
    if (cfg.safc_enabled) {
        fd::SafcOptions so;
        so.mask = cfg.mask;
        so.per_sample_masks = cfg.per_sample_masks;
        so.freeze_step0 = cfg.freeze_step0;
        if (cfg.mask.provider == fd::AttentionProviderKind::velocity_difference) {
            so.provider = std::make_shared<fd::VelocityDifferenceAttention>(*s.field);
        } else {
            std::map<std::string, fd::MaskVolume> relevance;
            for (const auto& [id, entry] : cfg.scene.conditions) {
                if (!entry.keyword.empty() && !relevance.count(entry.keyword)) {
                    relevance.emplace(entry.keyword,
                                      fd::keyword_relevance(s.bundle, entry.keyword));
                }
            }
            so.provider = std::make_shared<fd::ScriptedAttention>(
                std::move(relevance), cfg.scripted_noise,
                fd::mix_seed(cfg.master_seed, fd::kDomainScriptedAttn));
        }
        s.options.safc = std::move(so);
    }
    return s;
}

std::vector<double> mask_frame_values(const fd::MaskVolume& m, uint32_t f) {
    auto begin = m.values.begin() + ptrdiff_t(m.index(f, 0, 0));
    return std::vector<double>(begin, begin + ptrdiff_t(size_t(m.h) * m.w));
}

}  // namespace

void cmd_synth(const std::string& manifest_path, const GlobalFlags& g) {
    fd::SceneSpec spec = fd::parse_manifest_file(manifest_path);
    if (!g.out) throw std::invalid_argument("synth: --out is required");
    fd::SceneBundle bundle = fd::render_scene(spec, kSceneSeed);
    fs::path out = *g.out;
    fs::create_directories(out);

    write_atomic(out / "video.fdt",
                 [&](const std::string& p) { fd::write_fdt(p, bundle.video); });
    note(g, out / "video.fdt");
    write_atomic(out / "flow.fdt",
                 [&](const std::string& p) { fd::write_fdt(p, fd::flow_to_tensor(bundle.flow)); });
    note(g, out / "flow.fdt");
    for (size_t k = 0; k < bundle.object_masks.size(); ++k) {
        fs::path p = out / ("mask_" + std::to_string(k) + ".fdt");
        write_atomic(p, [&](const std::string& tmp) {
            fd::write_fdt(tmp, fd::mask_to_tensor(bundle.object_masks[k]));
        });
        note(g, p);
    }
    for (uint32_t f = 0; f < bundle.video.frames(); ++f) {
        fs::path p = out / frame_name("frame", "ppm", f);
        write_atomic(p, [&](const std::string& tmp) { fd::write_ppm_frame(tmp, bundle.video, f); });
        note(g, p);
    }
    write_atomic(out / "manifest.json",
                 [&](const std::string& p) { write_text(p, fd::serialize_manifest(spec)); });
    note(g, out / "manifest.json");
}

void cmd_edit(const std::string& config_path, const GlobalFlags& g) {
    RunConfig cfg = parse_run_config_file(config_path);
    if (g.seed) cfg.master_seed = *g.seed;
    fs::path out = resolve_out(cfg, g);

    EditSetup setup = prepare_run(cfg);
    fd::EditResult result =
        fd::run_edit(setup.bundle.video, setup.c_src, setup.c_tar, setup.schedule, *setup.field,
                     setup.options, fd::SeedSpec{cfg.master_seed, 0, 0});

    fs::create_directories(out);
    write_atomic(out / "edited.fdt",
                 [&](const std::string& p) { fd::write_fdt(p, result.video); });
    note(g, out / "edited.fdt");
    for (uint32_t f = 0; f < result.video.frames(); ++f) {
        fs::path p = out / frame_name("frame", "ppm", f);
        write_atomic(p, [&](const std::string& tmp) { fd::write_ppm_frame(tmp, result.video, f); });
        note(g, p);
    }
    write_atomic(out / "diagnostics.csv", [&](const std::string& p) {
        fd::write_diagnostics_csv(p, result.steps);
    });
    note(g, out / "diagnostics.csv");
    // The echoed "out" stays the config's own when set (so reruns redirected via
    // --out produce identical trees) and falls back to the effective directory.
    RunConfig echoed = cfg;
    if (!echoed.out) echoed.out = out.string();
    write_atomic(out / "resolved-config.json",
                 [&](const std::string& p) { write_text(p, serialize_run_config(echoed)); });
    note(g, out / "resolved-config.json");
}

void cmd_mask(const std::string& src_path, const std::string& tar_path, uint32_t kernel,
              double delta, bool soften, const GlobalFlags& g) {
    if (!g.out) throw std::invalid_argument("mask: --out is required");
    fd::MaskConfig mc;
    mc.kernel = kernel;
    mc.delta = delta;
    mc.apply_softening = soften;
    mc.validate();
    fd::AttentionMap a_src = fd::attention_from_tensor(fd::read_fdt(src_path));
    fd::AttentionMap a_tar = fd::attention_from_tensor(fd::read_fdt(tar_path));
    fd::MaskVolume mask = fd::build_mask(a_src, a_tar, mc);

    fs::path out = *g.out;
    fs::create_directories(out);
    write_atomic(out / "mask.fdt",
                 [&](const std::string& p) { fd::write_fdt(p, fd::mask_to_tensor(mask)); });
    note(g, out / "mask.fdt");
    for (uint32_t f = 0; f < mask.t; ++f) {
        fs::path p = out / frame_name("mask", "pgm", f);
        write_atomic(p, [&](const std::string& tmp) {
            fd::write_pgm_plane(tmp, mask_frame_values(mask, f), mask.h, mask.w);
        });
        note(g, p);
    }
}

void cmd_metrics(const std::string& edited_path, const std::string& source_path,
                 const std::string& flow_path, const std::optional<std::string>& region_path,
                 const std::string& warp_pairing, const GlobalFlags& g) {
    if (!g.out) throw std::invalid_argument("metrics: --out is required");
    fd::VideoTensor edited = fd::read_fdt(edited_path);
    fd::VideoTensor source = fd::read_fdt(source_path);
    fd::FlowField flow = fd::flow_from_tensor(fd::read_fdt(flow_path));

    fd::WarpMetrics wm = warp_pairing == "source"
                             ? fd::warp_metrics_source_pairing(edited, source, flow)
                             : fd::warp_metrics(edited, flow);
    std::vector<std::pair<std::string, double>> rows;
    rows.emplace_back("ssim_mean", fd::ssim(edited, source));
    rows.emplace_back("warp_ssim", wm.warp_ssim);
    rows.emplace_back("warp_l1", wm.warp_l1);
    rows.emplace_back("warp_l2", wm.warp_l2);
    if (region_path) {
        fd::MaskVolume region = fd::mask_from_tensor(fd::read_fdt(*region_path));
        rows.emplace_back("bg_preservation", fd::background_preservation(edited, source, region));
    }

    nlohmann::ordered_json j;
    j["constants"] = {{"ssim_window", fd::kSsimWindow},
                      {"ssim_k1", fd::kSsimK1},
                      {"ssim_k2", fd::kSsimK2},
                      {"ssim_l", fd::kSsimL},
                      {"warp_pairing", warp_pairing}};
    for (const auto& [name, value] : rows) j[name] = value;

    fs::path out = *g.out;
    fs::create_directories(out);
    write_atomic(out / "report.json",
                 [&](const std::string& p) { write_text(p, j.dump(2) + "\n"); });
    note(g, out / "report.json");

    std::string csv;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# ssim_window=%u,ssim_k1=%g,ssim_k2=%g,ssim_l=%g,warp_pairing=%s\n",
                  fd::kSsimWindow, fd::kSsimK1, fd::kSsimK2, fd::kSsimL, warp_pairing.c_str());
    csv += buf;
    std::string header, data;
    for (const auto& [name, value] : rows) {
        header += (header.empty() ? "" : ",") + name;
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        data += (data.empty() ? std::string() : std::string(",")) + buf;
    }
    csv += header + "\n" + data + "\n";
    write_atomic(out / "report.csv", [&](const std::string& p) { write_text(p, csv); });
    note(g, out / "report.csv");

    if (!g.quiet) {
        for (const auto& [name, value] : rows) {
            std::snprintf(buf, sizeof(buf), "%s %.6f\n", name.c_str(), value);
            std::cout << buf;
        }
    }
}

}  // namespace fdedit
