#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale direct video editing against closed-form velocity fields"};
    app.require_subcommand(1);

    fdedit::GlobalFlags flags;
    app.add_option("--seed", flags.seed, "master seed for the edit noise (overrides the config)");
    app.add_option("--out", flags.out, "output directory");
    app.add_flag("--quiet", flags.quiet, "suppress progress output");

    auto* synth = app.add_subcommand("synth", "render a scene manifest to video, flow and masks");
    synth->fallthrough();
    std::string manifest_path;
    synth->add_option("--manifest", manifest_path, "scene manifest path")->required();

    auto* edit = app.add_subcommand("edit", "run a direct edit described by a run config");
    edit->fallthrough();
    std::string edit_config;
    edit->add_option("--config", edit_config, "run config path")->required();

    auto* mask = app.add_subcommand("mask", "build an editing mask from two attention maps");
    mask->fallthrough();
    std::string mask_src, mask_tar;
    uint32_t mask_kernel = 11;
    double mask_delta = 0.25;
    bool mask_soften = true;
    mask->add_option("--src", mask_src, "source attention map (.fdt, C=1)")->required();
    mask->add_option("--tar", mask_tar, "target attention map (.fdt, C=1)")->required();
    mask->add_option("--kernel", mask_kernel, "odd smoothing window size");
    mask->add_option("--delta", mask_delta, "edge softening decay rate");
    mask->add_flag("--soften,!--no-soften", mask_soften, "soften mask edges (default on)");

    auto* metrics = app.add_subcommand("metrics", "compare an edited video against its source");
    metrics->fallthrough();
    std::string edited_path, source_path, flow_path;
    std::string warp_pairing = "edited";
    std::optional<std::string> region_path;
    metrics->add_option("--edited", edited_path, "edited video (.fdt)")->required();
    metrics->add_option("--source", source_path, "source video (.fdt)")->required();
    metrics->add_option("--flow", flow_path, "ground-truth flow (.fdt, C=2)")->required();
    metrics->add_option("--region", region_path, "binary edit region (.fdt, C=1)");
    metrics->add_option("--warp-pairing", warp_pairing, "warp the edited or the source frames")
        ->check(CLI::IsMember({"edited", "source"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            fdedit::cmd_synth(manifest_path, flags);
        } else if (edit->parsed()) {
            fdedit::cmd_edit(edit_config, flags);
        } else if (mask->parsed()) {
            fdedit::cmd_mask(mask_src, mask_tar, mask_kernel, mask_delta, mask_soften, flags);
        } else if (metrics->parsed()) {
            fdedit::cmd_metrics(edited_path, source_path, flow_path, region_path, warp_pairing,
                                flags);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
