#ifndef FDEDIT_COMMANDS_HPP
#define FDEDIT_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace fdedit {

struct GlobalFlags {
    std::optional<uint64_t> seed;  // overrides the run config's master_seed
    std::optional<std::string> out;
    bool quiet = false;
};

void cmd_synth(const std::string& manifest_path, const GlobalFlags& g);
void cmd_edit(const std::string& config_path, const GlobalFlags& g);
void cmd_mask(const std::string& src_path, const std::string& tar_path, uint32_t kernel,
              double delta, bool soften, const GlobalFlags& g);
void cmd_metrics(const std::string& edited_path, const std::string& source_path,
                 const std::string& flow_path, const std::optional<std::string>& region_path,
                 const std::string& warp_pairing, const GlobalFlags& g);

}  // namespace fdedit

#endif
