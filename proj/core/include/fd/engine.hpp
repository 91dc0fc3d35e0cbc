#ifndef FD_ENGINE_HPP
#define FD_ENGINE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fd/condition.hpp"
#include "fd/dag.hpp"
#include "fd/fields.hpp"
#include "fd/safc.hpp"
#include "fd/schedule.hpp"
#include "fd/tensor.hpp"

namespace fd {

// Direct-editing integration. The edited state starts at the source video and
// follows dZ/dt = V(t), integrated from the first grid time down to 0, where
// V is the difference of the target-branch and source-branch velocities:
//   z_src = (1 - t) * x_src + t * N    (fresh noise each step, one draw
//                                       shared by both branches)
//   z_tar = z_edit + z_src - x_src
//   V     = v(z_tar, t, c_tar) - v(z_src, t, c_src)
// with each branch optionally guided (see edit_velocity).

struct EditState {
    VideoTensor z_edit;
    double t = 1.0;
    uint32_t step_index = 0;
};

struct BranchStates {
    VideoTensor z_src;
    VideoTensor z_tar;
};

struct CfgScales {
    double s_src = 3.5;
    double s_tar = 10.5;
};

// Mask pipeline settings for a run. With per_sample_masks each flow sample
// builds its mask from its own branch states; otherwise one mask per step is
// built from the first sample's states. freeze_step0 builds a single mask at
// the first step and reuses it for the whole run.
struct SafcOptions {
    MaskConfig mask;
    bool per_sample_masks = true;
    bool freeze_step0 = false;
    std::shared_ptr<const AttentionProvider> provider;
};

struct StepDiagnostics {
    uint32_t step_index = 0;
    double t = 0.0;
    uint32_t n_samples = 0;
    double v_norm = 0.0;        // L2 norm of the applied velocity
    double mask_coverage = 0.0; // mean mask value (1 when masking is off)
    double d_bar_norm = 0.0;    // L2 norm of the mean differential (0 without guidance)
};

struct EditResult {
    VideoTensor video;
    std::vector<StepDiagnostics> steps;
    uint64_t noise_draws = 0;  // exactly one per sample per step
};

// (1 - t) * x_src + t * noise. t must be in [0, 1].
VideoTensor perturb_source(const VideoTensor& x_src, double t, const VideoTensor& noise);

// z_edit + z_src - x_src. Keeps the branch identity
// z_tar - z_src == z_edit - x_src exact up to rounding.
VideoTensor reconstruct_target(const VideoTensor& z_edit, const VideoTensor& z_src,
                               const VideoTensor& x_src);

// Difference of per-branch guided velocities:
//   cfg_combine(v(z_tar, t, null), v(z_tar, t, c_tar), s_tar)
//   - cfg_combine(v(z_src, t, null), v(z_src, t, c_src), s_src).
// A branch with scale exactly 1 skips the unconditional evaluation (identical
// result by the cfg_combine identity).
VideoTensor edit_velocity(const VelocityField& field, const BranchStates& branches,
                          double t, const Condition& c_src, const Condition& c_tar,
                          const CfgScales& scales);

// Forward Euler update z += (t_next - t) * velocity. Requires t_next < t.
EditState euler_step(const EditState& state, const VideoTensor& velocity, double t_next);

struct RunOptions {
    CfgScales scales;
    std::optional<SafcOptions> safc;
    std::optional<DagConfig> dag;
};

// Full integration loop. Velocities are estimated from dag.l_hq noise samples
// when guidance is configured (one sample otherwise), optionally gated by the
// mask pipeline. The field is never evaluated at t = 0: forward Euler uses
// the velocity at the step's own grid time, so the final step reuses the last
// nonzero time. Errors inside a step are rethrown as std::runtime_error with
// the step index and time prepended.
EditResult run_edit(const VideoTensor& x_src, const Condition& c_src, const Condition& c_tar,
                    const EditSchedule& schedule, const VelocityField& field,
                    const RunOptions& options, const SeedSpec& seed);

// diagnostics.csv serialization, one row per step, columns:
// step_index,t,n_samples,v_norm,mask_coverage,d_bar_norm
void write_diagnostics_csv(const std::string& path, const std::vector<StepDiagnostics>& steps);

}  // namespace fd

#endif
