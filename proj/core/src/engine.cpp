#include "fd/engine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fd/noise.hpp"
#include "fd/parallel.hpp"

namespace fd {

VideoTensor perturb_source(const VideoTensor& x_src, double t, const VideoTensor& noise) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("perturb_source: t must be in [0, 1], got " +
                                    std::to_string(t));
    }
    require_same_shape(x_src, noise, "perturb_source");
    VideoTensor out(x_src.shape());
    const double* xs = x_src.data().data();
    const double* ns = noise.data().data();
    double* o = out.data().data();
    double omt = 1.0 - t;
    parallel_for(out.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) o[i] = omt * xs[i] + t * ns[i];
    });
    return out;
}

VideoTensor reconstruct_target(const VideoTensor& z_edit, const VideoTensor& z_src,
                               const VideoTensor& x_src) {
    require_same_shape(z_edit, z_src, "reconstruct_target");
    require_same_shape(z_edit, x_src, "reconstruct_target");
    VideoTensor out(z_edit.shape());
    const double* e = z_edit.data().data();
    const double* s = z_src.data().data();
    const double* x = x_src.data().data();
    double* o = out.data().data();
    parallel_for(out.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) o[i] = e[i] + s[i] - x[i];
    });
    return out;
}

VideoTensor edit_velocity(const VelocityField& field, const BranchStates& branches, double t,
                          const Condition& c_src, const Condition& c_tar,
                          const CfgScales& scales) {
    auto guided = [&](const VideoTensor& z, const Condition& c, double scale) {
        VideoTensor v_cond = field.evaluate(z, t, c);
        if (scale == 1.0) return v_cond;
        VideoTensor v_null = field.evaluate(z, t, unconditional());
        return cfg_combine(v_null, v_cond, scale);
    };
    VideoTensor v_tar = guided(branches.z_tar, c_tar, scales.s_tar);
    VideoTensor v_src = guided(branches.z_src, c_src, scales.s_src);
    return sub(v_tar, v_src);
}

EditState euler_step(const EditState& state, const VideoTensor& velocity, double t_next) {
    if (!(t_next < state.t)) {
        throw std::invalid_argument("euler_step: t_next (" + std::to_string(t_next) +
                                    ") must be below t (" + std::to_string(state.t) + ")");
    }
    require_same_shape(state.z_edit, velocity, "euler_step");
    EditState out{state.z_edit, t_next, state.step_index + 1};
    axpy_in_place(out.z_edit, t_next - state.t, velocity);
    return out;
}

EditResult run_edit(const VideoTensor& x_src, const Condition& c_src, const Condition& c_tar,
                    const EditSchedule& schedule, const VelocityField& field,
                    const RunOptions& options, const SeedSpec& seed) {
    require_valid_shape(x_src.shape(), "run_edit");
    if (!all_finite(x_src)) {
        throw std::invalid_argument("run_edit: source video has non-finite values");
    }
    if (schedule.grid.size() < 2) {
        throw std::invalid_argument("run_edit: schedule needs at least one step");
    }
    if (options.dag) options.dag->validate();
    if (options.safc) {
        options.safc->mask.validate();
        if (!options.safc->provider) {
            throw std::invalid_argument("run_edit: mask pipeline needs an attention provider");
        }
    }

    uint32_t n_samples = options.dag ? options.dag->l_hq : 1;
    size_t n_steps = schedule.grid.size() - 1;
    EditState state{x_src, schedule.grid[0], 0};
    EditResult result{x_src, {}, 0};
    result.steps.reserve(n_steps);

    std::optional<MaskVolume> frozen;
    auto step_mask = [&](const BranchStates& branches, double t, uint32_t step,
                         uint32_t sample) {
        const SafcOptions& so = *options.safc;
        AttentionMap a_src = so.provider->saliency(branches.z_src, t, c_src, step, sample);
        AttentionMap a_tar = so.provider->saliency(branches.z_tar, t, c_tar, step, sample);
        return build_mask(a_src, a_tar, so.mask);
    };

    for (size_t k = 0; k < n_steps; ++k) {
        double t = schedule.grid[k];
        double t_next = schedule.grid[k + 1];
        try {
            std::vector<VideoTensor> flows;
            flows.reserve(n_samples);
            std::optional<MaskVolume> shared;  // one mask per step when not per-sample
            double coverage = 1.0;
            double coverage_sum = 0.0;
            for (uint32_t s = 0; s < n_samples; ++s) {
                VideoTensor noise = seed_noise(
                    SeedSpec{seed.master_seed, seed.step_index + uint32_t(k),
                             seed.sample_index + s},
                    x_src.shape());
                ++result.noise_draws;
                VideoTensor z_src = perturb_source(x_src, t, noise);
                VideoTensor z_tar = reconstruct_target(state.z_edit, z_src, x_src);
                BranchStates branches{std::move(z_src), std::move(z_tar)};
                VideoTensor flow =
                    edit_velocity(field, branches, t, c_src, c_tar, options.scales);
                if (options.safc) {
                    const MaskVolume* mask = nullptr;
                    if (options.safc->freeze_step0) {
                        if (!frozen) frozen = step_mask(branches, t, uint32_t(k), s);
                        mask = &*frozen;
                    } else if (options.safc->per_sample_masks) {
                        shared = step_mask(branches, t, uint32_t(k), s);
                        mask = &*shared;
                    } else {
                        if (!shared) shared = step_mask(branches, t, uint32_t(k), s);
                        mask = &*shared;
                    }
                    flow = apply_mask(flow, *mask);
                    coverage_sum += mask_coverage(*mask);
                }
                flows.push_back(std::move(flow));
            }
            if (options.safc) coverage = coverage_sum / double(n_samples);

            double d_bar_norm = 0.0;
            VideoTensor v = [&]() -> VideoTensor {
                if (!options.dag) return std::move(flows[0]);
                VideoTensor v_hq = hq_estimate(flows);
                if (options.dag->w == 0.0) return v_hq;
                DagConfig step_cfg = *options.dag;
                step_cfg.subset_seed = mix_seed(options.dag->subset_seed, uint64_t(k));
                std::vector<VideoTensor> baselines = baseline_estimates(flows, step_cfg);
                VideoTensor d_bar = mean_differential(v_hq, baselines);
                d_bar_norm = l2_norm(d_bar);
                return dag_velocity(v_hq, d_bar, options.dag->w);
            }();
            if (!all_finite(v)) {
                throw std::runtime_error("velocity has non-finite values");
            }
            result.steps.push_back(StepDiagnostics{uint32_t(k), t, n_samples, l2_norm(v),
                                                   coverage, d_bar_norm});
            state = euler_step(state, v, t_next);
        } catch (const std::exception& e) {
            throw std::runtime_error("step " + std::to_string(k) + " (t=" + std::to_string(t) +
                                     "): " + e.what());
        }
    }
    result.video = std::move(state.z_edit);
    return result;
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<StepDiagnostics>& steps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_diagnostics_csv: cannot open " + path);
    }
    out << "step_index,t,n_samples,v_norm,mask_coverage,d_bar_norm\n";
    char buf[128];
    for (const auto& s : steps) {
        std::snprintf(buf, sizeof(buf), "%u,%.17g,%u,%.17g,%.17g,%.17g\n", s.step_index, s.t,
                      s.n_samples, s.v_norm, s.mask_coverage, s.d_bar_norm);
        out << buf;
    }
    if (!out) {
        throw std::runtime_error("write_diagnostics_csv: write failed for " + path);
    }
}

}  // namespace fd
