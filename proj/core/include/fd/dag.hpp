#ifndef FD_DAG_HPP
#define FD_DAG_HPP

#include <cstdint>
#include <vector>

#include "fd/tensor.hpp"

namespace fd {

enum class SubsetMode { exhaustive, random };

// Differential-averaging guidance settings. l_hq flows are averaged into the
// high-quality estimate; baselines average l_bl-sized subsets; the guided
// velocity extrapolates by w along the mean difference.
struct DagConfig {
    uint32_t l_hq = 4;
    uint32_t l_bl = 2;
    SubsetMode subset_mode = SubsetMode::random;
    uint32_t k_subsets = 1;   // random mode only
    double w = 2.75;
    uint64_t subset_seed = 0; // random mode only

    void validate() const;  // throws std::invalid_argument
};

// C(n, k) with overflow guard (throws std::invalid_argument past 2^63).
uint64_t binomial(uint32_t n, uint32_t k);

// Mean of the flows, accumulated by fixed-order pairwise summation so the
// result is independent of thread count and stable across runs.
VideoTensor hq_estimate(const std::vector<VideoTensor>& flows);

// Index subsets of {0..l_hq-1} of size l_bl used for the baselines:
// exhaustive mode enumerates all C(l_hq, l_bl) in lexicographic order;
// random mode draws k_subsets distinct subsets from the stream seeded by
// cfg.subset_seed.
std::vector<std::vector<uint32_t>> select_subsets(const DagConfig& cfg);

// Subset means of the flows, in the order produced by select_subsets.
// flows.size() must equal cfg.l_hq.
std::vector<VideoTensor> baseline_estimates(const std::vector<VideoTensor>& flows,
                                            const DagConfig& cfg);

// Mean over baselines of (v_hq - baseline).
VideoTensor mean_differential(const VideoTensor& v_hq,
                              const std::vector<VideoTensor>& baselines);

// v_hq + w * d_bar. w == 0 returns v_hq unchanged.
VideoTensor dag_velocity(const VideoTensor& v_hq, const VideoTensor& d_bar, double w);

}  // namespace fd

#endif
