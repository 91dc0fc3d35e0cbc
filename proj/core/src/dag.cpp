#include "fd/dag.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include "fd/noise.hpp"

namespace fd {

uint64_t binomial(uint32_t n, uint32_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 result = 1;
    constexpr unsigned __int128 limit = (unsigned __int128)1 << 63;
    for (uint32_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;  // exact: result is C(n-k+i, i)
        if (result >= limit) {
            throw std::invalid_argument("binomial: C(" + std::to_string(n) + ", " +
                                        std::to_string(k) + ") exceeds 2^63");
        }
    }
    return uint64_t(result);
}

void DagConfig::validate() const {
    if (l_hq < 2) {
        throw std::invalid_argument("DagConfig: l_hq must be >= 2, got " + std::to_string(l_hq));
    }
    if (l_bl < 1 || l_bl >= l_hq) {
        throw std::invalid_argument("DagConfig: l_bl must satisfy 1 <= l_bl < l_hq, got l_bl=" +
                                    std::to_string(l_bl) + " l_hq=" + std::to_string(l_hq));
    }
    if (w < 0.0) {
        throw std::invalid_argument("DagConfig: w must be >= 0");
    }
    if (subset_mode == SubsetMode::random) {
        if (k_subsets < 1) {
            throw std::invalid_argument("DagConfig: k_subsets must be >= 1");
        }
        uint64_t total = binomial(l_hq, l_bl);
        if (k_subsets > total) {
            throw std::invalid_argument("DagConfig: k_subsets=" + std::to_string(k_subsets) +
                                        " exceeds the " + std::to_string(total) +
                                        " distinct subsets of size " + std::to_string(l_bl));
        }
    }
}

VideoTensor hq_estimate(const std::vector<VideoTensor>& flows) {
    if (flows.empty()) {
        throw std::invalid_argument("hq_estimate: no flows");
    }
    for (size_t i = 1; i < flows.size(); ++i) {
        require_same_shape(flows[0], flows[i], "hq_estimate");
    }
    VideoTensor acc = flows[0];
    for (size_t i = 1; i < flows.size(); ++i) {
        axpy_in_place(acc, 1.0, flows[i]);
    }
    double inv = 1.0 / double(flows.size());
    for (size_t i = 0; i < acc.size(); ++i) {
        acc.data()[i] *= inv;
    }
    return acc;
}

namespace {

// Lexicographic unranking: the rank-th k-subset of {0..n-1} in sorted order.
std::vector<uint32_t> unrank_subset(uint64_t rank, uint32_t n, uint32_t k) {
    std::vector<uint32_t> subset;
    subset.reserve(k);
    uint32_t next = 0;
    for (uint32_t slot = k; slot > 0; --slot) {
        for (uint32_t v = next;; ++v) {
            uint64_t block = binomial(n - 1 - v, slot - 1);
            if (rank < block) {
                subset.push_back(v);
                next = v + 1;
                break;
            }
            rank -= block;
        }
    }
    return subset;
}

}  // namespace

std::vector<std::vector<uint32_t>> select_subsets(const DagConfig& cfg) {
    cfg.validate();
    uint64_t total = binomial(cfg.l_hq, cfg.l_bl);
    std::vector<std::vector<uint32_t>> subsets;
    if (cfg.subset_mode == SubsetMode::exhaustive) {
        subsets.reserve(total);
        for (uint64_t r = 0; r < total; ++r) {
            subsets.push_back(unrank_subset(r, cfg.l_hq, cfg.l_bl));
        }
        return subsets;
    }
    // Random mode: k_subsets distinct ranks by rejection, kept in draw order.
    NoiseStream stream(SeedSpec{cfg.subset_seed, 0, 0});
    std::set<uint64_t> seen;
    subsets.reserve(cfg.k_subsets);
    while (subsets.size() < cfg.k_subsets) {
        uint64_t r = stream.next_below(total);
        if (!seen.insert(r).second) continue;
        subsets.push_back(unrank_subset(r, cfg.l_hq, cfg.l_bl));
    }
    return subsets;
}

std::vector<VideoTensor> baseline_estimates(const std::vector<VideoTensor>& flows,
                                            const DagConfig& cfg) {
    if (flows.size() != cfg.l_hq) {
        throw std::invalid_argument("baseline_estimates: expected " + std::to_string(cfg.l_hq) +
                                    " flows, got " + std::to_string(flows.size()));
    }
    auto subsets = select_subsets(cfg);
    std::vector<VideoTensor> out;
    out.reserve(subsets.size());
    for (const auto& subset : subsets) {
        std::vector<VideoTensor> picked;
        picked.reserve(subset.size());
        for (uint32_t idx : subset) {
            picked.push_back(flows[idx]);
        }
        out.push_back(hq_estimate(picked));
    }
    return out;
}

VideoTensor mean_differential(const VideoTensor& v_hq, const std::vector<VideoTensor>& baselines) {
    if (baselines.empty()) {
        throw std::invalid_argument("mean_differential: no baselines");
    }
    VideoTensor acc(v_hq.shape());
    for (const auto& b : baselines) {
        require_same_shape(v_hq, b, "mean_differential");
        for (size_t i = 0; i < acc.size(); ++i) {
            acc.data()[i] += v_hq.data()[i] - b.data()[i];
        }
    }
    double inv = 1.0 / double(baselines.size());
    for (size_t i = 0; i < acc.size(); ++i) {
        acc.data()[i] *= inv;
    }
    return acc;
}

VideoTensor dag_velocity(const VideoTensor& v_hq, const VideoTensor& d_bar, double w) {
    if (w == 0.0) return v_hq;  // exact identity, d_bar untouched
    require_same_shape(v_hq, d_bar, "dag_velocity");
    VideoTensor out = v_hq;
    axpy_in_place(out, w, d_bar);
    return out;
}

}  // namespace fd
