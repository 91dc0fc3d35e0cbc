#ifndef FD_NOISE_HPP
#define FD_NOISE_HPP

#include <array>
#include <cstdint>

#include "fd/tensor.hpp"

namespace fd {

// Addresses one noise stream. Identical specs always produce identical
// tensors, independent of evaluation order or platform: generation is
// counter-based, keyed by (master_seed, step_index, sample_index).
struct SeedSpec {
    uint64_t master_seed = 0;
    uint32_t step_index = 0;
    uint32_t sample_index = 0;
};

namespace philox {

// Philox 4x32-10 block function. counter/key layout and round constants
// follow the original reference implementation; known-answer vectors are
// pinned in the tests.
std::array<uint32_t, 4> block(const std::array<uint32_t, 4>& counter,
                              const std::array<uint32_t, 2>& key);

}  // namespace philox

// Derives an unrelated master seed for an auxiliary purpose (scene textures,
// scripted-attention jitter, subset sampling) so streams never collide with
// the per-step editing noise.
uint64_t mix_seed(uint64_t master, uint64_t domain);

inline constexpr uint64_t kDomainSceneTexture = 0x7363656e65ULL;   // "scene"
inline constexpr uint64_t kDomainScriptedAttn = 0x6174746eULL;     // "attn"
inline constexpr uint64_t kDomainSubsets = 0x73756273ULL;          // "subs"

// Standard normal tensor for the given stream. Draw i depends only on
// (spec, i), so the full tensor is reproducible and order-independent.
VideoTensor seed_noise(const SeedSpec& spec, const TensorShape& shape);

// Sequential draws from one stream, for consumers that need a mix of
// uniforms, normals and bounded integers (scene textures, loss estimation,
// subset sampling).
class NoiseStream {
public:
    explicit NoiseStream(const SeedSpec& spec) : spec_(spec) {}

    uint64_t next_u64();
    // Uniform in (0, 1), never exactly 0 or 1.
    double next_uniform();
    double next_normal();
    // Uniform integer in [0, n), rejection sampled (n >= 1).
    uint64_t next_below(uint64_t n);

private:
    SeedSpec spec_;
    uint64_t block_ = 0;
    uint64_t pending_u64_ = 0;
    bool has_pending_u64_ = false;
    double pending_normal_ = 0.0;
    bool has_pending_normal_ = false;
};

}  // namespace fd

#endif
