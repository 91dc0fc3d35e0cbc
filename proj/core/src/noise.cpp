#include "fd/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "fd/parallel.hpp"

namespace fd {

namespace philox {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4>& x, const std::array<uint32_t, 2>& k) {
    uint64_t p0 = uint64_t(kMul0) * x[0];
    uint64_t p1 = uint64_t(kMul1) * x[2];
    uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    std::array<uint32_t, 4> out;
    out[0] = hi1 ^ x[1] ^ k[0];
    out[1] = lo1;
    out[2] = hi0 ^ x[3] ^ k[1];
    out[3] = lo0;
    x = out;
}

}  // namespace

std::array<uint32_t, 4> block(const std::array<uint32_t, 4>& counter,
                              const std::array<uint32_t, 2>& key) {
    std::array<uint32_t, 4> x = counter;
    std::array<uint32_t, 2> k = key;
    round_once(x, k);
    for (int r = 1; r < 10; ++r) {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
        round_once(x, k);
    }
    return x;
}

}  // namespace philox

uint64_t mix_seed(uint64_t master, uint64_t domain) {
    // splitmix64 finalizer over the xor; enough to decorrelate stream keys.
    uint64_t z = master ^ (domain + 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

struct BlockDraw {
    double u1, u2;
};

inline BlockDraw uniforms_for_block(const SeedSpec& spec, uint64_t block_index) {
    std::array<uint32_t, 4> counter{uint32_t(block_index), uint32_t(block_index >> 32),
                                    spec.step_index, spec.sample_index};
    std::array<uint32_t, 2> key{uint32_t(spec.master_seed), uint32_t(spec.master_seed >> 32)};
    auto out = philox::block(counter, key);
    uint64_t a = uint64_t(out[0]) | (uint64_t(out[1]) << 32);
    uint64_t b = uint64_t(out[2]) | (uint64_t(out[3]) << 32);
    // 53-bit mantissa, offset by half a step: strictly inside (0, 1).
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return {(double(a >> 11) + 0.5) * kScale, (double(b >> 11) + 0.5) * kScale};
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline void box_muller(const BlockDraw& u, double& z0, double& z1) {
    double r = std::sqrt(-2.0 * std::log(u.u1));
    z0 = r * std::cos(kTwoPi * u.u2);
    z1 = r * std::sin(kTwoPi * u.u2);
}

}  // namespace

VideoTensor seed_noise(const SeedSpec& spec, const TensorShape& shape) {
    require_valid_shape(shape, "seed_noise");
    VideoTensor out(shape);
    size_t n = out.size();
    size_t blocks = (n + 1) / 2;
    double* dst = out.data().data();
    parallel_for(blocks, [&](size_t lo, size_t hi) {
        for (size_t b = lo; b < hi; ++b) {
            double z0, z1;
            box_muller(uniforms_for_block(spec, b), z0, z1);
            dst[2 * b] = z0;
            if (2 * b + 1 < n) dst[2 * b + 1] = z1;
        }
    });
    return out;
}

uint64_t NoiseStream::next_u64() {
    if (has_pending_u64_) {
        has_pending_u64_ = false;
        return pending_u64_;
    }
    std::array<uint32_t, 4> counter{uint32_t(block_), uint32_t(block_ >> 32), spec_.step_index,
                                    spec_.sample_index};
    std::array<uint32_t, 2> key{uint32_t(spec_.master_seed), uint32_t(spec_.master_seed >> 32)};
    auto out = philox::block(counter, key);
    ++block_;
    pending_u64_ = uint64_t(out[2]) | (uint64_t(out[3]) << 32);
    has_pending_u64_ = true;
    return uint64_t(out[0]) | (uint64_t(out[1]) << 32);
}

double NoiseStream::next_uniform() {
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return (double(next_u64() >> 11) + 0.5) * kScale;
}

double NoiseStream::next_normal() {
    if (has_pending_normal_) {
        has_pending_normal_ = false;
        return pending_normal_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    pending_normal_ = r * std::sin(kTwoPi * u2);
    has_pending_normal_ = true;
    return r * std::cos(kTwoPi * u2);
}

uint64_t NoiseStream::next_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("NoiseStream::next_below: n must be >= 1");
    if (n == 1) return 0;
    // Rejection below the largest multiple of n, so the result is unbiased
    // and identical on every platform.
    uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
    for (;;) {
        uint64_t v = next_u64();
        if (v <= limit) return v % n;
    }
}

}  // namespace fd
