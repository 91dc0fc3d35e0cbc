#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fd/metrics.hpp"
#include "helpers.hpp"

namespace {

// Direct per-pixel window oracle, independent loop structure.
double brute_ssim(const fd::VideoTensor& a, const fd::VideoTensor& b) {
    const double c1 = std::pow(fd::kSsimK1 * fd::kSsimL, 2.0);
    const double c2 = std::pow(fd::kSsimK2 * fd::kSsimL, 2.0);
    int r = int(fd::kSsimWindow) / 2;
    int h = int(a.height()), w = int(a.width());
    double total = 0.0;
    size_t count = 0;
    for (uint32_t f = 0; f < a.frames(); ++f) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double per_channel = 0.0;
                for (uint32_t c = 0; c < a.channels(); ++c) {
                    double ma = 0, mb = 0, va = 0, vb = 0, cov = 0;
                    int n = 0;
                    for (int yy = y - r; yy <= y + r; ++yy) {
                        for (int xx = x - r; xx <= x + r; ++xx) {
                            if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
                            ma += a.at(f, yy, xx, c);
                            mb += b.at(f, yy, xx, c);
                            ++n;
                        }
                    }
                    ma /= n;
                    mb /= n;
                    for (int yy = y - r; yy <= y + r; ++yy) {
                        for (int xx = x - r; xx <= x + r; ++xx) {
                            if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
                            va += std::pow(a.at(f, yy, xx, c) - ma, 2.0);
                            vb += std::pow(b.at(f, yy, xx, c) - mb, 2.0);
                            cov += (a.at(f, yy, xx, c) - ma) * (b.at(f, yy, xx, c) - mb);
                        }
                    }
                    va /= n;
                    vb /= n;
                    cov /= n;
                    per_channel += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                                   ((ma * ma + mb * mb + c1) * (va + vb + c2));
                }
                total += per_channel / a.channels();
                ++count;
            }
        }
    }
    return total / double(count);
}

fd::FlowField constant_flow(uint32_t pairs, uint32_t h, uint32_t w, double dy, double dx) {
    fd::FlowField f(pairs, h, w);
    for (uint32_t p = 0; p < pairs; ++p)
        for (uint32_t y = 0; y < h; ++y)
            for (uint32_t x = 0; x < w; ++x) {
                f.dy(p, y, x) = dy;
                f.dx(p, y, x) = dx;
            }
    return f;
}

}  // namespace

TEST_CASE("ssim identities") {
    fd::VideoTensor a = th::random_tensor(fd::TensorShape{2, 12, 10, 3}, 900, 0.0, 1.0);
    CHECK(std::fabs(fd::ssim(a, a) - 1.0) < 1e-9);

    fd::VideoTensor b = th::random_tensor(fd::TensorShape{2, 12, 10, 3}, 901, 0.0, 1.0);
    CHECK(std::fabs(fd::ssim(a, b) - fd::ssim(b, a)) < 1e-12);
    CHECK(fd::ssim(a, b) < 1.0);

    fd::VideoTensor wrong(fd::TensorShape{1, 12, 10, 3}, 0.0);
    CHECK_THROWS_AS(fd::ssim(a, wrong), std::invalid_argument);
}

TEST_CASE("ssim of constant images reduces to the luminance term") {
    double mu_a = 0.3, mu_b = 0.5;
    fd::VideoTensor a(fd::TensorShape{1, 9, 9, 1}, mu_a);
    fd::VideoTensor b(fd::TensorShape{1, 9, 9, 1}, mu_b);
    double c1 = std::pow(fd::kSsimK1 * fd::kSsimL, 2.0);
    double want = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
    CHECK(fd::ssim(a, b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("ssim matches the brute-force window oracle") {
    fd::VideoTensor a = th::random_tensor(fd::TensorShape{2, 16, 16, 2}, 910, 0.0, 1.0);
    fd::VideoTensor noise = th::random_tensor(fd::TensorShape{2, 16, 16, 2}, 911, -0.05, 0.05);
    fd::VideoTensor b = fd::add(a, noise);
    CHECK(std::fabs(fd::ssim(a, b) - brute_ssim(a, b)) < 1e-7);
    CHECK(std::fabs(fd::ssim(a, a) - brute_ssim(a, a)) < 1e-12);
}

TEST_CASE("warp_frame with zero flow is the identity") {
    fd::VideoTensor v = th::random_tensor(fd::TensorShape{3, 8, 7, 2}, 920, 0.0, 1.0);
    fd::FlowField zero = constant_flow(2, 8, 7, 0.0, 0.0);
    for (uint32_t f = 0; f < 3; ++f) {
        fd::VideoTensor w = fd::warp_frame(v, f, zero, f == 2 ? 1 : f);
        fd::VideoTensor want = fd::slice_frame(v, f);
        CHECK(fd::max_abs_diff(w, want) < 1e-7);
    }
}

TEST_CASE("warp_frame integer shifts sample exactly with clamped borders") {
    fd::VideoTensor v = th::random_tensor(fd::TensorShape{1, 6, 6, 1}, 930, 0.0, 1.0);
    fd::FlowField shift = constant_flow(1, 6, 6, 0.0, 1.0);  // sample one pixel to the right
    fd::VideoTensor w = fd::warp_frame(v, 0, shift, 0);
    for (uint32_t y = 0; y < 6; ++y) {
        for (uint32_t x = 0; x < 5; ++x) CHECK(w.at(0, y, x, 0) == v.at(0, y, x + 1, 0));
        CHECK(w.at(0, y, 5, 0) == v.at(0, y, 5, 0));  // clamped at the border
    }

    fd::FlowField down = constant_flow(1, 6, 6, 2.0, 0.0);
    fd::VideoTensor wd = fd::warp_frame(v, 0, down, 0);
    for (uint32_t y = 0; y < 6; ++y) {
        uint32_t sy = std::min(y + 2, 5u);
        for (uint32_t x = 0; x < 6; ++x) CHECK(wd.at(0, y, x, 0) == v.at(0, sy, x, 0));
    }
}

TEST_CASE("warp_frame interpolates linear images exactly at half-pixel offsets") {
    fd::VideoTensor ramp(fd::TensorShape{1, 4, 8, 1}, 0.0);
    for (uint32_t y = 0; y < 4; ++y)
        for (uint32_t x = 0; x < 8; ++x) ramp.at(0, y, x, 0) = double(x);
    fd::FlowField half = constant_flow(1, 4, 8, 0.0, 0.5);
    fd::VideoTensor w = fd::warp_frame(ramp, 0, half, 0);
    for (uint32_t y = 0; y < 4; ++y)
        for (uint32_t x = 0; x + 1 < 8; ++x)
            CHECK(w.at(0, y, x, 0) == doctest::Approx(double(x) + 0.5).epsilon(1e-12));

    CHECK_THROWS_AS(fd::warp_frame(ramp, 5, half, 0), std::invalid_argument);
    CHECK_THROWS_AS(fd::warp_frame(ramp, 0, half, 3), std::invalid_argument);
    fd::FlowField wrong = constant_flow(1, 5, 5, 0.0, 0.0);
    CHECK_THROWS_AS(fd::warp_frame(ramp, 0, wrong, 0), std::invalid_argument);
}

TEST_CASE("warp_metrics on a static video with zero flow is perfect") {
    fd::VideoTensor frame = th::random_tensor(fd::TensorShape{1, 10, 10, 1}, 940, 0.0, 1.0);
    fd::VideoTensor video(fd::TensorShape{4, 10, 10, 1}, 0.0);
    for (uint32_t f = 0; f < 4; ++f)
        for (uint32_t y = 0; y < 10; ++y)
            for (uint32_t x = 0; x < 10; ++x) video.at(f, y, x, 0) = frame.at(0, y, x, 0);

    fd::FlowField zero = constant_flow(3, 10, 10, 0.0, 0.0);
    fd::WarpMetrics m = fd::warp_metrics(video, zero);
    CHECK(std::fabs(m.warp_ssim - 1.0) < 1e-9);
    CHECK(m.warp_l1 < 1e-12);
    CHECK(m.warp_l2 < 1e-12);

    // temporal noise breaks consistency
    fd::VideoTensor noisy = th::random_tensor(fd::TensorShape{4, 10, 10, 1}, 941, 0.0, 1.0);
    fd::WarpMetrics nm = fd::warp_metrics(noisy, zero);
    CHECK(nm.warp_ssim < 1.0);
    CHECK(nm.warp_l1 > 0.01);

    fd::FlowField short_flow = constant_flow(2, 10, 10, 0.0, 0.0);
    CHECK_THROWS_AS(fd::warp_metrics(video, short_flow), std::invalid_argument);
    fd::VideoTensor one(fd::TensorShape{1, 10, 10, 1}, 0.0);
    fd::FlowField pair1 = constant_flow(1, 10, 10, 0.0, 0.0);
    CHECK_THROWS_AS(fd::warp_metrics(one, pair1), std::invalid_argument);
}

TEST_CASE("warp_metrics source pairing warps the source against the edited video") {
    // Source: left column lit, then shifted right by one pixel per frame.
    // The flow is exact for the source, so warping source frame t reproduces
    // source frame t+1; compare that against the edited video's frame t+1.
    uint32_t h = 6, w = 8;
    fd::VideoTensor source(fd::TensorShape{3, h, w, 1}, 0.0);
    for (uint32_t f = 0; f < 3; ++f)
        for (uint32_t y = 0; y < h; ++y) source.at(f, y, 1 + f, 0) = 1.0;
    fd::FlowField flow = constant_flow(2, h, w, 0.0, -1.0);  // next frame pulls from x - 1

    fd::WarpMetrics self = fd::warp_metrics(source, flow);
    CHECK(self.warp_l1 == 0.0);

    fd::WarpMetrics same = fd::warp_metrics_source_pairing(source, source, flow);
    CHECK(same.warp_l1 == 0.0);
    CHECK(std::fabs(same.warp_ssim - 1.0) < 1e-9);

    // edited = source + 0.1 everywhere: the warped source misses by 0.1 at
    // every voxel, while edited-vs-edited self-consistency would stay perfect.
    fd::VideoTensor edited = source;
    for (double& x : edited.data()) x += 0.1;
    fd::WarpMetrics cross = fd::warp_metrics_source_pairing(edited, source, flow);
    CHECK(cross.warp_l1 == doctest::Approx(0.1).epsilon(1e-9));
    fd::WarpMetrics editself = fd::warp_metrics(edited, flow);
    CHECK(editself.warp_l1 < 1e-12);
}

TEST_CASE("background_preservation counts exact matches off the edit region") {
    fd::VideoTensor src = th::random_tensor(fd::TensorShape{2, 4, 4, 2}, 950, 0.0, 1.0);
    fd::MaskVolume region(2, 4, 4, 0.0);
    for (uint32_t y = 0; y < 4; ++y) region.at(0, y, 0) = 1.0;  // frame 0, column 0

    CHECK(fd::background_preservation(src, src, region) == 1.0);

    // edits inside the region do not count against preservation
    fd::VideoTensor inside = src;
    for (uint32_t y = 0; y < 4; ++y) inside.at(0, y, 0, 1) += 5.0;
    CHECK(fd::background_preservation(inside, src, region) == 1.0);

    // a single changed background voxel reduces the fraction by 1 / (bg count)
    fd::VideoTensor leak = src;
    leak.at(1, 2, 2, 0) += 1.0;
    size_t bg_voxels = (2 * 4 * 4 - 4) * 2;  // region covers 4 voxels, 2 channels each
    CHECK(fd::background_preservation(leak, src, region) ==
          doctest::Approx(1.0 - 1.0 / double(bg_voxels)).epsilon(1e-12));

    // everything edited, full region: vacuously preserved
    fd::MaskVolume full(2, 4, 4, 1.0);
    fd::VideoTensor all = fd::add(src, fd::VideoTensor(src.shape(), 1.0));
    CHECK(fd::background_preservation(all, src, full) == 1.0);
    CHECK(fd::background_preservation(all, src, region) == 0.0);
}

TEST_CASE("flow tensor conversions") {
    fd::FlowField f(2, 3, 4);
    for (uint32_t p = 0; p < 2; ++p)
        for (uint32_t y = 0; y < 3; ++y)
            for (uint32_t x = 0; x < 4; ++x) {
                f.dy(p, y, x) = 0.1 * p + 0.01 * y;
                f.dx(p, y, x) = -0.2 * double(x);
            }
    fd::VideoTensor t = fd::flow_to_tensor(f);
    CHECK(t.shape() == fd::TensorShape{2, 3, 4, 2});
    fd::FlowField back = fd::flow_from_tensor(t);
    CHECK(back.data == f.data);
    CHECK(back.pairs == 2);

    fd::VideoTensor rgb(fd::TensorShape{1, 3, 4, 3}, 0.0);
    CHECK_THROWS_AS(fd::flow_from_tensor(rgb), std::invalid_argument);
}
