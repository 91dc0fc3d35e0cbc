#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>

#include "fd/noise.hpp"
#include "fd/safc.hpp"
#include "helpers.hpp"

namespace {

fd::AttentionMap random_attention(uint32_t t, uint32_t h, uint32_t w, uint64_t seed) {
    fd::AttentionMap a(t, h, w);
    fd::NoiseStream stream(fd::SeedSpec{seed, 0, 0});
    for (double& v : a.values) v = stream.next_uniform();
    return a;
}

fd::MaskVolume random_binary(uint32_t t, uint32_t h, uint32_t w, uint64_t seed,
                             double fg_prob = 0.4) {
    fd::MaskVolume m(t, h, w);
    fd::NoiseStream stream(fd::SeedSpec{seed, 1, 0});
    for (double& v : m.values) v = stream.next_uniform() < fg_prob ? 1.0 : 0.0;
    return m;
}

fd::AttentionMap brute_smooth(const fd::AttentionMap& a, uint32_t kernel) {
    int r = int(kernel) / 2;
    fd::AttentionMap out(a.t, a.h, a.w);
    for (uint32_t f = 0; f < a.t; ++f) {
        for (int y = 0; y < int(a.h); ++y) {
            for (int x = 0; x < int(a.w); ++x) {
                double acc = 0.0;
                int n = 0;
                for (int yy = y - r; yy <= y + r; ++yy) {
                    for (int xx = x - r; xx <= x + r; ++xx) {
                        if (yy < 0 || xx < 0 || yy >= int(a.h) || xx >= int(a.w)) continue;
                        acc += a.at(f, uint32_t(yy), uint32_t(xx));
                        ++n;
                    }
                }
                out.at(f, uint32_t(y), uint32_t(x)) = acc / n;
            }
        }
    }
    return out;
}

std::vector<double> brute_distance(const fd::MaskVolume& m) {
    std::vector<double> out(m.size());
    for (uint32_t f = 0; f < m.t; ++f) {
        for (uint32_t y = 0; y < m.h; ++y) {
            for (uint32_t x = 0; x < m.w; ++x) {
                int64_t best = -1;
                for (uint32_t fy = 0; fy < m.h; ++fy) {
                    for (uint32_t fx = 0; fx < m.w; ++fx) {
                        if (m.at(f, fy, fx) != 1.0) continue;
                        int64_t dy = int64_t(fy) - int64_t(y);
                        int64_t dx = int64_t(fx) - int64_t(x);
                        int64_t d2 = dy * dy + dx * dx;
                        if (best < 0 || d2 < best) best = d2;
                    }
                }
                out[m.index(f, y, x)] =
                    best < 0 ? std::numeric_limits<double>::infinity() : std::sqrt(double(best));
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("constructors and config reject degenerate inputs") {
    CHECK_THROWS_AS(fd::AttentionMap(0, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(fd::MaskVolume(2, 0, 4), std::invalid_argument);

    fd::MaskConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.kernel = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.kernel = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.kernel = 3;
    cfg.delta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.delta = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("attention_saliency localizes the condition difference") {
    fd::TensorShape shape{2, 6, 6, 2};
    fd::VideoTensor mu0 = th::random_tensor(shape, 200, 0.0, 1.0);
    fd::VideoTensor mu1 = mu0;
    // Differ only inside a 2x2 patch of every frame.
    for (uint32_t f = 0; f < shape.t; ++f)
        for (uint32_t y = 1; y <= 2; ++y)
            for (uint32_t x = 3; x <= 4; ++x)
                for (uint32_t c = 0; c < shape.c; ++c) mu1.at(f, y, x, c) += 1.0 + y;

    fd::ConditionRegistry reg;
    reg.add(fd::kUnconditionalId, fd::DataDistribution::delta(mu0));
    reg.add("patch", fd::DataDistribution::delta(mu1));
    fd::RegistryField field(std::move(reg));

    fd::VideoTensor probe = th::random_tensor(shape, 201);
    fd::AttentionMap a = fd::attention_saliency(field, probe, 0.5, fd::Condition{"patch", ""});

    double peak = 0.0;
    for (uint32_t f = 0; f < shape.t; ++f) {
        for (uint32_t y = 0; y < shape.h; ++y) {
            for (uint32_t x = 0; x < shape.w; ++x) {
                double v = a.at(f, y, x);
                peak = std::max(peak, v);
                bool inside = y >= 1 && y <= 2 && x >= 3 && x <= 4;
                if (inside) {
                    CHECK(v > 0.0);
                } else {
                    CHECK(v == 0.0);
                }
            }
        }
    }
    CHECK(peak == 1.0);  // max-normalized

    // The unconditional condition differs from itself nowhere: all-zero map.
    fd::AttentionMap z = fd::attention_saliency(field, probe, 0.5, fd::unconditional());
    for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("scripted attention looks up relevance and jitters deterministically") {
    fd::MaskVolume blob(1, 4, 4, 0.0);
    blob.at(0, 1, 1) = 1.0;
    blob.at(0, 1, 2) = 1.0;
    std::map<std::string, fd::MaskVolume> rel{{"disk", blob}};

    fd::VideoTensor state(fd::TensorShape{1, 4, 4, 1}, 0.0);

    fd::ScriptedAttention plain(rel, 0.0, 0);
    fd::AttentionMap a = plain.saliency(state, 0.5, fd::Condition{"c", "disk"}, 3, 2);
    for (uint32_t y = 0; y < 4; ++y)
        for (uint32_t x = 0; x < 4; ++x)
            CHECK(a.at(0, y, x) == blob.at(0, y, x));

    fd::AttentionMap unknown = plain.saliency(state, 0.5, fd::Condition{"c", "nope"}, 0, 0);
    for (double v : unknown.values) CHECK(v == 0.0);

    fd::ScriptedAttention noisy(rel, 0.5, 99);
    fd::AttentionMap n1 = noisy.saliency(state, 0.5, fd::Condition{"c", "disk"}, 3, 2);
    fd::AttentionMap n2 = noisy.saliency(state, 0.5, fd::Condition{"c", "disk"}, 3, 2);
    fd::AttentionMap n3 = noisy.saliency(state, 0.5, fd::Condition{"c", "disk"}, 3, 3);
    CHECK(n1.values == n2.values);
    CHECK(n1.values != n3.values);
    for (size_t i = 0; i < n1.values.size(); ++i) {
        double base = blob.values[i];
        CHECK(n1.values[i] > base);
        CHECK(n1.values[i] < base + 0.5);
    }

    CHECK_THROWS_AS(fd::ScriptedAttention(rel, -0.1, 0), std::invalid_argument);
}

TEST_CASE("spatial_smooth matches the window-mean oracle") {
    fd::AttentionMap a = random_attention(2, 9, 7, 210);

    // kernel 1 is the identity
    CHECK(fd::spatial_smooth(a, 1).values == a.values);

    // constants are fixed points for any kernel
    fd::AttentionMap c(2, 5, 5, 0.7);
    for (uint32_t k : {1u, 3u, 5u, 11u}) {
        fd::AttentionMap s = fd::spatial_smooth(c, k);
        for (double v : s.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
    }

    // centered impulse on 5x5, kernel 3: corners of the window get 1/9, the
    // border rows keep 0 except where the clamped window still sees the spike
    fd::AttentionMap imp(1, 5, 5, 0.0);
    imp.at(0, 2, 2) = 9.0;
    fd::AttentionMap s = fd::spatial_smooth(imp, 3);
    for (uint32_t y = 1; y <= 3; ++y)
        for (uint32_t x = 1; x <= 3; ++x) CHECK(s.at(0, y, x) == doctest::Approx(1.0));
    CHECK(s.at(0, 0, 0) == 0.0);
    CHECK(s.at(0, 0, 2) == 0.0);

    for (uint32_t k : {3u, 5u, 9u}) {
        fd::AttentionMap got = fd::spatial_smooth(a, k);
        fd::AttentionMap want = brute_smooth(a, k);
        for (size_t i = 0; i < got.values.size(); ++i)
            CHECK(got.values[i] == doctest::Approx(want.values[i]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(fd::spatial_smooth(a, 2), std::invalid_argument);
    CHECK_THROWS_AS(fd::spatial_smooth(a, 0), std::invalid_argument);
}

TEST_CASE("binarize_global_mean thresholds at the global mean") {
    fd::AttentionMap a(1, 2, 2);
    a.values = {1.0, 3.0, 5.0, 7.0};  // mean 4
    fd::MaskVolume m = fd::binarize_global_mean(a);
    CHECK(m.values == std::vector<double>{0.0, 0.0, 1.0, 1.0});

    // >= keeps constant maps fully on
    fd::AttentionMap c(2, 3, 3, 0.25);
    for (double v : fd::binarize_global_mean(c).values) CHECK(v == 1.0);

    // threshold is global across frames, not per frame
    fd::AttentionMap two(2, 1, 2);
    two.values = {0.0, 0.0, 10.0, 10.0};  // mean 5: frame 0 all off, frame 1 all on
    fd::MaskVolume tm = fd::binarize_global_mean(two);
    CHECK(tm.values == std::vector<double>{0.0, 0.0, 1.0, 1.0});

    fd::AttentionMap r = random_attention(2, 8, 8, 220);
    double mean = 0.0;
    for (double v : r.values) mean += v;
    mean /= double(r.values.size());
    fd::MaskVolume got = fd::binarize_global_mean(r);
    for (size_t i = 0; i < r.values.size(); ++i)
        CHECK(got.values[i] == (r.values[i] >= mean ? 1.0 : 0.0));
}

TEST_CASE("union_masks is elementwise or and rejects non-binary input") {
    fd::MaskVolume a = random_binary(2, 6, 6, 230);
    fd::MaskVolume b = random_binary(2, 6, 6, 231);
    fd::MaskVolume u = fd::union_masks(a, b);
    for (size_t i = 0; i < u.values.size(); ++i)
        CHECK(u.values[i] == ((a.values[i] != 0.0 || b.values[i] != 0.0) ? 1.0 : 0.0));

    fd::MaskVolume zeros(2, 6, 6, 0.0);
    CHECK(fd::union_masks(a, zeros).values == a.values);
    CHECK(fd::union_masks(a, a).values == a.values);

    fd::MaskVolume bad(2, 6, 6, 0.5);
    CHECK_THROWS_AS(fd::union_masks(a, bad), std::invalid_argument);
    fd::MaskVolume small(1, 6, 6, 0.0);
    CHECK_THROWS_AS(fd::union_masks(a, small), std::invalid_argument);
}

TEST_CASE("distance_transform is exact") {
    // all-foreground: zero everywhere
    fd::MaskVolume ones(2, 4, 4, 1.0);
    for (double d : fd::distance_transform(ones)) CHECK(d == 0.0);

    // single foreground voxel at (0,0) of a 3x3 frame
    fd::MaskVolume single(1, 3, 3, 0.0);
    single.at(0, 0, 0) = 1.0;
    std::vector<double> d = fd::distance_transform(single);
    std::vector<double> want = {0.0,          1.0,          2.0,
                                1.0,          std::sqrt(2.0), std::sqrt(5.0),
                                2.0,          std::sqrt(5.0), std::sqrt(8.0)};
    REQUIRE(d.size() == want.size());
    for (size_t i = 0; i < d.size(); ++i) CHECK(d[i] == want[i]);

    // frames with no foreground are +infinity
    fd::MaskVolume empty(2, 3, 3, 0.0);
    empty.at(1, 1, 1) = 1.0;  // frame 0 stays empty
    std::vector<double> ed = fd::distance_transform(empty);
    for (uint32_t y = 0; y < 3; ++y)
        for (uint32_t x = 0; x < 3; ++x) CHECK(std::isinf(ed[empty.index(0, y, x)]));
    CHECK(ed[empty.index(1, 1, 1)] == 0.0);

    // random volumes, exact equality with the quadratic oracle
    for (uint64_t s = 0; s < 40; ++s) {
        fd::NoiseStream dims(fd::SeedSpec{240 + s, 0, 0});
        uint32_t h = 1 + uint32_t(dims.next_below(32));
        uint32_t w = 1 + uint32_t(dims.next_below(32));
        fd::MaskVolume m = random_binary(1, h, w, 300 + s, 0.15);
        std::vector<double> got = fd::distance_transform(m);
        std::vector<double> ref = brute_distance(m);
        REQUIRE(got.size() == ref.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == ref[i]);
    }
}

TEST_CASE("soften_edges feathers with exp(-delta * distance)") {
    fd::MaskVolume single(1, 3, 3, 0.0);
    single.at(0, 0, 0) = 1.0;
    std::vector<double> dist = fd::distance_transform(single);

    for (double delta : {0.1, 0.25}) {
        fd::MaskVolume soft = fd::soften_edges(single, delta);
        for (size_t i = 0; i < soft.values.size(); ++i) {
            double want = dist[i] == 0.0 ? 1.0 : std::exp(-delta * dist[i]);
            CHECK(std::fabs(soft.values[i] - want) <= 1e-12);
        }
    }

    fd::MaskVolume soft = fd::soften_edges(single, 0.25);
    CHECK(soft.at(0, 0, 0) == 1.0);
    CHECK(soft.at(0, 0, 1) == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
    CHECK(soft.at(0, 0, 2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    // monotone: farther voxels never get larger weights
    fd::MaskVolume m = random_binary(1, 16, 16, 260, 0.1);
    std::vector<double> dm = fd::distance_transform(m);
    fd::MaskVolume sm = fd::soften_edges(m, 0.25);
    for (size_t i = 0; i < sm.values.size(); ++i)
        for (size_t j = 0; j < sm.values.size(); ++j)
            if (dm[i] < dm[j]) CHECK(sm.values[i] >= sm.values[j]);

    // empty frames soften to all zeros
    fd::MaskVolume none(1, 4, 4, 0.0);
    for (double v : fd::soften_edges(none, 0.25).values) CHECK(v == 0.0);
}

TEST_CASE("build_mask composes the pipeline stages verbatim") {
    fd::AttentionMap a_src = random_attention(2, 12, 10, 270);
    fd::AttentionMap a_tar = random_attention(2, 12, 10, 271);

    fd::MaskConfig cfg;
    cfg.kernel = 3;
    cfg.delta = 0.25;
    cfg.apply_softening = true;

    fd::MaskVolume composed = fd::soften_edges(
        fd::union_masks(fd::binarize_global_mean(fd::spatial_smooth(a_src, cfg.kernel)),
                        fd::binarize_global_mean(fd::spatial_smooth(a_tar, cfg.kernel))),
        cfg.delta);
    fd::MaskVolume got = fd::build_mask(a_src, a_tar, cfg);
    CHECK(got.values == composed.values);

    cfg.apply_softening = false;
    fd::MaskVolume binary = fd::build_mask(a_src, a_tar, cfg);
    for (double v : binary.values) CHECK((v == 0.0 || v == 1.0));

    // constant saliency thresholds to all-ones on both branches
    fd::AttentionMap flat(1, 5, 5, 0.3);
    fd::MaskVolume all = fd::build_mask(flat, flat, cfg);
    for (double v : all.values) CHECK(v == 1.0);

    // disjoint supports: union covers both
    fd::AttentionMap left(1, 4, 8, 0.0), right(1, 4, 8, 0.0);
    for (uint32_t y = 0; y < 4; ++y) {
        left.at(0, y, 1) = 1.0;
        right.at(0, y, 6) = 1.0;
    }
    fd::MaskConfig k1;
    k1.kernel = 1;
    k1.apply_softening = false;
    fd::MaskVolume u = fd::build_mask(left, right, k1);
    for (uint32_t y = 0; y < 4; ++y) {
        CHECK(u.at(0, y, 1) == 1.0);
        CHECK(u.at(0, y, 6) == 1.0);
        CHECK(u.at(0, y, 3) == 0.0);
    }

    fd::MaskConfig bad;
    bad.kernel = 2;
    CHECK_THROWS_AS(fd::build_mask(a_src, a_tar, bad), std::invalid_argument);
}

TEST_CASE("apply_mask gates velocities exactly") {
    fd::TensorShape shape{1, 1, 2, 1};
    fd::VideoTensor v(shape, 0.0);
    v.at(0, 0, 0, 0) = 2.0;
    v.at(0, 0, 1, 0) = 4.0;
    fd::MaskVolume m(1, 1, 2, 0.0);
    m.at(0, 0, 0) = 1.0;
    m.at(0, 0, 1) = 0.5;
    fd::VideoTensor out = fd::apply_mask(v, m);
    CHECK(out.at(0, 0, 0, 0) == 2.0);
    CHECK(out.at(0, 0, 1, 0) == 2.0);

    // mask zero forces exact 0.0 even against huge magnitudes
    fd::MaskVolume zeros(1, 1, 2, 0.0);
    fd::VideoTensor huge(shape, 1e300);
    fd::VideoTensor gated = fd::apply_mask(huge, zeros);
    for (double x : gated.data()) CHECK(x == 0.0);

    // ones mask is the identity, broadcast across channels
    fd::TensorShape rgb{2, 3, 3, 3};
    fd::VideoTensor rv = th::random_tensor(rgb, 280);
    fd::MaskVolume ones(2, 3, 3, 1.0);
    CHECK(th::bitwise_equal(fd::apply_mask(rv, ones), rv));

    fd::MaskVolume half(2, 3, 3, 0.0);
    half.at(0, 1, 1) = 1.0;
    fd::VideoTensor hv = fd::apply_mask(rv, half);
    for (uint32_t c = 0; c < 3; ++c) {
        CHECK(hv.at(0, 1, 1, c) == rv.at(0, 1, 1, c));
        CHECK(hv.at(1, 1, 1, c) == 0.0);
    }

    fd::MaskVolume wrong(1, 3, 3, 1.0);
    CHECK_THROWS_AS(fd::apply_mask(rv, wrong), std::invalid_argument);
}

TEST_CASE("tensor conversions round-trip attention and masks") {
    fd::AttentionMap a = random_attention(2, 5, 4, 290);
    fd::VideoTensor ta = fd::attention_to_tensor(a);
    CHECK(ta.shape().c == 1);
    fd::AttentionMap back = fd::attention_from_tensor(ta);
    CHECK(back.values == a.values);

    fd::MaskVolume m = random_binary(2, 5, 4, 291);
    fd::MaskVolume mb = fd::mask_from_tensor(fd::mask_to_tensor(m));
    CHECK(mb.values == m.values);

    fd::VideoTensor rgb(fd::TensorShape{1, 2, 2, 3}, 0.0);
    CHECK_THROWS_AS(fd::attention_from_tensor(rgb), std::invalid_argument);
    CHECK_THROWS_AS(fd::mask_from_tensor(rgb), std::invalid_argument);
}
