#include "doctest.h"

#include <numbers>

#include "pointwolf/wolf.hpp"
#include "test_support.hpp"

using namespace pointwolf;
using namespace pointwolf::testing;

namespace {

constexpr double deg = std::numbers::pi / 180.0;

WolfConfig degenerate_config(Index anchors) {
    WolfConfig c;
    c.anchors = anchors;
    c.scale_max = 1;
    c.rotation_max = 0;
    c.translation_max = 0;
    return c;
}

LocalTransform<double> translate_at(const Vector3d& anchor, const Vector3d& b) {
    auto t = LocalTransform<double>::identity_at(anchor);
    t.sim.translation = b;
    return t;
}

}  // namespace

TEST_SUITE("wolf") {

TEST_CASE("WolfConfig validation") {
    CHECK_NOTHROW(WolfConfig{}.validate());
    auto bad = [](auto mutate) {
        WolfConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    bad([](WolfConfig& c) { c.anchors = 0; });
    bad([](WolfConfig& c) { c.bandwidth = 0; });
    bad([](WolfConfig& c) { c.scale_max = 0.9; });
    bad([](WolfConfig& c) { c.rotation_max = -0.1; });
    bad([](WolfConfig& c) { c.translation_max = -1; });
    bad([](WolfConfig& c) { c.mask_keep = 0; });
    bad([](WolfConfig& c) { c.mask_keep = 1; });
}

TEST_CASE("scaled_ranges multiplies the three ranges only") {
    const WolfConfig base;
    const WolfConfig x2 = base.scaled_ranges(2);
    CHECK(x2.rotation_max == doctest::Approx(30 * deg));
    CHECK(x2.scale_max == 4);
    CHECK(x2.translation_max == 2);
    CHECK(x2.anchors == base.anchors);
    CHECK(x2.bandwidth == base.bandwidth);
}

TEST_CASE("degenerate ranges sample identity transforms") {
    Rng gen(1);
    const PointCloud c = random_cloud(64, gen);
    Rng rng(2);
    for (const auto& t : sample_local_transforms(c, degenerate_config(6), rng)) {
        CHECK(t.sim.rotation == Matrix3d::Identity());
        CHECK(t.sim.scale == Vector3d::Ones());
        CHECK(t.sim.translation.isZero());
        CHECK(t.sim.center == t.anchor);
    }
}

TEST_CASE("mask rejection terminates and never yields zero mask") {
    Rng gen(3);
    const PointCloud c = random_cloud(64, gen);
    for (double beta : {0.001, 0.5, 0.999}) {
        WolfConfig cfg;
        cfg.anchors = 16;
        cfg.mask_keep = beta;
        Rng rng(4);
        const auto ts = sample_local_transforms(c, cfg, rng);
        REQUIRE(ts.size() == 16);
        int full = 0;
        for (const auto& t : ts) {
            CHECK_FALSE(t.mask.isZero());
            CHECK(((t.mask.array() == 0) || (t.mask.array() == 1)).all());
            full += t.mask == Vector3d::Ones();
        }
        if (beta == 0.999) CHECK(full == 16);
    }
}

TEST_CASE("sampled parameters stay in the baseline ranges") {
    Rng gen(5);
    const PointCloud c = random_cloud(128, gen);
    WolfConfig cfg;  // 15 deg, 2, 1
    cfg.anchors = 10;
    Rng rng(6);
    int draws = 0;
    while (draws < 10000) {
        for (const auto& t : sample_local_transforms(c, cfg, rng)) {
            for (double a : {t.angles.x, t.angles.y, t.angles.z}) {
                CHECK(a >= -15 * deg);
                CHECK(a <= 15 * deg);
            }
            CHECK((t.sim.scale.array() >= 1).all());
            CHECK((t.sim.scale.array() <= 2).all());
            CHECK((t.sim.translation.cwiseAbs().array() <= 1).all());
            CHECK(t.sim.is_valid());
            ++draws;
        }
    }
}

TEST_CASE("draw order is scale, angles, translation, mask") {
    Rng gen(7);
    const PointCloud c = random_cloud(20, gen);
    WolfConfig cfg;
    cfg.anchors = 1;
    Rng rng(8);
    const auto t = sample_local_transforms(c, cfg, rng).front();

    Rng replay(8);
    const Index first = uniform_index<Index>(replay, c.rows());
    CHECK(t.anchor == Vector3d(c.row(first).transpose()));
    for (int k = 0; k < 3; ++k) CHECK(t.sim.scale[k] == uniform(replay, 1.0, cfg.scale_max));
    CHECK(t.angles.x == uniform(replay, -cfg.rotation_max, cfg.rotation_max));
    CHECK(t.angles.y == uniform(replay, -cfg.rotation_max, cfg.rotation_max));
    CHECK(t.angles.z == uniform(replay, -cfg.rotation_max, cfg.rotation_max));
    for (int k = 0; k < 3; ++k)
        CHECK(t.sim.translation[k] == uniform(replay, -cfg.translation_max, cfg.translation_max));
    Vector3d mask;
    do {
        for (int k = 0; k < 3; ++k) mask[k] = bernoulli(replay, cfg.mask_keep) ? 1 : 0;
    } while (mask.isZero());
    CHECK(t.mask == mask);
}

TEST_CASE("M > N propagates from farthest point sampling") {
    Rng gen(9);
    const PointCloud c = random_cloud(3, gen);
    Rng rng(0);
    CHECK_THROWS_AS(sample_local_transforms(c, degenerate_config(4), rng), std::invalid_argument);
}

TEST_CASE("kernel_weight examples") {
    const double h = 0.7;
    auto t = LocalTransform<double>::identity_at(Vector3d(1, 2, 3));
    CHECK(kernel_weight(t.anchor, t, h) == 1.0);

    const Vector3d dir = Vector3d(1, -2, 2).normalized();
    CHECK(kernel_weight(Vector3d(t.anchor + dir * h * std::sqrt(2.0)), t, h) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-14));

    t.mask = Vector3d(0, 0, 1);
    CHECK(kernel_weight(Vector3d(t.anchor + Vector3d(5, 5, 0)), t, h) == 1.0);

    CHECK_THROWS_AS(kernel_weight(t.anchor, t, 0.0), std::invalid_argument);
}

TEST_CASE("weight matrix rows are positive and normalized") {
    Rng rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const WolfConfig cfg = random_config(rng);
        const PointCloud c = random_cloud(cfg.anchors + 40, rng) * 3.0;
        const auto ts = sample_local_transforms(c, cfg, rng);
        const Eigen::MatrixXd w = weight_matrix(c, ts, cfg.bandwidth);
        CHECK(w.rows() == c.rows());
        CHECK(w.cols() == cfg.anchors);
        CHECK((w.array() > 0).all());
        CHECK((w.rowwise().sum().array() - 1).abs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("weights stay positive far from every anchor") {
    // raw kernels underflow to 0 here; normalized weights must not
    auto a = LocalTransform<double>::identity_at(Vector3d(0, 0, 0));
    auto b = LocalTransform<double>::identity_at(Vector3d(1, 0, 0));
    PointCloud far(1, 3);
    far << 100, 0, 0;
    CHECK(kernel_weight(Vector3d(100, 0, 0), a, 0.1) == 0.0);
    const Eigen::MatrixXd w = weight_matrix(far, {a, b}, 0.1);
    CHECK(w.allFinite());
    CHECK(w.sum() == doctest::Approx(1.0));
}

TEST_CASE("blend rejects empty transform lists and bad bandwidth") {
    PointCloud c(1, 3);
    c.setZero();
    const std::vector<LocalTransform<double>> none;
    CHECK_THROWS_AS(blend_pointwise(c, none, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(blend_transform_space(c, none, 0.5), std::invalid_argument);
    const std::vector<LocalTransform<double>> one{LocalTransform<double>::identity_at(Vector3d::Zero())};
    CHECK_THROWS_AS(blend_pointwise(c, one, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(weight_matrix(c, one, -1.0), std::invalid_argument);
}

TEST_CASE("single anchor reduces to apply_similarity") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        WolfConfig cfg = random_config(rng);
        cfg.anchors = 1;
        const PointCloud c = random_cloud(100, rng);
        const auto ts = sample_local_transforms(c, cfg, rng);
        const PointCloud a = blend_pointwise(c, ts, cfg.bandwidth);
        const PointCloud b = blend_transform_space(c, ts, cfg.bandwidth);
        for (Index i = 0; i < c.rows(); ++i) {
            const Vector3d ref = apply_similarity(ts[0].sim, Vector3d(c.row(i).transpose()));
            CHECK((a.row(i).transpose() - ref).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK((b.row(i).transpose() - ref).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("equal weights give the midpoint of the images") {
    // p = (1,0,0) is equidistant from anchors at (0,0,0) and (2,0,0);
    // the translations send p to (0,0,0) and (2,0,0).
    const std::vector<LocalTransform<double>> ts{
        translate_at(Vector3d(0, 0, 0), Vector3d(-1, 0, 0)),
        translate_at(Vector3d(2, 0, 0), Vector3d(1, 0, 0)),
    };
    PointCloud p(1, 3);
    p << 1, 0, 0;
    const PointCloud a = blend_pointwise(p, ts, 0.5);
    const PointCloud b = blend_transform_space(p, ts, 0.5);
    CHECK((a.row(0) - Eigen::RowVector3d(1, 0, 0)).norm() <= 1e-15);
    CHECK((b.row(0) - Eigen::RowVector3d(1, 0, 0)).norm() <= 1e-15);
}

TEST_CASE("identity transforms leave the cloud unchanged exactly") {
    Rng gen(12);
    const PointCloud c = random_cloud(200, gen);
    Rng rng(13);
    const auto ts = sample_local_transforms(c, degenerate_config(8), rng);
    CHECK(blend_pointwise(c, ts, 0.5) == c);
    CHECK(blend_transform_space(c, ts, 0.5) == c);
}

TEST_CASE("blend_pointwise matches the literal weighted average") {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const WolfConfig cfg = random_config(rng, 8);
        const PointCloud c = random_cloud(64, rng);
        const auto ts = sample_local_transforms(c, cfg, rng);
        const PointCloud out = blend_pointwise(c, ts, cfg.bandwidth);
        for (Index i = 0; i < c.rows(); ++i) {
            const Vector3d ref = blend_oracle(c.row(i).transpose(), ts, cfg.bandwidth);
            CHECK((out.row(i).transpose() - ref).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("the two blend paths agree") {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const WolfConfig cfg = random_config(rng);
        const PointCloud c = random_cloud(128, rng);
        const auto ts = sample_local_transforms(c, cfg, rng);
        CHECK(max_abs_diff(blend_pointwise(c, ts, cfg.bandwidth),
                           blend_transform_space(c, ts, cfg.bandwidth)) <= 1e-9);
    }
}

TEST_CASE("each output is a convex combination of the local images") {
    Rng rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        const WolfConfig cfg = random_config(rng, 8);
        const PointCloud c = random_cloud(128, rng);
        const auto ts = sample_local_transforms(c, cfg, rng);
        const PointCloud out = blend_pointwise(c, ts, cfg.bandwidth);
        const Eigen::MatrixXd w = weight_matrix(c, ts, cfg.bandwidth);
        for (Index i = 0; i < c.rows(); ++i) {
            const Vector3d p = c.row(i).transpose();
            Vector3d combo = Vector3d::Zero();
            for (std::size_t j = 0; j < ts.size(); ++j)
                combo += w(i, static_cast<Index>(j)) * apply_similarity(ts[j].sim, p);
            CHECK((w.row(i).array() >= 0).all());
            CHECK((out.row(i).transpose() - combo).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("permuting the points permutes the output") {
    Rng rng(17);
    const PointCloud c = random_cloud(100, rng);
    const auto ts = sample_local_transforms(c, WolfConfig{}, rng);
    const PointCloud out = blend_pointwise(c, ts, 0.5);

    std::vector<Index> perm(100);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    PointCloud shuffled(100, 3);
    for (Index i = 0; i < 100; ++i) shuffled.row(i) = c.row(perm[i]);
    const PointCloud out2 = blend_pointwise(shuffled, ts, 0.5);
    for (Index i = 0; i < 100; ++i) CHECK(out2.row(i) == out.row(perm[i]));
}

TEST_CASE("blended_map agrees with the transform-space blend") {
    Rng rng(18);
    const PointCloud c = random_cloud(50, rng);
    const auto ts = sample_local_transforms(c, WolfConfig{}, rng);
    const PointCloud out = blend_transform_space(c, ts, 0.5);
    for (Index i = 0; i < c.rows(); ++i) {
        const Vector3d p = c.row(i).transpose();
        const auto map = blended_map(p, ts, 0.5);
        CHECK((map(p) - out.row(i).transpose()).norm() <= 1e-12);
        const Eigen::Matrix<double, 3, 4> m = map.matrix();
        CHECK((m.leftCols<3>() * p + m.col(3) - map(p)).norm() <= 1e-12);
    }
}

TEST_CASE("to_affine is the 3x4 form of the similarity") {
    Rng rng(19);
    Similarity<double> s;
    s.rotation = rotation_matrix(EulerAngles<double>{0.2, -0.4, 0.9});
    s.scale = Vector3d(1.5, 1.2, 1.8);
    s.translation = Vector3d(0.3, -0.1, 0.2);
    s.center = Vector3d(0.5, 0.5, -0.5);
    const Eigen::Matrix<double, 3, 4> m = to_affine(s).matrix();
    const Matrix3d sr = s.scale.asDiagonal() * s.rotation;
    CHECK((m.leftCols<3>() - sr).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((m.col(3) - (-sr * s.center + s.translation + s.center)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("pointwolf determinism and degenerate identity") {
    Rng gen(20);
    const PointCloud c = random_cloud(300, gen);
    Rng a(42), b(42);
    CHECK(pointwolf::pointwolf(c, WolfConfig{}, a) == pointwolf::pointwolf(c, WolfConfig{}, b));

    for (Index m : {1, 2, 4, 8}) {
        Rng r(m);
        CHECK(pointwolf::pointwolf(c, degenerate_config(m), r) == c);
    }
}

TEST_CASE("pointwolf output radius respects the interval bound") {
    // |p'| <= |p + sum w (SR - I)(p - c) + b| <= 1 + (rho_s + 1) * 2 + sqrt(3) rho_t
    // for points and anchors in the unit ball.
    Rng rng(21);
    for (Index m : {1, 2, 4, 8}) {
        const PointCloud c = normalize_unit_sphere(random_cloud(256, rng));
        WolfConfig cfg;
        cfg.anchors = m;
        const PointCloud out = pointwolf::pointwolf(c, cfg, rng);
        const double bound = 1 + (cfg.scale_max + 1) * 2 + std::sqrt(3.0) * cfg.translation_max;
        CHECK(out.rowwise().norm().maxCoeff() <= bound);
        CHECK(out.rows() == c.rows());
    }
}

TEST_CASE("operation counters") {
    Rng rng(22);
    const PointCloud c = random_cloud(100, rng);
    WolfConfig cfg;
    cfg.anchors = 5;
    const auto ts = sample_local_transforms(c, cfg, rng);
    OpCounter pw, ts_count;
    blend_pointwise(c, ts, 0.5, &pw);
    blend_transform_space(c, ts, 0.5, &ts_count);
    CHECK(pw.kernel_evals == 500);
    CHECK(pw.point_transforms == 500);
    CHECK(pw.point_updates == 100);
    CHECK(ts_count.kernel_evals == 500);
    CHECK(ts_count.affine_blends == 100);
    CHECK(ts_count.point_updates == 100);
}

TEST_CASE("single precision instantiation") {
    Rng rng(23);
    const Cloud<float> c = random_cloud(64, rng).cast<float>();
    const Cloud<float> out = pointwolf::pointwolf(c, WolfConfig{}, rng);
    CHECK(out.rows() == 64);
    CHECK(out.allFinite());
}

}  // TEST_SUITE
