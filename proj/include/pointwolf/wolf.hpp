#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pointwolf/core.hpp"

namespace pointwolf {

/// Sampling ranges and kernel settings for weighted local transformations.
/// Range defaults are the (15 deg, 2, 1) baseline search space.
struct WolfConfig {
    Index anchors = 4;
    double bandwidth = 0.5;
    double scale_max = 2.0;                            // s ~ U[1, scale_max]
    double rotation_max = 15.0 * std::numbers::pi / 180.0;  // theta ~ U[-r, r], radians
    double translation_max = 1.0;                      // b ~ U[-t, t]
    double mask_keep = 0.5;                            // pi ~ Bernoulli(mask_keep)

    void validate() const {
        if (anchors < 1) throw std::invalid_argument("WolfConfig: anchors must be >= 1");
        if (!(bandwidth > 0)) throw std::invalid_argument("WolfConfig: bandwidth must be > 0");
        if (!(scale_max >= 1)) throw std::invalid_argument("WolfConfig: scale_max must be >= 1");
        if (!(rotation_max >= 0)) throw std::invalid_argument("WolfConfig: rotation_max must be >= 0");
        if (!(translation_max >= 0))
            throw std::invalid_argument("WolfConfig: translation_max must be >= 0");
        if (!(mask_keep > 0 && mask_keep < 1))
            throw std::invalid_argument("WolfConfig: mask_keep must lie in (0, 1)");
    }

    /// Range multiple k * (rho_r, rho_s, rho_t) used for search-space sweeps.
    WolfConfig scaled_ranges(double k) const {
        WolfConfig c = *this;
        c.rotation_max *= k;
        c.scale_max *= k;
        c.translation_max *= k;
        return c;
    }
};

/// A similarity centered at an anchor, plus the axis mask used by its kernel.
/// The Euler angles are kept so the transform can be attenuated in parameter space.
template <typename Scalar>
struct LocalTransform {
    Vec3<Scalar> anchor = Vec3<Scalar>::Zero();
    EulerAngles<Scalar> angles;
    Similarity<Scalar> sim;
    Vec3<Scalar> mask = Vec3<Scalar>::Ones();

    static LocalTransform identity_at(const Vec3<Scalar>& anchor) {
        LocalTransform t;
        t.anchor = anchor;
        t.sim.center = anchor;
        return t;
    }
};

/// p -> p + deformation * p + offset. Storing the displacement rather than the
/// full linear part keeps identity transforms bit-exact.
template <typename Scalar>
struct AffineMap {
    Mat3<Scalar> deformation = Mat3<Scalar>::Zero();
    Vec3<Scalar> offset = Vec3<Scalar>::Zero();

    Vec3<Scalar> operator()(const Vec3<Scalar>& p) const { return p + deformation * p + offset; }

    /// 3 x 4 homogeneous form [A | t].
    Eigen::Matrix<Scalar, 3, 4> matrix() const {
        Eigen::Matrix<Scalar, 3, 4> m;
        m.template leftCols<3>() = Mat3<Scalar>::Identity() + deformation;
        m.col(3) = offset;
        return m;
    }
};

template <typename Scalar>
AffineMap<Scalar> to_affine(const Similarity<Scalar>& s) {
    AffineMap<Scalar> a;
    a.deformation = s.linear() - Mat3<Scalar>::Identity();
    a.offset = s.translation - a.deformation * s.center;
    return a;
}

/// Tallies of the per-point work done by the blend and interpolation routines.
struct OpCounter {
    std::size_t kernel_evals = 0;      // K_h(p, anchor) evaluations
    std::size_t point_transforms = 0;  // local transform applied to one point
    std::size_t affine_blends = 0;     // kernel-weighted average of M affine maps
    std::size_t point_updates = 0;     // final per-point write
};

/// Anchors by FPS, then per anchor in this draw order: scale x,y,z; angles x,y,z;
/// translation x,y,z; mask x,y,z (all three redrawn while the mask is (0,0,0)).
template <typename Derived>
std::vector<LocalTransform<typename Derived::Scalar>> sample_local_transforms(
    const Eigen::MatrixBase<Derived>& cloud, const WolfConfig& cfg, Rng& rng) {
    using Scalar = typename Derived::Scalar;
    cfg.validate();
    const auto anchors = farthest_point_sampling(cloud, cfg.anchors, rng);

    std::vector<LocalTransform<Scalar>> out;
    out.reserve(anchors.size());
    for (Index a : anchors) {
        LocalTransform<Scalar> t;
        t.anchor = cloud.row(a).transpose();
        for (int k = 0; k < 3; ++k) t.sim.scale[k] = Scalar(uniform(rng, 1.0, cfg.scale_max));
        t.angles.x = Scalar(uniform(rng, -cfg.rotation_max, cfg.rotation_max));
        t.angles.y = Scalar(uniform(rng, -cfg.rotation_max, cfg.rotation_max));
        t.angles.z = Scalar(uniform(rng, -cfg.rotation_max, cfg.rotation_max));
        for (int k = 0; k < 3; ++k)
            t.sim.translation[k] = Scalar(uniform(rng, -cfg.translation_max, cfg.translation_max));
        do {
            for (int k = 0; k < 3; ++k) t.mask[k] = bernoulli(rng, cfg.mask_keep) ? Scalar(1) : Scalar(0);
        } while (t.mask.isZero());
        t.sim.rotation = rotation_matrix(t.angles);
        t.sim.center = t.anchor;
        out.push_back(t);
    }
    return out;
}

namespace detail {

template <typename Scalar>
Scalar projected_sq_distance(const Vec3<Scalar>& p, const LocalTransform<Scalar>& t) {
    return t.mask.cwiseProduct(p - t.anchor).squaredNorm();
}

/// Normalized kernel weights of one point against all anchors. Computed as a
/// softmax of the log-kernels so that far-away points never divide by zero.
template <typename Scalar>
void normalized_weights(const Vec3<Scalar>& p, const std::vector<LocalTransform<Scalar>>& ts,
                        Scalar bandwidth, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w) {
    const Index m = static_cast<Index>(ts.size());
    w.resize(m);
    const Scalar inv = Scalar(1) / (Scalar(2) * bandwidth * bandwidth);
    for (Index j = 0; j < m; ++j) w[j] = -projected_sq_distance(p, ts[j]) * inv;
    w = (w.array() - w.maxCoeff()).exp();
    w /= w.sum();
}

template <typename Scalar>
void check_transforms(const std::vector<LocalTransform<Scalar>>& ts, Scalar bandwidth) {
    if (ts.empty()) throw std::invalid_argument("blend: transform list is empty");
    if (!(bandwidth > 0)) throw std::invalid_argument("blend: bandwidth must be > 0");
}

}  // namespace detail

/// exp(-|Pi (p - anchor)|^2 / (2 h^2))
template <typename Scalar>
Scalar kernel_weight(const Vec3<Scalar>& p, const LocalTransform<Scalar>& t, Scalar bandwidth) {
    if (!(bandwidth > 0)) throw std::invalid_argument("kernel_weight: bandwidth must be > 0");
    return std::exp(-detail::projected_sq_distance(p, t) / (Scalar(2) * bandwidth * bandwidth));
}

/// N x M matrix of row-normalized kernel weights.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> weight_matrix(
    const Eigen::MatrixBase<Derived>& cloud,
    const std::vector<LocalTransform<typename Derived::Scalar>>& ts,
    typename Derived::Scalar bandwidth) {
    using Scalar = typename Derived::Scalar;
    detail::check_transforms(ts, bandwidth);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(cloud.rows(),
                                                               static_cast<Index>(ts.size()));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w;
    for (Index i = 0; i < cloud.rows(); ++i) {
        detail::normalized_weights<Scalar>(cloud.row(i).transpose(), ts, bandwidth, w);
        out.row(i) = w.transpose();
    }
    return out;
}

/// Transforms every point by each local similarity and takes the
/// kernel-weighted convex combination of the M images.
template <typename Derived>
Cloud<typename Derived::Scalar> blend_pointwise(
    const Eigen::MatrixBase<Derived>& cloud,
    const std::vector<LocalTransform<typename Derived::Scalar>>& ts,
    typename Derived::Scalar bandwidth, OpCounter* counter = nullptr) {
    using Scalar = typename Derived::Scalar;
    detail::check_transforms(ts, bandwidth);
    const Index n = cloud.rows();
    const Index m = static_cast<Index>(ts.size());

    std::vector<Mat3<Scalar>> deform(ts.size());
    for (Index j = 0; j < m; ++j) deform[j] = ts[j].sim.linear() - Mat3<Scalar>::Identity();

    Cloud<Scalar> out(n, 3);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w;
    for (Index i = 0; i < n; ++i) {
        const Vec3<Scalar> p = cloud.row(i).transpose();
        detail::normalized_weights(p, ts, bandwidth, w);
        Vec3<Scalar> shift = Vec3<Scalar>::Zero();
        for (Index j = 0; j < m; ++j) {
            // p_j - p for p_j = S R (p - c) + b + c
            shift += w[j] * (deform[j] * (p - ts[j].anchor) + ts[j].sim.translation);
        }
        out.row(i) = (p + shift).transpose();
    }
    if (counter) {
        counter->kernel_evals += static_cast<std::size_t>(n * m);
        counter->point_transforms += static_cast<std::size_t>(n * m);
        counter->point_updates += static_cast<std::size_t>(n);
    }
    return out;
}

/// The smoothly varying transformation evaluated at p: the kernel-weighted
/// average of the local affine maps.
template <typename Scalar>
AffineMap<Scalar> blended_map(const Vec3<Scalar>& p, const std::vector<LocalTransform<Scalar>>& ts,
                              Scalar bandwidth) {
    detail::check_transforms(ts, bandwidth);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w;
    detail::normalized_weights(p, ts, bandwidth, w);
    AffineMap<Scalar> out;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        const AffineMap<Scalar> a = to_affine(ts[j].sim);
        out.deformation += w[static_cast<Index>(j)] * a.deformation;
        out.offset += w[static_cast<Index>(j)] * a.offset;
    }
    return out;
}

/// Averages the local affine maps per point, then applies the averaged map once.
template <typename Derived>
Cloud<typename Derived::Scalar> blend_transform_space(
    const Eigen::MatrixBase<Derived>& cloud,
    const std::vector<LocalTransform<typename Derived::Scalar>>& ts,
    typename Derived::Scalar bandwidth, OpCounter* counter = nullptr) {
    using Scalar = typename Derived::Scalar;
    detail::check_transforms(ts, bandwidth);
    const Index n = cloud.rows();
    const Index m = static_cast<Index>(ts.size());

    std::vector<AffineMap<Scalar>> local(ts.size());
    for (Index j = 0; j < m; ++j) local[j] = to_affine(ts[j].sim);

    Cloud<Scalar> out(n, 3);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w;
    for (Index i = 0; i < n; ++i) {
        const Vec3<Scalar> p = cloud.row(i).transpose();
        detail::normalized_weights(p, ts, bandwidth, w);
        AffineMap<Scalar> blended;
        for (Index j = 0; j < m; ++j) {
            blended.deformation += w[j] * local[j].deformation;
            blended.offset += w[j] * local[j].offset;
        }
        out.row(i) = blended(p).transpose();
    }
    if (counter) {
        counter->kernel_evals += static_cast<std::size_t>(n * m);
        counter->affine_blends += static_cast<std::size_t>(n);
        counter->point_updates += static_cast<std::size_t>(n);
    }
    return out;
}

/// Weighted local transformation augmentation: sample transforms, blend pointwise.
template <typename Derived>
Cloud<typename Derived::Scalar> pointwolf(const Eigen::MatrixBase<Derived>& cloud,
                                          const WolfConfig& cfg, Rng& rng) {
    validate_cloud(cloud);
    const auto ts = sample_local_transforms(cloud, cfg, rng);
    return blend_pointwise(cloud, ts, static_cast<typename Derived::Scalar>(cfg.bandwidth));
}

}  // namespace pointwolf
