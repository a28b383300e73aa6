#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointwolf/errors.hpp"
#include "pointwolf/rng.hpp"

namespace pointwolf {

using Index = Eigen::Index;

/// N x 3 coordinates, one point per row. Row order is the point identity.
template <typename Scalar>
using Cloud = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using PointCloud = Cloud<double>;
using Vector3d = Vec3<double>;
using Matrix3d = Mat3<double>;

/// Throws InvalidInput unless the cloud has at least one point and only finite coordinates.
template <typename Derived>
void validate_cloud(const Eigen::MatrixBase<Derived>& cloud) {
    if (cloud.rows() < 1) throw InvalidInput("point cloud is empty");
    if (cloud.cols() != 3) throw InvalidInput("point cloud must have 3 columns");
    if (!cloud.allFinite()) throw InvalidInput("point cloud contains non-finite coordinates");
}

template <typename Scalar>
struct EulerAngles {
    Scalar x = 0;
    Scalar y = 0;
    Scalar z = 0;
};

/// R = Rz(z) * Ry(y) * Rx(x): extrinsic rotation about X, then Y, then Z.
template <typename Scalar>
Mat3<Scalar> rotation_matrix(const EulerAngles<Scalar>& a) {
    using AA = Eigen::AngleAxis<Scalar>;
    return (AA(a.z, Vec3<Scalar>::UnitZ()) * AA(a.y, Vec3<Scalar>::UnitY()) *
            AA(a.x, Vec3<Scalar>::UnitX()))
        .toRotationMatrix();
}

/// p -> S R (p - center) + translation + center, with S = diag(scale).
template <typename Scalar>
struct Similarity {
    Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
    Vec3<Scalar> scale = Vec3<Scalar>::Ones();
    Vec3<Scalar> translation = Vec3<Scalar>::Zero();
    Vec3<Scalar> center = Vec3<Scalar>::Zero();

    /// S * R
    Mat3<Scalar> linear() const { return scale.asDiagonal() * rotation; }

    bool is_valid(Scalar tol = Scalar(1e-9)) const {
        const Scalar ortho =
            (rotation.transpose() * rotation - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff();
        return ortho <= tol && std::abs(rotation.determinant() - Scalar(1)) <= tol &&
               (scale.array() > Scalar(0)).all();
    }
};

/// Evaluated as p + (S R - I)(p - center) + translation, which equals
/// S R (p - center) + translation + center and is exact for the identity.
template <typename Scalar>
Vec3<Scalar> apply_similarity(const Similarity<Scalar>& t, const Vec3<Scalar>& p) {
    const Mat3<Scalar> deform = t.linear() - Mat3<Scalar>::Identity();
    return p + deform * (p - t.center) + t.translation;
}

namespace detail {

template <typename Derived, typename Scalar>
Scalar squared_distance(const Eigen::MatrixBase<Derived>& cloud, Index i,
                        const Vec3<Scalar>& q) {
    return (cloud.row(i).transpose() - q).squaredNorm();
}

}  // namespace detail

/// Greedy farthest point sampling. The first index is uniform over [0, N);
/// each following index maximizes the squared distance to the selected set,
/// ties going to the lower index.
template <typename Derived>
std::vector<Index> farthest_point_sampling(const Eigen::MatrixBase<Derived>& cloud, Index count,
                                           Rng& rng) {
    using Scalar = typename Derived::Scalar;
    const Index n = cloud.rows();
    if (count < 1 || count > n)
        throw std::invalid_argument("farthest_point_sampling: need 1 <= M <= N (M=" +
                                    std::to_string(count) + ", N=" + std::to_string(n) + ")");

    std::vector<Index> picked;
    picked.reserve(static_cast<std::size_t>(count));
    std::vector<Scalar> min_dist(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());
    std::vector<char> taken(static_cast<std::size_t>(n), 0);

    Index current = uniform_index<Index>(rng, n);
    while (true) {
        picked.push_back(current);
        taken[current] = 1;
        if (static_cast<Index>(picked.size()) == count) break;

        const Vec3<Scalar> c = cloud.row(current).transpose();
        Index best = -1;
        Scalar best_dist = -1;
        for (Index i = 0; i < n; ++i) {
            if (taken[i]) continue;
            min_dist[i] = std::min(min_dist[i], detail::squared_distance(cloud, i, c));
            if (min_dist[i] > best_dist) {
                best_dist = min_dist[i];
                best = i;
            }
        }
        current = best;
    }
    return picked;
}

/// Indices of the `count` points closest to `center`, nearest first, ties by lower index.
template <typename Derived>
std::vector<Index> k_nearest(const Eigen::MatrixBase<Derived>& cloud,
                             const Vec3<typename Derived::Scalar>& center, Index count) {
    using Scalar = typename Derived::Scalar;
    const Index n = cloud.rows();
    if (count < 1 || count > n)
        throw std::invalid_argument("k_nearest: need 1 <= K <= N (K=" + std::to_string(count) +
                                    ", N=" + std::to_string(n) + ")");

    std::vector<Scalar> dist(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) dist[i] = detail::squared_distance(cloud, i, center);

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    auto closer = [&](Index a, Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + count, order.end(), closer);
    order.resize(static_cast<std::size_t>(count));
    return order;
}

template <typename Derived>
Vec3<typename Derived::Scalar> centroid(const Eigen::MatrixBase<Derived>& cloud) {
    return cloud.colwise().mean().transpose();
}

/// Largest distance from the centroid.
template <typename Derived>
typename Derived::Scalar bounding_radius(const Eigen::MatrixBase<Derived>& cloud) {
    const auto c = centroid(cloud);
    return (cloud.rowwise() - c.transpose()).rowwise().norm().maxCoeff();
}

/// Centers on the centroid and scales into the unit sphere. A single-point
/// (zero radius) cloud is only centered.
template <typename Scalar>
Cloud<Scalar> normalize_unit_sphere(const Cloud<Scalar>& cloud) {
    validate_cloud(cloud);
    Cloud<Scalar> out = cloud.rowwise() - centroid(cloud).transpose();
    const Scalar r = out.rowwise().norm().maxCoeff();
    if (r > Scalar(0)) out /= r;
    return out;
}

}  // namespace pointwolf
