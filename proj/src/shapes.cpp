#include "pointwolf/shapes.hpp"

#include <numbers>
#include <stdexcept>

namespace pointwolf {

std::string shape_name(ShapeClass s) {
    switch (s) {
        case ShapeClass::Sphere: return "sphere";
        case ShapeClass::Box: return "box";
        case ShapeClass::Cylinder: return "cylinder";
    }
    return "?";
}

PointCloud sample_sphere(Index n, Rng& rng) {
    const Vector3d radii(uniform(rng, 0.9, 1.1), uniform(rng, 0.9, 1.1), uniform(rng, 0.9, 1.1));
    PointCloud out(n, 3);
    for (Index i = 0; i < n; ++i) {
        Vector3d d(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        while (d.squaredNorm() < 1e-12) d = Vector3d(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        out.row(i) = d.normalized().cwiseProduct(radii).transpose();
    }
    return out;
}

PointCloud sample_box(Index n, Rng& rng) {
    const Vector3d half = 0.5 * Vector3d(uniform(rng, 0.8, 1.6), uniform(rng, 0.8, 1.6),
                                         uniform(rng, 0.8, 1.6));
    // face pair k is normal to axis k
    const Vector3d area(half.y() * half.z(), half.x() * half.z(), half.x() * half.y());
    const double total = area.sum();
    PointCloud out(n, 3);
    for (Index i = 0; i < n; ++i) {
        const double pick = canonical(rng) * total;
        const int axis = pick < area[0] ? 0 : (pick < area[0] + area[1] ? 1 : 2);
        Vector3d p;
        for (int k = 0; k < 3; ++k) p[k] = uniform(rng, -half[k], half[k]);
        p[axis] = bernoulli(rng, 0.5) ? half[axis] : -half[axis];
        out.row(i) = p.transpose();
    }
    return out;
}

PointCloud sample_cylinder(Index n, Rng& rng) {
    constexpr double pi = std::numbers::pi;
    const double r = uniform(rng, 0.35, 0.5);
    const double h = uniform(rng, 1.4, 2.0);
    const double side = 2.0 * pi * r * h;
    const double caps = 2.0 * pi * r * r;
    PointCloud out(n, 3);
    for (Index i = 0; i < n; ++i) {
        const double theta = uniform(rng, 0.0, 2.0 * pi);
        if (canonical(rng) * (side + caps) < side) {
            out.row(i) << r * std::cos(theta), uniform(rng, -0.5 * h, 0.5 * h), r * std::sin(theta);
        } else {
            const double rho = r * std::sqrt(canonical(rng));
            const double y = bernoulli(rng, 0.5) ? 0.5 * h : -0.5 * h;
            out.row(i) << rho * std::cos(theta), y, rho * std::sin(theta);
        }
    }
    return out;
}

PointCloud sample_shape(ShapeClass s, Index n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_shape: n must be >= 1");
    switch (s) {
        case ShapeClass::Sphere: return sample_sphere(n, rng);
        case ShapeClass::Box: return sample_box(n, rng);
        case ShapeClass::Cylinder: return sample_cylinder(n, rng);
    }
    throw std::logic_error("unhandled shape class");
}

}  // namespace pointwolf
