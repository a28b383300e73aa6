#pragma once

#include <array>
#include <string>

#include "pointwolf/core.hpp"

namespace pointwolf {

/// Synthetic surface samplers with randomized proportions, for fixtures and the demo.
enum class ShapeClass { Sphere = 0, Box = 1, Cylinder = 2 };

inline constexpr std::array<ShapeClass, 3> kShapeClasses = {ShapeClass::Sphere, ShapeClass::Box,
                                                           ShapeClass::Cylinder};

std::string shape_name(ShapeClass s);

/// Ellipsoid with radii in [0.9, 1.1].
PointCloud sample_sphere(Index n, Rng& rng);
/// Box surface with side lengths in [0.8, 1.6], area-weighted faces.
PointCloud sample_box(Index n, Rng& rng);
/// Closed cylinder, radius in [0.35, 0.5], height in [1.4, 2.0], axis along y.
PointCloud sample_cylinder(Index n, Rng& rng);

PointCloud sample_shape(ShapeClass s, Index n, Rng& rng);

}  // namespace pointwolf
