#pragma once

#include <numbers>

#include "pointwolf/core.hpp"
#include "pointwolf/wolf.hpp"

namespace pointwolf {

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Conventional augmentation: one global similarity s R p + t, then clipped
/// Gaussian jitter per coordinate. Defaults follow common PointNet++ practice.
struct CdaConfig {
    double scale_lo = 0.8;
    double scale_hi = 1.25;
    bool rotate = true;
    double rotation_lo = 0.0;                     // radians, about the up axis
    double rotation_hi = 2.0 * std::numbers::pi;
    double translation = 0.1;                     // t ~ U[-translation, translation]^3
    double jitter_sigma = 0.01;
    double jitter_clip = 0.05;
    Axis up_axis = Axis::Y;

    void validate() const;
};

/// Draws the global similarity (scale, up-axis angle if enabled, translation
/// x,y,z) as a single local transform anchored at the origin.
LocalTransform<double> sample_cda_transform(const CdaConfig& cfg, Rng& rng);

/// Clipped Gaussian offsets, N x 3, drawn row by row.
PointCloud sample_jitter(Index count, double sigma, double clip, Rng& rng);

PointCloud cda_augment(const PointCloud& cloud, const CdaConfig& cfg, Rng& rng);

}  // namespace pointwolf
