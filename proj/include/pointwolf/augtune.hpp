#pragma once

#include <span>
#include <vector>

#include "pointwolf/core.hpp"
#include "pointwolf/oracle.hpp"
#include "pointwolf/wolf.hpp"

namespace pointwolf {

/// Everything one AugTune step decided, for logging.
struct AugTuneState {
    double lambda = 1.0;
    double c_orig = 0.0;
    double c_prop = 0.0;
    double c_target = 0.0;
    double alpha = 0.0;
};

struct AugTuneResult {
    PointCloud cloud;
    AugTuneState state;
};

/// max(c_prop, (1 - lambda) c_orig). Throws std::invalid_argument unless 0 < lambda <= 1.
double target_confidence(double c_orig, double c_prop, double lambda);

/// Solves alpha c_orig + (1 - alpha) c_prop = c_target, clamped to [0, 1].
/// Returns 0 when |c_orig - c_prop| < 1e-9.
double mixing_ratio(double c_orig, double c_prop, double c_target);

/// alpha * orig + (1 - alpha) * prop, row by row.
PointCloud interpolate_clouds(const PointCloud& orig, const PointCloud& prop, double alpha,
                              OpCounter* counter = nullptr);

/// Attenuates each transform toward the identity:
/// S' = alpha I + (1 - alpha) S, theta' = (1 - alpha) theta, b' = (1 - alpha) b.
std::vector<LocalTransform<double>> interpolate_transform_space(
    const std::vector<LocalTransform<double>>& transforms, double alpha);

/// Mean of per-point confidences (object-level confidence for segmentation).
double aggregate_confidence(std::span<const double> pointwise);

/// One AugTune step with interpolation in input space. Only the
/// post-proposal interpolation is charged to `counter`.
AugTuneResult augtune_step(const PointCloud& orig, int label, ConfidenceOracle& oracle,
                           const WolfConfig& cfg, double lambda, Rng& rng,
                           OpCounter* counter = nullptr);

/// Same draws and confidences as augtune_step, but the mixing ratio
/// attenuates the local transforms and the blend is recomputed.
AugTuneResult augtune_step_transform_space(const PointCloud& orig, int label,
                                           ConfidenceOracle& oracle, const WolfConfig& cfg,
                                           double lambda, Rng& rng, OpCounter* counter = nullptr);

}  // namespace pointwolf
