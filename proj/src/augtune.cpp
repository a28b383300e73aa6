#include "pointwolf/augtune.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pointwolf {

namespace {

double query(ConfidenceOracle& oracle, const PointCloud& cloud, int label, const char* which) {
    double c;
    try {
        c = oracle.confidence(cloud, label);
    } catch (const std::exception& e) {
        throw OracleError(std::string("oracle failed on ") + which + " cloud (label " +
                          std::to_string(label) + ", N=" + std::to_string(cloud.rows()) +
                          "): " + e.what());
    }
    if (!(c >= 0.0 && c <= 1.0))
        throw OracleError(std::string("oracle returned ") + std::to_string(c) + " for " + which +
                          " cloud (label " + std::to_string(label) + "), expected [0, 1]");
    return c;
}

struct Proposal {
    std::vector<LocalTransform<double>> transforms;
    PointCloud cloud;
    AugTuneState state;
};

Proposal propose(const PointCloud& orig, int label, ConfidenceOracle& oracle,
                 const WolfConfig& cfg, double lambda, Rng& rng) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("difficulty coefficient must lie in (0, 1]");
    validate_cloud(orig);
    Proposal p;
    p.transforms = sample_local_transforms(orig, cfg, rng);
    p.cloud = blend_pointwise(orig, p.transforms, cfg.bandwidth);
    p.state.lambda = lambda;
    p.state.c_orig = query(oracle, orig, label, "original");
    p.state.c_prop = query(oracle, p.cloud, label, "proposal");
    p.state.c_target = target_confidence(p.state.c_orig, p.state.c_prop, lambda);
    p.state.alpha = mixing_ratio(p.state.c_orig, p.state.c_prop, p.state.c_target);
    return p;
}

}  // namespace

double target_confidence(double c_orig, double c_prop, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("difficulty coefficient must lie in (0, 1], got " +
                                    std::to_string(lambda));
    return std::max(c_prop, (1.0 - lambda) * c_orig);
}

double mixing_ratio(double c_orig, double c_prop, double c_target) {
    const double denom = c_orig - c_prop;
    if (std::abs(denom) < 1e-9) return 0.0;
    return std::clamp((c_target - c_prop) / denom, 0.0, 1.0);
}

PointCloud interpolate_clouds(const PointCloud& orig, const PointCloud& prop, double alpha,
                              OpCounter* counter) {
    if (orig.rows() != prop.rows())
        throw std::invalid_argument("interpolate_clouds: size mismatch (" +
                                    std::to_string(orig.rows()) + " vs " +
                                    std::to_string(prop.rows()) + ")");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("interpolate_clouds: alpha must lie in [0, 1]");
    if (counter) counter->point_updates += static_cast<std::size_t>(orig.rows());
    if (alpha == 0.0) return prop;
    if (alpha == 1.0) return orig;
    return alpha * orig + (1.0 - alpha) * prop;
}

std::vector<LocalTransform<double>> interpolate_transform_space(
    const std::vector<LocalTransform<double>>& transforms, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("interpolate_transform_space: alpha must lie in [0, 1]");
    const double keep = 1.0 - alpha;
    std::vector<LocalTransform<double>> out = transforms;
    for (auto& t : out) {
        t.sim.scale = (alpha * Vector3d::Ones() + keep * t.sim.scale).eval();
        t.angles = {keep * t.angles.x, keep * t.angles.y, keep * t.angles.z};
        t.sim.rotation = rotation_matrix(t.angles);
        t.sim.translation *= keep;
    }
    return out;
}

double aggregate_confidence(std::span<const double> pointwise) {
    if (pointwise.empty()) throw std::invalid_argument("aggregate_confidence: empty list");
    double sum = 0.0;
    for (double c : pointwise) sum += c;
    return sum / static_cast<double>(pointwise.size());
}

AugTuneResult augtune_step(const PointCloud& orig, int label, ConfidenceOracle& oracle,
                           const WolfConfig& cfg, double lambda, Rng& rng, OpCounter* counter) {
    auto p = propose(orig, label, oracle, cfg, lambda, rng);
    return {interpolate_clouds(orig, p.cloud, p.state.alpha, counter), p.state};
}

AugTuneResult augtune_step_transform_space(const PointCloud& orig, int label,
                                           ConfidenceOracle& oracle, const WolfConfig& cfg,
                                           double lambda, Rng& rng, OpCounter* counter) {
    auto p = propose(orig, label, oracle, cfg, lambda, rng);
    const auto attenuated = interpolate_transform_space(p.transforms, p.state.alpha);
    return {blend_pointwise(orig, attenuated, cfg.bandwidth, counter), p.state};
}

}  // namespace pointwolf
