#include "pointwolf/cda.hpp"

#include <algorithm>
#include <stdexcept>

namespace pointwolf {

void CdaConfig::validate() const {
    if (!(scale_lo > 0)) throw std::invalid_argument("CdaConfig: scale_lo must be > 0");
    if (!(scale_lo <= scale_hi)) throw std::invalid_argument("CdaConfig: scale_lo must be <= scale_hi");
    if (rotate && !(rotation_lo <= rotation_hi))
        throw std::invalid_argument("CdaConfig: rotation_lo must be <= rotation_hi");
    if (!(translation >= 0)) throw std::invalid_argument("CdaConfig: translation must be >= 0");
    if (!(jitter_sigma >= 0)) throw std::invalid_argument("CdaConfig: jitter_sigma must be >= 0");
    if (!(jitter_clip >= 0)) throw std::invalid_argument("CdaConfig: jitter_clip must be >= 0");
}

LocalTransform<double> sample_cda_transform(const CdaConfig& cfg, Rng& rng) {
    cfg.validate();
    LocalTransform<double> t = LocalTransform<double>::identity_at(Vector3d::Zero());
    t.sim.scale.setConstant(uniform(rng, cfg.scale_lo, cfg.scale_hi));
    if (cfg.rotate) {
        const double angle = uniform(rng, cfg.rotation_lo, cfg.rotation_hi);
        switch (cfg.up_axis) {
            case Axis::X: t.angles.x = angle; break;
            case Axis::Y: t.angles.y = angle; break;
            case Axis::Z: t.angles.z = angle; break;
        }
    }
    for (int k = 0; k < 3; ++k) t.sim.translation[k] = uniform(rng, -cfg.translation, cfg.translation);
    t.sim.rotation = rotation_matrix(t.angles);
    return t;
}

PointCloud sample_jitter(Index count, double sigma, double clip, Rng& rng) {
    PointCloud j(count, 3);
    for (Index i = 0; i < count; ++i)
        for (Index k = 0; k < 3; ++k) j(i, k) = std::clamp(sigma * standard_normal(rng), -clip, clip);
    return j;
}

PointCloud cda_augment(const PointCloud& cloud, const CdaConfig& cfg, Rng& rng) {
    validate_cloud(cloud);
    const auto t = sample_cda_transform(cfg, rng);
    PointCloud out(cloud.rows(), 3);
    for (Index i = 0; i < cloud.rows(); ++i)
        out.row(i) = apply_similarity<double>(t.sim, cloud.row(i).transpose()).transpose();
    if (cfg.jitter_sigma > 0) out += sample_jitter(cloud.rows(), cfg.jitter_sigma, cfg.jitter_clip, rng);
    return out;
}

}  // namespace pointwolf
