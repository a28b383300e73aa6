#include "pointwolf/corruptions.hpp"

#include <stdexcept>

namespace pointwolf {

namespace {

PointCloud gather(const PointCloud& cloud, const std::vector<Index>& rows) {
    PointCloud out(static_cast<Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = cloud.row(rows[i]);
    return out;
}

PointCloud pad_to(const PointCloud& survivors, Index n) {
    PointCloud out(n, 3);
    out.topRows(survivors.rows()) = survivors;
    for (Index i = survivors.rows(); i < n; ++i) out.row(i) = survivors.row(0);
    return out;
}

}  // namespace

std::string_view to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::LocalDrop: return "local_drop";
        case CorruptionKind::LocalAdd: return "local_add";
        case CorruptionKind::Dropout: return "dropout";
        case CorruptionKind::Noise: return "noise";
    }
    return "?";
}

std::string_view to_string(PadMode pad) {
    return pad == PadMode::Shrink ? "shrink" : "duplicate-first";
}

CorruptionKind parse_corruption_kind(std::string_view name) {
    if (name == "local_drop" || name == "local-drop") return CorruptionKind::LocalDrop;
    if (name == "local_add" || name == "local-add") return CorruptionKind::LocalAdd;
    if (name == "dropout") return CorruptionKind::Dropout;
    if (name == "noise") return CorruptionKind::Noise;
    throw std::invalid_argument("unknown corruption kind '" + std::string(name) + "'");
}

PadMode parse_pad_mode(std::string_view name) {
    if (name == "shrink") return PadMode::Shrink;
    if (name == "duplicate-first" || name == "duplicate_first") return PadMode::DuplicateFirst;
    throw std::invalid_argument("unknown pad mode '" + std::string(name) + "'");
}

void CorruptionSpec::validate() const {
    switch (kind) {
        case CorruptionKind::LocalDrop:
        case CorruptionKind::LocalAdd:
            if (clusters < 0) throw std::invalid_argument("corruption: clusters must be >= 0");
            if (cluster_size < 1) throw std::invalid_argument("corruption: cluster_size must be >= 1");
            break;
        case CorruptionKind::Dropout:
            if (!(rate >= 0.0 && rate < 1.0))
                throw std::invalid_argument("corruption: dropout rate must lie in [0, 1)");
            break;
        case CorruptionKind::Noise:
            if (!(sigma >= 0.0)) throw std::invalid_argument("corruption: sigma must be >= 0");
            break;
    }
}

LocalDropTrace local_drop_traced(const PointCloud& cloud, Index clusters, Index cluster_size,
                                 Rng& rng, PadMode pad) {
    validate_cloud(cloud);
    const Index n = cloud.rows();
    if (clusters < 0 || cluster_size < 1 || clusters * cluster_size >= n)
        throw std::invalid_argument("local_drop: need C >= 0, K >= 1 and C*K < N (C=" +
                                    std::to_string(clusters) + ", K=" +
                                    std::to_string(cluster_size) + ", N=" + std::to_string(n) + ")");

    LocalDropTrace trace;
    std::vector<Index> remaining(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) remaining[i] = i;

    for (Index c = 0; c < clusters; ++c) {
        const PointCloud rest = gather(cloud, remaining);
        const Index center = uniform_index<Index>(rng, rest.rows());
        const auto near = k_nearest(rest, Vector3d(rest.row(center).transpose()), cluster_size);

        std::vector<char> drop(remaining.size(), 0);
        std::vector<Index> removed;
        for (Index j : near) {
            drop[j] = 1;
            removed.push_back(remaining[j]);
        }
        trace.centers.push_back(remaining[center]);
        trace.clusters.push_back(std::move(removed));

        std::vector<Index> next;
        next.reserve(remaining.size() - near.size());
        for (std::size_t j = 0; j < remaining.size(); ++j)
            if (!drop[j]) next.push_back(remaining[j]);
        remaining = std::move(next);
    }

    trace.cloud = gather(cloud, remaining);
    if (pad == PadMode::DuplicateFirst) trace.cloud = pad_to(trace.cloud, n);
    return trace;
}

PointCloud local_drop(const PointCloud& cloud, Index clusters, Index cluster_size, Rng& rng,
                      PadMode pad) {
    return local_drop_traced(cloud, clusters, cluster_size, rng, pad).cloud;
}

PointCloud local_add(const PointCloud& cloud, Index clusters, Index cluster_size, Rng& rng) {
    validate_cloud(cloud);
    const Index n = cloud.rows();
    if (clusters < 0 || cluster_size < 1 || cluster_size > n)
        throw std::invalid_argument("local_add: need C >= 0 and 1 <= K <= N");

    const Eigen::RowVector3d lo = cloud.colwise().minCoeff();
    const Eigen::RowVector3d hi = cloud.colwise().maxCoeff();

    PointCloud out(n + clusters * cluster_size, 3);
    out.topRows(n) = cloud;
    Index row = n;
    for (Index c = 0; c < clusters; ++c) {
        const Index center = uniform_index<Index>(rng, n);
        const auto near = k_nearest(cloud, Vector3d(cloud.row(center).transpose()), cluster_size);
        Eigen::RowVector3d target;
        for (int k = 0; k < 3; ++k) target[k] = uniform(rng, lo[k], hi[k]);
        const Eigen::RowVector3d shift = target - cloud.row(center);
        for (Index j : near) out.row(row++) = cloud.row(j) + shift;
    }
    return out;
}

DropoutTrace point_dropout_traced(const PointCloud& cloud, double rate, Rng& rng, PadMode pad) {
    validate_cloud(cloud);
    if (!(rate >= 0.0 && rate < 1.0))
        throw std::invalid_argument("point_dropout: rate must lie in [0, 1)");
    const Index n = cloud.rows();

    DropoutTrace trace;
    trace.kept.assign(static_cast<std::size_t>(n), 0);
    Index survivors = 0;
    for (Index i = 0; i < n; ++i) {
        trace.kept[i] = bernoulli(rng, rate) ? 0 : 1;
        survivors += trace.kept[i];
    }
    if (survivors == 0) trace.kept[uniform_index<Index>(rng, n)] = 1;

    Index first = 0;
    while (!trace.kept[first]) ++first;

    if (pad == PadMode::DuplicateFirst) {
        trace.cloud = cloud;
        for (Index i = 0; i < n; ++i)
            if (!trace.kept[i]) trace.cloud.row(i) = cloud.row(first);
    } else {
        std::vector<Index> rows;
        for (Index i = 0; i < n; ++i)
            if (trace.kept[i]) rows.push_back(i);
        trace.cloud = gather(cloud, rows);
    }
    return trace;
}

PointCloud point_dropout(const PointCloud& cloud, double rate, Rng& rng, PadMode pad) {
    return point_dropout_traced(cloud, rate, rng, pad).cloud;
}

PointCloud gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng) {
    validate_cloud(cloud);
    if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
    PointCloud out = cloud;
    if (sigma == 0.0) return out;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index k = 0; k < 3; ++k) out(i, k) += sigma * standard_normal(rng);
    return out;
}

PointCloud apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec, Rng& rng) {
    spec.validate();
    switch (spec.kind) {
        case CorruptionKind::LocalDrop:
            return local_drop(cloud, spec.clusters, spec.cluster_size, rng, spec.pad);
        case CorruptionKind::LocalAdd:
            return local_add(cloud, spec.clusters, spec.cluster_size, rng);
        case CorruptionKind::Dropout:
            return point_dropout(cloud, spec.rate, rng, spec.pad);
        case CorruptionKind::Noise:
            return gaussian_noise(cloud, spec.sigma, rng);
    }
    throw std::logic_error("unhandled corruption kind");
}

}  // namespace pointwolf
