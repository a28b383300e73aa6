#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pointwolf/core.hpp"

namespace pointwolf {

/// How corruptions that remove points report their output size.
enum class PadMode {
    Shrink,          // return the survivors only
    DuplicateFirst,  // keep N by filling with copies of the first survivor
};

enum class CorruptionKind { LocalDrop, LocalAdd, Dropout, Noise };

std::string_view to_string(CorruptionKind kind);
std::string_view to_string(PadMode pad);
CorruptionKind parse_corruption_kind(std::string_view name);
PadMode parse_pad_mode(std::string_view name);

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::Noise;
    Index clusters = 0;       // C
    Index cluster_size = 50;  // K
    double rate = 0.0;        // r in [0, 1)
    double sigma = 0.0;
    PadMode pad = PadMode::DuplicateFirst;

    void validate() const;
};

/// Output of local_drop with the removal history, for replay checks.
struct LocalDropTrace {
    PointCloud cloud;
    std::vector<Index> centers;                // original index of each cluster center
    std::vector<std::vector<Index>> clusters;  // original indices removed per cluster
};

/// Removes C clusters: each center is uniform over the remaining points and
/// the cluster is its K nearest remaining points (center included).
/// Requires C * K < N.
LocalDropTrace local_drop_traced(const PointCloud& cloud, Index clusters, Index cluster_size,
                                 Rng& rng, PadMode pad = PadMode::DuplicateFirst);
PointCloud local_drop(const PointCloud& cloud, Index clusters, Index cluster_size, Rng& rng,
                      PadMode pad = PadMode::DuplicateFirst);

/// Appends C clusters. Each is the K nearest original points around a uniform
/// center, rigidly moved so the center lands on a uniform point of the
/// original bounding box.
PointCloud local_add(const PointCloud& cloud, Index clusters, Index cluster_size, Rng& rng);

struct DropoutTrace {
    PointCloud cloud;
    std::vector<char> kept;  // per original point
};

/// Drops each point independently with probability `rate`. If every point
/// drops, one uniformly chosen point is kept.
DropoutTrace point_dropout_traced(const PointCloud& cloud, double rate, Rng& rng,
                                  PadMode pad = PadMode::DuplicateFirst);
PointCloud point_dropout(const PointCloud& cloud, double rate, Rng& rng,
                         PadMode pad = PadMode::DuplicateFirst);

/// Adds unclipped N(0, sigma^2) offsets to every coordinate.
PointCloud gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng);

PointCloud apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec, Rng& rng);

}  // namespace pointwolf
