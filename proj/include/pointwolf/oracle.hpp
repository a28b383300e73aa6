#pragma once

#include <Eigen/Core>

#include <deque>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pointwolf/core.hpp"

namespace pointwolf {

/// Probability mass a classifier assigns to the true class of a cloud.
///
/// Implementations return a value in [0, 1] and are deterministic for fixed
/// input between mutations of their own state. `concurrent_safe()` reports
/// whether `confidence` may be called from several threads at once.
class ConfidenceOracle {
public:
    virtual ~ConfidenceOracle() = default;
    virtual double confidence(const PointCloud& cloud, int label) = 0;
    virtual bool concurrent_safe() const { return false; }
};

/// Replays a fixed list of confidences, one per call. Throws OracleError when exhausted.
class ScriptedOracle final : public ConfidenceOracle {
public:
    explicit ScriptedOracle(std::vector<double> script) : script_(script.begin(), script.end()) {}

    double confidence(const PointCloud&, int) override;
    std::size_t remaining() const { return script_.size(); }

private:
    std::deque<double> script_;
};

/// Adapter over any callable (cloud, label) -> confidence.
class FunctionOracle final : public ConfidenceOracle {
public:
    using Fn = std::function<double(const PointCloud&, int)>;
    explicit FunctionOracle(Fn fn, bool concurrent_safe = false)
        : fn_(std::move(fn)), concurrent_safe_(concurrent_safe) {}

    double confidence(const PointCloud& cloud, int label) override { return fn_(cloud, label); }
    bool concurrent_safe() const override { return concurrent_safe_; }

private:
    Fn fn_;
    bool concurrent_safe_;
};

constexpr int kDescriptorSize = 16;
constexpr int kRadialBins = 12;
constexpr double kRadialRange = 1.5;
using Descriptor = Eigen::Matrix<double, kDescriptorSize, 1>;

/// [extent x, y, z | radial histogram (12 bins over [0, 1.5), last bin open) | mean radius].
/// Radii are measured from the centroid; histogram entries are fractions of N.
Descriptor shape_descriptor(const PointCloud& cloud);

/// Nearest-centroid classifier over shape_descriptor with
/// p(k) = softmax(-|d - mu_k|) at temperature 1. Read-only after training.
class ReferenceOracle final : public ConfidenceOracle {
public:
    ReferenceOracle() = default;

    /// One centroid per label in [0, class_names.size()). Every class needs a sample.
    static ReferenceOracle train(const std::vector<std::pair<PointCloud, int>>& samples,
                                 std::vector<std::string> class_names);

    Eigen::VectorXd probabilities(const PointCloud& cloud) const;
    int predict(const PointCloud& cloud) const;
    double confidence(const PointCloud& cloud, int label) override;
    bool concurrent_safe() const override { return true; }

    const std::vector<std::string>& class_names() const { return class_names_; }
    /// Index of `name`, or -1.
    int label_of(const std::string& name) const;
    const std::vector<Descriptor>& centroids() const { return centroids_; }

    void save(const std::filesystem::path& path) const;
    static ReferenceOracle load(const std::filesystem::path& path);

private:
    std::vector<std::string> class_names_;
    std::vector<Descriptor> centroids_;
};

}  // namespace pointwolf
