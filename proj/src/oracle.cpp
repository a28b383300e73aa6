#include "pointwolf/oracle.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace pointwolf {

double ScriptedOracle::confidence(const PointCloud&, int) {
    if (script_.empty()) throw OracleError("scripted oracle exhausted");
    const double c = script_.front();
    script_.pop_front();
    return c;
}

Descriptor shape_descriptor(const PointCloud& cloud) {
    validate_cloud(cloud);
    Descriptor d = Descriptor::Zero();
    d.head<3>() = (cloud.colwise().maxCoeff() - cloud.colwise().minCoeff()).transpose();

    const Eigen::VectorXd radii = (cloud.rowwise() - centroid(cloud).transpose()).rowwise().norm();
    const double inv_n = 1.0 / static_cast<double>(cloud.rows());
    for (Index i = 0; i < radii.size(); ++i) {
        int bin = static_cast<int>(radii[i] / kRadialRange * kRadialBins);
        if (bin >= kRadialBins) bin = kRadialBins - 1;
        d[3 + bin] += inv_n;
    }
    d[kDescriptorSize - 1] = radii.mean();
    return d;
}

ReferenceOracle ReferenceOracle::train(const std::vector<std::pair<PointCloud, int>>& samples,
                                       std::vector<std::string> class_names) {
    const auto k = class_names.size();
    if (k == 0) throw std::invalid_argument("ReferenceOracle::train: no classes");
    std::vector<Descriptor> sums(k, Descriptor::Zero());
    std::vector<std::size_t> counts(k, 0);
    for (const auto& [cloud, label] : samples) {
        if (label < 0 || static_cast<std::size_t>(label) >= k)
            throw std::invalid_argument("ReferenceOracle::train: label out of range");
        sums[label] += shape_descriptor(cloud);
        ++counts[label];
    }
    ReferenceOracle o;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0)
            throw std::invalid_argument("ReferenceOracle::train: class '" + class_names[c] +
                                        "' has no samples");
        o.centroids_.push_back(sums[c] / static_cast<double>(counts[c]));
    }
    o.class_names_ = std::move(class_names);
    return o;
}

Eigen::VectorXd ReferenceOracle::probabilities(const PointCloud& cloud) const {
    if (centroids_.empty()) throw OracleError("reference oracle is untrained");
    const Descriptor d = shape_descriptor(cloud);
    Eigen::VectorXd logits(static_cast<Index>(centroids_.size()));
    for (std::size_t c = 0; c < centroids_.size(); ++c)
        logits[static_cast<Index>(c)] = -(d - centroids_[c]).norm();
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
}

int ReferenceOracle::predict(const PointCloud& cloud) const {
    Index best;
    probabilities(cloud).maxCoeff(&best);
    return static_cast<int>(best);
}

double ReferenceOracle::confidence(const PointCloud& cloud, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= centroids_.size())
        throw OracleError("label " + std::to_string(label) + " is not a known class");
    return probabilities(cloud)[label];
}

int ReferenceOracle::label_of(const std::string& name) const {
    for (std::size_t i = 0; i < class_names_.size(); ++i)
        if (class_names_[i] == name) return static_cast<int>(i);
    return -1;
}

void ReferenceOracle::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["kind"] = "nearest-centroid";
    j["descriptor_size"] = kDescriptorSize;
    j["classes"] = nlohmann::json::array();
    for (std::size_t c = 0; c < centroids_.size(); ++c) {
        std::vector<double> v(centroids_[c].data(), centroids_[c].data() + kDescriptorSize);
        j["classes"].push_back({{"name", class_names_[c]}, {"centroid", v}});
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write oracle model: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

ReferenceOracle ReferenceOracle::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open oracle model: " + path.string());
    ReferenceOracle o;
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("kind") != "nearest-centroid" || j.at("descriptor_size") != kDescriptorSize)
            throw InvalidInput("unsupported oracle model: " + path.string());
        for (const auto& c : j.at("classes")) {
            const auto v = c.at("centroid").get<std::vector<double>>();
            if (v.size() != static_cast<std::size_t>(kDescriptorSize))
                throw InvalidInput("bad centroid length in " + path.string());
            o.class_names_.push_back(c.at("name").get<std::string>());
            o.centroids_.push_back(Eigen::Map<const Descriptor>(v.data()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("malformed oracle model " + path.string() + ": " + e.what());
    }
    if (o.centroids_.empty()) throw InvalidInput("oracle model has no classes: " + path.string());
    return o;
}

}  // namespace pointwolf
