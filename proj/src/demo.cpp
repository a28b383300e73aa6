#include "pointwolf/demo.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "pointwolf/shapes.hpp"

namespace pointwolf {

namespace {

using Labeled = std::vector<std::pair<PointCloud, int>>;

// Seed streams: 0 train shapes, 1 test shapes, 2 augmentation, 3 corruptions.
Labeled make_split(const DemoConfig& cfg, std::uint64_t stream, int per_class) {
    Labeled out;
    for (int s = 0; s < per_class; ++s) {
        for (std::size_t c = 0; c < kShapeClasses.size(); ++c) {
            Rng rng(derive_seed(cfg.seed, {stream, c, static_cast<std::uint64_t>(s)}));
            out.emplace_back(normalize_unit_sphere(sample_shape(kShapeClasses[c], cfg.points, rng)),
                             static_cast<int>(c));
        }
    }
    return out;
}

double accuracy(const ReferenceOracle& model, const Labeled& set) {
    std::size_t hits = 0;
    for (const auto& [cloud, label] : set) hits += model.predict(cloud) == label;
    return static_cast<double>(hits) / static_cast<double>(set.size());
}

double mean_of(const std::vector<DemoRow>& rows, bool wolf) {
    double s = 0;
    for (const auto& r : rows) s += wolf ? r.acc_wolf_trained : r.acc_clean_trained;
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

}  // namespace

double DemoResult::mean_clean_trained() const { return mean_of(rows, false); }
double DemoResult::mean_wolf_trained() const { return mean_of(rows, true); }

DemoResult demo_robustness(const DemoConfig& cfg) {
    cfg.wolf.validate();
    std::vector<std::string> names;
    for (auto s : kShapeClasses) names.push_back(shape_name(s));

    const Labeled train = make_split(cfg, 0, cfg.train_per_class);
    const Labeled test = make_split(cfg, 1, cfg.test_per_class);

    DemoResult res;
    res.clean_model = ReferenceOracle::train(train, names);

    Labeled augmented = train;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& [cloud, label] = train[i];
        for (int k = 0; k < cfg.augmented_copies; ++k) {
            Rng rng(derive_seed(cfg.seed, {2, i, static_cast<std::uint64_t>(k)}));
            PointCloud aug = cfg.augtune
                                 ? augtune_step(cloud, label, res.clean_model, cfg.wolf, cfg.lambda, rng).cloud
                                 : pointwolf(cloud, cfg.wolf, rng);
            augmented.emplace_back(normalize_unit_sphere(aug), label);
        }
    }
    res.wolf_model = ReferenceOracle::train(augmented, names);
    res.clean_test_acc_clean_trained = accuracy(res.clean_model, test);
    res.clean_test_acc_wolf_trained = accuracy(res.wolf_model, test);

    std::vector<CorruptionSpec> grid;
    for (Index c : cfg.cluster_counts) {
        grid.push_back({CorruptionKind::LocalDrop, c, cfg.cluster_size, 0, 0, PadMode::DuplicateFirst});
    }
    for (Index c : cfg.cluster_counts) {
        grid.push_back({CorruptionKind::LocalAdd, c, cfg.cluster_size, 0, 0, PadMode::DuplicateFirst});
    }
    for (double r : cfg.dropout_rates) {
        grid.push_back({CorruptionKind::Dropout, 0, 1, r, 0, PadMode::DuplicateFirst});
    }
    for (double s : cfg.noise_sigmas) {
        grid.push_back({CorruptionKind::Noise, 0, 1, 0, s, PadMode::DuplicateFirst});
    }

    for (std::size_t g = 0; g < grid.size(); ++g) {
        Labeled corrupted;
        for (std::size_t i = 0; i < test.size(); ++i) {
            Rng rng(derive_seed(cfg.seed, {3, g, i}));
            corrupted.emplace_back(apply_corruption(test[i].first, grid[g], rng), test[i].second);
        }
        const auto& spec = grid[g];
        double level = spec.kind == CorruptionKind::Dropout ? spec.rate
                     : spec.kind == CorruptionKind::Noise   ? spec.sigma
                                                            : static_cast<double>(spec.clusters);
        res.rows.push_back({spec.kind, level, accuracy(res.clean_model, corrupted),
                            accuracy(res.wolf_model, corrupted)});
    }
    return res;
}

std::string DemoResult::table() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    os << "corruption   level   clean-trained   pointwolf-trained\n";
    os << "none         -       " << std::setw(13) << 100 * clean_test_acc_clean_trained << "   "
       << std::setw(17) << 100 * clean_test_acc_wolf_trained << '\n';
    for (const auto& r : rows) {
        std::ostringstream lvl;
        if (r.kind == CorruptionKind::LocalDrop || r.kind == CorruptionKind::LocalAdd)
            lvl << "C=" << static_cast<int>(r.level);
        else
            lvl << (r.kind == CorruptionKind::Dropout ? "r=" : "s=") << r.level;
        os << std::left << std::setw(13) << to_string(r.kind) << std::setw(8) << lvl.str()
           << std::right << std::setw(13) << 100 * r.acc_clean_trained << "   " << std::setw(17)
           << 100 * r.acc_wolf_trained << '\n';
    }
    os << "mean over grid       " << std::setw(13) << 100 * mean_clean_trained() << "   "
       << std::setw(17) << 100 * mean_wolf_trained() << '\n';
    return os.str();
}

std::string DemoResult::json() const {
    nlohmann::json j;
    j["clean"] = {{"clean_trained", clean_test_acc_clean_trained},
                  {"pointwolf_trained", clean_test_acc_wolf_trained}};
    j["grid"] = nlohmann::json::array();
    for (const auto& r : rows) {
        for (int regime = 0; regime < 2; ++regime) {
            j["grid"].push_back({{"corruption", std::string(to_string(r.kind))},
                                 {"level", r.level},
                                 {"regime", regime == 0 ? "clean_trained" : "pointwolf_trained"},
                                 {"accuracy", regime == 0 ? r.acc_clean_trained : r.acc_wolf_trained}});
        }
    }
    j["mean"] = {{"clean_trained", mean_clean_trained()}, {"pointwolf_trained", mean_wolf_trained()}};
    return j.dump(2);
}

}  // namespace pointwolf
