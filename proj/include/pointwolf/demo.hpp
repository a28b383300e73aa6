#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pointwolf/augtune.hpp"
#include "pointwolf/corruptions.hpp"
#include "pointwolf/oracle.hpp"
#include "pointwolf/wolf.hpp"

namespace pointwolf {

/// Desk-scale robustness comparison: a nearest-centroid classifier trained on
/// clean synthetic shapes vs. one trained with weighted local transformation
/// augmentation, both scored on a grid of corrupted test sets.
struct DemoConfig {
    std::uint64_t seed = 2021;
    int train_per_class = 40;
    int test_per_class = 40;
    Index points = 256;
    WolfConfig wolf;
    int augmented_copies = 4;  // augmented samples added per training sample
    // Proposals are tuned by AugTune against the clean-trained model unless
    // disabled; 0.1 is the synthetic-data difficulty coefficient.
    bool augtune = true;
    double lambda = 0.1;
    // 50 neighbours of 1024 points, scaled to the demo's cloud size.
    Index cluster_size = 12;
    std::array<Index, 3> cluster_counts = {3, 5, 7};
    std::array<double, 3> dropout_rates = {0.25, 0.5, 0.75};
    std::array<double, 3> noise_sigmas = {0.01, 0.03, 0.05};
};

struct DemoRow {
    CorruptionKind kind;
    double level;  // C, r or sigma
    double acc_clean_trained;
    double acc_wolf_trained;
};

struct DemoResult {
    double clean_test_acc_clean_trained = 0;
    double clean_test_acc_wolf_trained = 0;
    std::vector<DemoRow> rows;
    ReferenceOracle clean_model;
    ReferenceOracle wolf_model;

    double mean_clean_trained() const;
    double mean_wolf_trained() const;
    std::string table() const;
    std::string json() const;
};

DemoResult demo_robustness(const DemoConfig& cfg);

}  // namespace pointwolf
