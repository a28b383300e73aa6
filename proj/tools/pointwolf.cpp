// pointwolf: batch augmentation, corruption and inspection of point cloud files.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pointwolf/demo.hpp"
#include "pointwolf/io.hpp"
#include "pointwolf/oracle.hpp"
#include "pointwolf/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pointwolf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

constexpr double kDeg = std::numbers::pi / 180.0;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Flags shared by `augment` and `corrupt`.
struct JobFlags {
    std::vector<std::string> inputs;
    std::string output;
    std::string config;
    std::uint64_t seed = 0;
    int reps = 1;
    bool strict = false;
    std::string format;
    bool normalize = true;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* reps_opt = nullptr;
    CLI::Option* strict_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* normalize_opt = nullptr;
    CLI::Option* output_opt = nullptr;

    void add_to(CLI::App* app) {
        app->add_option("inputs", inputs, "Input files, directories or glob patterns");
        output_opt = app->add_option("-o,--output", output, "Output directory (default: out)");
        app->add_option("--config", config, "Pipeline config file (JSON)")->check(CLI::ExistingFile);
        seed_opt = app->add_option("--seed", seed, "Master seed");
        reps_opt = app->add_option("--reps", reps, "Repetitions per input")->check(CLI::PositiveNumber);
        strict_opt = app->add_flag("--strict", strict, "Abort on the first per-file error");
        format_opt = app->add_option("--format", format, "Input format override: xyz | ply");
        normalize_opt = app->add_flag("--normalize,!--no-normalize", normalize,
                                      "Center and scale inputs into the unit sphere (default on)");
    }

    /// Loads --config when given, then applies explicitly set flags on top.
    PipelineSpec base_spec() const {
        PipelineSpec spec;
        if (!config.empty()) spec = load_pipeline_spec(config);
        if (!inputs.empty()) spec.inputs = inputs;
        if (output_opt->count()) spec.output_dir = output;
        if (seed_opt->count()) spec.seed = seed;
        if (reps_opt->count()) spec.repetitions = reps;
        if (strict_opt->count()) spec.strict = strict;
        if (normalize_opt->count()) spec.normalize = normalize;
        if (format_opt->count()) spec.format = parse_cloud_format(format);
        return spec;
    }
};

struct WolfFlags {
    WolfConfig wolf;
    double rho_r_deg = 15.0;
    std::vector<CLI::Option*> opts;

    void add_to(CLI::App* app) {
        opts.push_back(app->add_option("--anchors", wolf.anchors, "Anchor count M"));
        opts.push_back(app->add_option("--bandwidth", wolf.bandwidth, "Kernel bandwidth h"));
        opts.push_back(app->add_option("--rho-r", rho_r_deg, "Max rotation, degrees"));
        opts.push_back(app->add_option("--rho-s", wolf.scale_max, "Max scale factor (>= 1)"));
        opts.push_back(app->add_option("--rho-t", wolf.translation_max, "Max translation"));
        opts.push_back(app->add_option("--beta", wolf.mask_keep, "Axis mask keep probability"));
    }

    WolfConfig config() const {
        WolfConfig c = wolf;
        c.rotation_max = rho_r_deg * kDeg;
        return c;
    }

    bool any_set() const {
        for (auto* o : opts)
            if (o->count()) return true;
        return false;
    }
};

struct CdaFlags {
    CdaConfig cda;
    double rot_lo_deg = 0, rot_hi_deg = 360;
    std::string up_axis = "y";
    bool no_rotate = false;
    std::vector<CLI::Option*> opts;

    void add_to(CLI::App* app) {
        opts.push_back(app->add_option("--scale-lo", cda.scale_lo, "CDA: min global scale"));
        opts.push_back(app->add_option("--scale-hi", cda.scale_hi, "CDA: max global scale"));
        opts.push_back(app->add_flag("--no-rotate", no_rotate, "CDA: disable up-axis rotation"));
        opts.push_back(app->add_option("--rotation-lo", rot_lo_deg, "CDA: min up-axis angle, degrees"));
        opts.push_back(app->add_option("--rotation-hi", rot_hi_deg, "CDA: max up-axis angle, degrees"));
        opts.push_back(app->add_option("--translation", cda.translation, "CDA: max global translation"));
        opts.push_back(app->add_option("--jitter-sigma", cda.jitter_sigma, "CDA: jitter std deviation"));
        opts.push_back(app->add_option("--jitter-clip", cda.jitter_clip, "CDA: jitter clip bound"));
        opts.push_back(app->add_option("--up-axis", up_axis, "CDA: up axis x | y | z")
                           ->check(CLI::IsMember({"x", "y", "z"})));
    }

    CdaConfig config() const {
        CdaConfig c = cda;
        c.rotate = !no_rotate;
        c.rotation_lo = rot_lo_deg * kDeg;
        c.rotation_hi = rot_hi_deg * kDeg;
        c.up_axis = up_axis == "x" ? Axis::X : up_axis == "z" ? Axis::Z : Axis::Y;
        return c;
    }

    bool any_set() const {
        for (auto* o : opts)
            if (o->count()) return true;
        return false;
    }
};

struct CorruptionFlags {
    CorruptionSpec spec;
    std::string pad = "duplicate-first";
    std::vector<CLI::Option*> opts;

    void add_to(CLI::App* app) {
        opts.push_back(app->add_option("--clusters", spec.clusters, "LocalDrop/LocalAdd cluster count C"));
        opts.push_back(app->add_option("--cluster-size", spec.cluster_size, "Cluster size K"));
        opts.push_back(app->add_option("--rate", spec.rate, "Dropout rate r"));
        opts.push_back(app->add_option("--sigma", spec.sigma, "Noise standard deviation"));
        opts.push_back(app->add_option("--pad", pad, "shrink | duplicate-first")
                           ->check(CLI::IsMember({"shrink", "duplicate-first"})));
    }

    CorruptionSpec config(CorruptionKind kind) const {
        CorruptionSpec s = spec;
        s.kind = kind;
        s.pad = parse_pad_mode(pad);
        return s;
    }

    bool any_set() const {
        for (auto* o : opts)
            if (o->count()) return true;
        return false;
    }
};

void print_report_summary(const RunReport& report, const PipelineSpec& spec) {
    std::cout << "wrote " << report.samples.size() << " samples to " << spec.output_dir.string()
              << " (report: " << (spec.output_dir / kReportFile).string() << ")\n";
    for (const auto& e : report.errors) std::cerr << "skipped " << e.input << ": " << e.message << '\n';
}

int run_job(PipelineSpec spec) {
    spec.validate();
    const auto report = run_pipeline(spec);
    print_report_summary(report, spec);
    return kExitOk;
}

void inspect_file(const fs::path& path, std::optional<CloudFormat> fmt) {
    const PointCloud cloud = read_cloud(path, fmt);
    const Vector3d c = centroid(cloud);
    const Eigen::RowVector3d lo = cloud.colwise().minCoeff();
    const Eigen::RowVector3d hi = cloud.colwise().maxCoeff();
    const Eigen::VectorXd radii = (cloud.rowwise() - c.transpose()).rowwise().norm();
    std::cout << std::setprecision(6) << path.string() << '\n'
              << "  points      " << cloud.rows() << '\n'
              << "  centroid    " << c.transpose() << '\n'
              << "  bbox min    " << lo << '\n'
              << "  bbox max    " << hi << '\n'
              << "  extent      " << (hi - lo) << '\n'
              << "  radius max  " << radii.maxCoeff() << '\n'
              << "  radius mean " << radii.mean() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted local transformation augmentation for point clouds"};
    app.require_subcommand(1);

    // augment
    auto* augment = app.add_subcommand("augment", "Run an augmentation pipeline over input files");
    JobFlags aug_job;
    WolfFlags aug_wolf;
    CdaFlags aug_cda;
    CorruptionFlags aug_corr;
    std::vector<std::string> aug_stages;
    double lambda = 0.3;
    std::string model, label;
    aug_job.add_to(augment);
    aug_wolf.add_to(augment);
    aug_cda.add_to(augment);
    aug_corr.add_to(augment);
    auto* stage_opt = augment->add_option("--stage", aug_stages,
                                          "Stage to apply, repeatable, in order: pointwolf | augtune | cda | "
                                          "local-drop | local-add | dropout | noise (default: pointwolf)");
    auto* lambda_opt = augment->add_option("--lambda", lambda, "AugTune difficulty coefficient in (0, 1]");
    auto* model_opt = augment->add_option("--model", model, "AugTune reference oracle model file");
    auto* label_opt = augment->add_option("--label", label, "AugTune class label (default: parent dir name)");

    // corrupt
    auto* corrupt = app.add_subcommand("corrupt", "Apply a corruption to input files");
    JobFlags cor_job;
    CorruptionFlags cor_flags;
    std::string kind;
    cor_job.add_to(corrupt);
    cor_flags.add_to(corrupt);
    auto* kind_opt = corrupt->add_option("--kind", kind, "local-drop | local-add | dropout | noise");

    // demo-robustness
    auto* demo = app.add_subcommand("demo-robustness", "Synthetic robustness comparison on a corruption grid");
    DemoConfig demo_cfg;
    WolfFlags demo_wolf;
    std::string demo_json, demo_model;
    demo->add_option("--seed", demo_cfg.seed, "Seed");
    demo->add_option("--train-per-class", demo_cfg.train_per_class, "Training samples per class");
    demo->add_option("--test-per-class", demo_cfg.test_per_class, "Test samples per class");
    demo->add_option("--copies", demo_cfg.augmented_copies, "Augmented copies per training sample");
    demo_wolf.add_to(demo);
    demo->add_option("--lambda", demo_cfg.lambda, "AugTune difficulty coefficient for the augmented regime");
    demo->add_flag("--augtune,!--no-augtune", demo_cfg.augtune, "Tune proposals with AugTune (default on)");
    demo->add_option("--json", demo_json, "Also write the results as JSON");
    demo->add_option("--save-model", demo_model, "Save the augmentation-trained oracle model");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Print point cloud statistics");
    std::vector<std::string> inspect_inputs;
    std::string inspect_format;
    inspect->add_option("inputs", inspect_inputs, "Files, directories or globs")->required();
    inspect->add_option("--format", inspect_format, "Format override: xyz | ply");

    // train-oracle
    auto* train = app.add_subcommand("train-oracle",
                                     "Fit the reference nearest-centroid oracle; class = parent directory name");
    std::vector<std::string> train_inputs;
    std::string train_out, train_format;
    bool train_normalize = true;
    train->add_option("inputs", train_inputs, "Files, directories or globs")->required();
    train->add_option("-o,--output", train_out, "Model file to write")->required();
    train->add_option("--format", train_format, "Format override: xyz | ply");
    train->add_flag("--normalize,!--no-normalize", train_normalize, "Normalize before fitting (default on)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*augment) {
            PipelineSpec spec = aug_job.base_spec();
            const bool stage_flags = stage_opt->count() || aug_wolf.any_set() || aug_cda.any_set() ||
                                     aug_corr.any_set() || lambda_opt->count() || model_opt->count() ||
                                     label_opt->count();
            if (!aug_job.config.empty() && stage_flags)
                throw UsageError("stage flags cannot be combined with --config");
            if (aug_job.config.empty()) {
                if (aug_stages.empty()) aug_stages.push_back(lambda_opt->count() ? "augtune" : "pointwolf");
                for (const auto& name : aug_stages) {
                    Stage s;
                    if (name == "pointwolf") {
                        s.type = Stage::Type::PointWolf;
                        s.wolf = aug_wolf.config();
                    } else if (name == "augtune") {
                        s.type = Stage::Type::AugTune;
                        s.wolf = aug_wolf.config();
                        s.lambda = lambda;
                        s.model = model;
                        if (label_opt->count()) s.label = label;
                    } else if (name == "cda") {
                        s.type = Stage::Type::Cda;
                        s.cda = aug_cda.config();
                    } else {
                        s.type = Stage::Type::Corruption;
                        s.corruption = aug_corr.config(parse_corruption_kind(name));
                    }
                    spec.stages.push_back(s);
                }
            }
            return run_job(spec);
        }

        if (*corrupt) {
            PipelineSpec spec = cor_job.base_spec();
            if (!cor_job.config.empty() && (kind_opt->count() || cor_flags.any_set()))
                throw UsageError("corruption flags cannot be combined with --config");
            if (cor_job.config.empty()) {
                if (kind.empty()) throw UsageError("corrupt: --kind is required without --config");
                Stage s;
                s.type = Stage::Type::Corruption;
                s.corruption = cor_flags.config(parse_corruption_kind(kind));
                spec.stages.push_back(s);
            }
            for (const auto& s : spec.stages)
                if (s.type != Stage::Type::Corruption)
                    throw UsageError("corrupt: stage '" + s.name() + "' is not a corruption");
            return run_job(spec);
        }

        if (*demo) {
            demo_cfg.wolf = demo_wolf.config();
            const auto res = demo_robustness(demo_cfg);
            std::cout << res.table();
            if (!demo_json.empty()) {
                std::ofstream out(demo_json);
                if (!out) throw IoError("cannot write " + demo_json);
                out << res.json() << '\n';
            }
            if (!demo_model.empty()) res.wolf_model.save(demo_model);
            return kExitOk;
        }

        if (*inspect) {
            std::optional<CloudFormat> fmt;
            if (!inspect_format.empty()) fmt = parse_cloud_format(inspect_format);
            const auto files = expand_inputs(inspect_inputs);
            if (files.empty()) throw InvalidInput("no input files matched");
            for (const auto& f : files) inspect_file(f, fmt);
            return kExitOk;
        }

        if (*train) {
            std::optional<CloudFormat> fmt;
            if (!train_format.empty()) fmt = parse_cloud_format(train_format);
            const auto files = expand_inputs(train_inputs);
            if (files.empty()) throw InvalidInput("no input files matched");
            std::map<std::string, int> ids;
            for (const auto& f : files) ids.emplace(f.parent_path().filename().string(), 0);
            std::vector<std::string> names;
            for (auto& [name, id] : ids) {
                id = static_cast<int>(names.size());
                names.push_back(name);
            }
            std::vector<std::pair<PointCloud, int>> samples;
            for (const auto& f : files) {
                PointCloud c = read_cloud(f, fmt);
                if (train_normalize) c = normalize_unit_sphere(c);
                samples.emplace_back(std::move(c), ids.at(f.parent_path().filename().string()));
            }
            ReferenceOracle::train(samples, names).save(train_out);
            std::cout << "trained " << names.size() << " classes from " << files.size() << " files -> "
                      << train_out << '\n';
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {  // ConfigError, UsageError, bad flag values
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const OracleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
