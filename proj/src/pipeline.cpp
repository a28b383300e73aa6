#include "pointwolf/pipeline.hpp"

#include <glob.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pointwolf/oracle.hpp"

namespace pointwolf {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

class KeyReader {
public:
    KeyReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    void mark(const char* key) { seen_.insert(key); }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

void read_wolf(KeyReader& r, WolfConfig& w) {
    double rho_r_deg = w.rotation_max / kDeg;
    r.get("anchors", w.anchors);
    r.get("bandwidth", w.bandwidth);
    r.get("rho_r_deg", rho_r_deg);
    r.get("rho_s", w.scale_max);
    r.get("rho_t", w.translation_max);
    r.get("beta", w.mask_keep);
    w.rotation_max = rho_r_deg * kDeg;
}

Stage stage_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ConfigError(where + ": stage needs a string 'type'");
    const auto type = j["type"].get<std::string>();
    KeyReader r(j, where);
    r.mark("type");

    Stage s;
    try {
        if (type == "pointwolf") {
            s.type = Stage::Type::PointWolf;
            read_wolf(r, s.wolf);
        } else if (type == "augtune") {
            s.type = Stage::Type::AugTune;
            read_wolf(r, s.wolf);
            r.get("lambda", s.lambda);
            r.get("model", s.model);
            r.mark("label");
            if (j.contains("label")) {
                const auto& l = j["label"];
                s.label = l.is_string() ? l.get<std::string>() : std::to_string(l.get<int>());
            }
        } else if (type == "cda") {
            s.type = Stage::Type::Cda;
            auto& c = s.cda;
            double lo = c.rotation_lo / kDeg, hi = c.rotation_hi / kDeg;
            std::string axis = "y";
            r.get("scale_lo", c.scale_lo);
            r.get("scale_hi", c.scale_hi);
            r.get("rotate", c.rotate);
            r.get("rotation_lo_deg", lo);
            r.get("rotation_hi_deg", hi);
            r.get("translation", c.translation);
            r.get("jitter_sigma", c.jitter_sigma);
            r.get("jitter_clip", c.jitter_clip);
            r.get("up_axis", axis);
            c.rotation_lo = lo * kDeg;
            c.rotation_hi = hi * kDeg;
            if (axis == "x") c.up_axis = Axis::X;
            else if (axis == "y") c.up_axis = Axis::Y;
            else if (axis == "z") c.up_axis = Axis::Z;
            else throw ConfigError(where + ".up_axis: expected x, y or z");
        } else {
            s.type = Stage::Type::Corruption;
            auto& c = s.corruption;
            c.kind = parse_corruption_kind(type);
            std::string pad(to_string(c.pad));
            if (c.kind == CorruptionKind::LocalDrop || c.kind == CorruptionKind::LocalAdd) {
                r.get("clusters", c.clusters);
                r.get("cluster_size", c.cluster_size);
            }
            if (c.kind == CorruptionKind::LocalDrop || c.kind == CorruptionKind::Dropout) r.get("pad", pad);
            if (c.kind == CorruptionKind::Dropout) r.get("rate", c.rate);
            if (c.kind == CorruptionKind::Noise) r.get("sigma", c.sigma);
            c.pad = parse_pad_mode(pad);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    r.finish();
    return s;
}

json state_json(const AugTuneState& s) {
    return {{"lambda", s.lambda}, {"c_orig", s.c_orig}, {"c_prop", s.c_prop},
            {"c_target", s.c_target}, {"alpha", s.alpha}};
}

bool has_glob_chars(const std::string& s) {
    return s.find_first_of("*?[") != std::string::npos;
}

int resolve_label(const Stage& st, const ReferenceOracle& oracle, const std::filesystem::path& input) {
    const std::string name = st.label ? *st.label : input.parent_path().filename().string();
    int label = oracle.label_of(name);
    if (label < 0 && st.label) {
        try {
            std::size_t used = 0;
            label = std::stoi(name, &used);
            if (used != name.size()) label = -1;
        } catch (const std::exception&) {
            label = -1;
        }
    }
    if (label < 0 || static_cast<std::size_t>(label) >= oracle.class_names().size())
        throw InvalidInput("augtune: cannot resolve class label '" + name + "' for " + input.string());
    return label;
}

}  // namespace

std::string Stage::name() const {
    switch (type) {
        case Type::Cda: return "cda";
        case Type::PointWolf: return "pointwolf";
        case Type::AugTune: return "augtune";
        case Type::Corruption: return std::string(to_string(corruption.kind));
    }
    return "?";
}

void PipelineSpec::validate() const {
    if (inputs.empty()) throw ConfigError("pipeline: no inputs");
    if (stages.empty()) throw ConfigError("pipeline: at least one stage is required");
    if (repetitions < 1) throw ConfigError("pipeline: repetitions must be >= 1");
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& s = stages[i];
        const std::string where = "stage " + std::to_string(i) + " (" + s.name() + ")";
        try {
            switch (s.type) {
                case Stage::Type::Cda: s.cda.validate(); break;
                case Stage::Type::PointWolf: s.wolf.validate(); break;
                case Stage::Type::AugTune:
                    s.wolf.validate();
                    if (!(s.lambda > 0 && s.lambda <= 1))
                        throw std::invalid_argument("lambda must lie in (0, 1]");
                    if (s.model.empty()) throw std::invalid_argument("augtune needs a 'model' file");
                    break;
                case Stage::Type::Corruption: s.corruption.validate(); break;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
}

PipelineSpec parse_pipeline_spec(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    KeyReader r(j, "config");
    PipelineSpec spec;
    std::string out_dir = spec.output_dir.string();
    std::string format;
    json stages = json::array();
    if (j.contains("inputs") && j["inputs"].is_string()) {
        spec.inputs.push_back(j["inputs"].get<std::string>());
        r.mark("inputs");
    } else {
        r.get("inputs", spec.inputs);
    }
    r.get("output_dir", out_dir);
    r.get("seed", spec.seed);
    r.get("normalize", spec.normalize);
    r.get("repetitions", spec.repetitions);
    r.get("format", format);
    r.get("strict", spec.strict);
    r.get("stages", stages);
    r.finish();

    spec.output_dir = out_dir;
    if (!format.empty()) {
        try {
            spec.format = parse_cloud_format(format);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config.format: ") + e.what());
        }
    }
    if (!stages.is_array()) throw ConfigError("config.stages: expected an array");
    for (std::size_t i = 0; i < stages.size(); ++i)
        spec.stages.push_back(stage_from_json(stages[i], "config.stages[" + std::to_string(i) + "]"));
    return spec;
}

PipelineSpec load_pipeline_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto spec = parse_pipeline_spec(buf.str());
    // Relative paths in a config file are relative to the file.
    const auto base = path.parent_path();
    auto rebase = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_relative() && !base.empty() ? (base / fp).string() : p;
    };
    for (auto& in_path : spec.inputs) in_path = rebase(in_path);
    spec.output_dir = rebase(spec.output_dir.string());
    for (auto& s : spec.stages)
        if (!s.model.empty()) s.model = rebase(s.model);
    return spec;
}

Stage parse_stage(std::string_view text) {
    try {
        return stage_from_json(json::parse(text), "stage");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("stage: ") + e.what());
    }
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs) {
    namespace fs = std::filesystem;
    std::vector<fs::path> out;
    for (const auto& entry : inputs) {
        std::vector<fs::path> found;
        if (has_glob_chars(entry)) {
            glob_t g{};
            const int rc = ::glob(entry.c_str(), 0, nullptr, &g);
            if (rc == 0)
                for (std::size_t i = 0; i < g.gl_pathc; ++i) found.emplace_back(g.gl_pathv[i]);
            ::globfree(&g);
            if (rc != 0 && rc != GLOB_NOMATCH) throw IoError("glob failed for '" + entry + "'");
        } else if (fs::is_directory(entry)) {
            for (const auto& de : fs::directory_iterator(entry)) {
                if (!de.is_regular_file()) continue;
                try {
                    format_from_extension(de.path());
                    found.push_back(de.path());
                } catch (const InvalidInput&) {
                }
            }
        } else {
            found.emplace_back(entry);
        }
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

std::uint64_t sample_seed(std::uint64_t master, std::size_t file_ordinal, int rep) {
    return derive_seed(master, {file_ordinal, static_cast<std::uint64_t>(rep)});
}

std::uint64_t stage_seed(std::uint64_t master, std::size_t file_ordinal, int rep, std::size_t stage) {
    return derive_seed(master, {file_ordinal, static_cast<std::uint64_t>(rep), stage});
}

std::string output_name(const std::filesystem::path& input, int rep, CloudFormat format) {
    return input.stem().string() + "__rep" + std::to_string(rep) + std::string(extension_of(format));
}

PointCloud apply_stages(const PipelineSpec& spec, const PointCloud& cloud,
                        const std::filesystem::path& input, const std::vector<std::uint64_t>& seeds,
                        std::vector<StageRecord>* records) {
    if (seeds.size() != spec.stages.size())
        throw std::invalid_argument("apply_stages: one seed per stage required");
    PointCloud current = cloud;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const Stage& st = spec.stages[i];
        Rng rng(seeds[i]);
        StageRecord rec{i, st.name(), seeds[i], std::nullopt};
        switch (st.type) {
            case Stage::Type::Cda: current = cda_augment(current, st.cda, rng); break;
            case Stage::Type::PointWolf: current = pointwolf(current, st.wolf, rng); break;
            case Stage::Type::AugTune: {
                ReferenceOracle oracle = ReferenceOracle::load(st.model);
                const int label = resolve_label(st, oracle, input);
                auto res = augtune_step(current, label, oracle, st.wolf, st.lambda, rng);
                current = std::move(res.cloud);
                rec.augtune = res.state;
                break;
            }
            case Stage::Type::Corruption: current = apply_corruption(current, st.corruption, rng); break;
        }
        if (records) records->push_back(rec);
    }
    return current;
}

RunReport run_pipeline(const PipelineSpec& spec) {
    namespace fs = std::filesystem;
    spec.validate();
    const auto files = expand_inputs(spec.inputs);
    if (files.empty()) throw InvalidInput("no input files matched");

    std::set<std::string> stems;
    for (const auto& f : files)
        if (!stems.insert(f.stem().string()).second)
            throw ConfigError("two inputs share the stem '" + f.stem().string() +
                              "'; output names would collide");

    fs::create_directories(spec.output_dir);
    RunReport report;
    report.master_seed = spec.seed;

    for (std::size_t fi = 0; fi < files.size(); ++fi) {
        const auto& path = files[fi];
        try {
            const CloudFormat fmt = spec.format ? *spec.format : format_from_extension(path);
            PointCloud cloud = read_cloud(path, fmt);
            if (spec.normalize) cloud = normalize_unit_sphere(cloud);

            std::vector<SampleRecord> recs;
            for (int k = 0; k < spec.repetitions; ++k) {
                const auto t0 = std::chrono::steady_clock::now();
                SampleRecord rec;
                rec.input = path.string();
                rec.file_ordinal = fi;
                rec.rep = k;
                rec.seed = sample_seed(spec.seed, fi, k);
                rec.output = output_name(path, k, fmt);
                rec.points_in = cloud.rows();
                std::vector<std::uint64_t> seeds;
                for (std::size_t s = 0; s < spec.stages.size(); ++s)
                    seeds.push_back(stage_seed(spec.seed, fi, k, s));
                const PointCloud out = apply_stages(spec, cloud, path, seeds, &rec.stages);
                write_cloud(out, spec.output_dir / rec.output, fmt);
                rec.points_out = out.rows();
                rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count();
                recs.push_back(std::move(rec));
            }
            report.samples.insert(report.samples.end(), recs.begin(), recs.end());
        } catch (const std::exception& e) {
            if (spec.strict) throw InvalidInput(path.string() + ": " + e.what());
            report.errors.push_back({fi, path.string(), e.what()});
        }
    }

    auto write_text = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << text << '\n';
    };
    write_text(spec.output_dir / kReportFile, report.json());
    write_text(spec.output_dir / kTimingFile, report.timing_json());
    return report;
}

PointCloud replay_sample(const PipelineSpec& spec, const SampleRecord& record) {
    const std::filesystem::path path(record.input);
    const CloudFormat fmt = spec.format ? *spec.format : format_from_extension(path);
    PointCloud cloud = read_cloud(path, fmt);
    if (spec.normalize) cloud = normalize_unit_sphere(cloud);
    std::vector<std::uint64_t> seeds;
    for (const auto& s : record.stages) seeds.push_back(s.seed);
    return apply_stages(spec, cloud, path, seeds);
}

std::string RunReport::json() const {
    nlohmann::json j;
    j["format"] = "pointwolf-run-report";
    j["version"] = 1;
    j["master_seed"] = master_seed;
    j["samples"] = nlohmann::json::array();
    for (const auto& s : samples) {
        nlohmann::json st = nlohmann::json::array();
        for (const auto& r : s.stages) {
            nlohmann::json e = {{"ordinal", r.ordinal}, {"type", r.type}, {"seed", r.seed}};
            if (r.augtune) e["augtune"] = state_json(*r.augtune);
            st.push_back(e);
        }
        j["samples"].push_back({{"input", s.input},
                                {"file_ordinal", s.file_ordinal},
                                {"rep", s.rep},
                                {"output", s.output},
                                {"seed", s.seed},
                                {"points_in", s.points_in},
                                {"points_out", s.points_out},
                                {"stages", st}});
    }
    j["errors"] = nlohmann::json::array();
    for (const auto& e : errors)
        j["errors"].push_back({{"file_ordinal", e.file_ordinal}, {"input", e.input}, {"message", e.message}});
    return j.dump(2);
}

std::string RunReport::timing_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : samples) j.push_back({{"output", s.output}, {"elapsed_ms", s.elapsed_ms}});
    return j.dump(2);
}

RunReport parse_report(std::string_view text) {
    RunReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format") != "pointwolf-run-report") throw InvalidInput("not a run report");
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        for (const auto& s : j.at("samples")) {
            SampleRecord rec;
            rec.input = s.at("input").get<std::string>();
            rec.file_ordinal = s.at("file_ordinal").get<std::size_t>();
            rec.rep = s.at("rep").get<int>();
            rec.output = s.at("output").get<std::string>();
            rec.seed = s.at("seed").get<std::uint64_t>();
            rec.points_in = s.at("points_in").get<Index>();
            rec.points_out = s.at("points_out").get<Index>();
            for (const auto& st : s.at("stages")) {
                StageRecord sr;
                sr.ordinal = st.at("ordinal").get<std::size_t>();
                sr.type = st.at("type").get<std::string>();
                sr.seed = st.at("seed").get<std::uint64_t>();
                if (st.contains("augtune")) {
                    const auto& a = st["augtune"];
                    sr.augtune = AugTuneState{a.at("lambda"), a.at("c_orig"), a.at("c_prop"),
                                              a.at("c_target"), a.at("alpha")};
                }
                rec.stages.push_back(sr);
            }
            r.samples.push_back(std::move(rec));
        }
        for (const auto& e : j.at("errors"))
            r.errors.push_back({e.at("file_ordinal").get<std::size_t>(), e.at("input").get<std::string>(),
                                e.at("message").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed run report: ") + e.what());
    }
    return r;
}

}  // namespace pointwolf
