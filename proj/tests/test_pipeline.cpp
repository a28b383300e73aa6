#include "doctest.h"

#include <fstream>
#include <sstream>

#include "pointwolf/oracle.hpp"
#include "pointwolf/pipeline.hpp"
#include "pointwolf/shapes.hpp"
#include "test_support.hpp"

using namespace pointwolf;
using namespace pointwolf::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

/// `count` random clouds written as <dir>/cloud_<i>.xyz
void write_fixtures(const fs::path& dir, int count, Index n = 128, std::uint64_t seed = 1) {
    fs::create_directories(dir);
    Rng rng(seed);
    for (int i = 0; i < count; ++i)
        write_cloud(random_cloud(n, rng), dir / ("cloud_" + std::to_string(i) + ".xyz"));
}

PipelineSpec basic_spec(const fs::path& in, const fs::path& out) {
    PipelineSpec s;
    s.inputs = {(in / "*.xyz").string()};
    s.output_dir = out;
    s.seed = 99;
    s.repetitions = 3;
    s.stages.push_back(parse_stage(R"({"type": "pointwolf"})"));
    s.stages.push_back(parse_stage(R"({"type": "noise", "sigma": 0.01})"));
    return s;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config parsing") {
    const auto spec = parse_pipeline_spec(R"({
        "inputs": "data/*.ply",
        "output_dir": "augmented",
        "seed": 18446744073709551615,
        "normalize": false,
        "repetitions": 4,
        "format": "ply",
        "strict": true,
        "stages": [
            {"type": "cda", "scale_lo": 0.9, "scale_hi": 1.1, "rotate": false, "up_axis": "z"},
            {"type": "pointwolf", "anchors": 8, "bandwidth": 0.4, "rho_r_deg": 10, "rho_s": 1.5,
             "rho_t": 0.5, "beta": 0.3},
            {"type": "augtune", "lambda": 0.1, "model": "m.json", "label": 2},
            {"type": "local_drop", "clusters": 3, "cluster_size": 50, "pad": "shrink"},
            {"type": "local-add", "clusters": 5},
            {"type": "dropout", "rate": 0.25},
            {"type": "noise", "sigma": 0.03}
        ]
    })");
    CHECK(spec.inputs == std::vector<std::string>{"data/*.ply"});
    CHECK(spec.output_dir == "augmented");
    CHECK(spec.seed == 18446744073709551615ULL);
    CHECK_FALSE(spec.normalize);
    CHECK(spec.repetitions == 4);
    CHECK(spec.format == CloudFormat::PlyAscii);
    CHECK(spec.strict);
    REQUIRE(spec.stages.size() == 7);
    CHECK(spec.stages[0].type == Stage::Type::Cda);
    CHECK(spec.stages[0].cda.up_axis == Axis::Z);
    CHECK_FALSE(spec.stages[0].cda.rotate);
    CHECK(spec.stages[1].wolf.anchors == 8);
    CHECK(spec.stages[1].wolf.rotation_max == doctest::Approx(10 * std::numbers::pi / 180));
    CHECK(spec.stages[1].wolf.mask_keep == 0.3);
    CHECK(spec.stages[2].lambda == 0.1);
    CHECK(spec.stages[2].label == "2");
    CHECK(spec.stages[3].corruption.pad == PadMode::Shrink);
    CHECK(spec.stages[4].corruption.kind == CorruptionKind::LocalAdd);
    CHECK(spec.stages[4].corruption.cluster_size == 50);
    CHECK(spec.stages[5].corruption.pad == PadMode::DuplicateFirst);
    CHECK(spec.stages[6].name() == "noise");
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("config errors are ConfigError") {
    CHECK_THROWS_AS(parse_pipeline_spec("{"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"inputs": ["a"], "stages": [], "colour": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"stages": [{"type": "pointwolf", "anchor": 3}]})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"stages": [{"type": "blur"}]})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"stages": [{"anchors": 3}]})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"seed": "abc"})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"format": "obj"})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"stages": [{"type": "noise", "rate": 0.5}]})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"stages": [{"type": "cda", "up_axis": "w"}]})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_spec(R"({"stages": [{"type": "dropout", "pad": "zero"}]})"), ConfigError);
    // the error is a usage error
    CHECK_THROWS_AS(parse_pipeline_spec("[]"), std::invalid_argument);
}

TEST_CASE("spec validation") {
    PipelineSpec s;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.inputs = {"x"};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.stages.push_back(parse_stage(R"({"type": "pointwolf", "beta": 1.0})"));
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.stages[0] = parse_stage(R"({"type": "augtune"})");
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.stages[0] = parse_stage(R"({"type": "augtune", "model": "m.json", "lambda": 0})");
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.stages[0] = parse_stage(R"({"type": "pointwolf"})");
    s.repetitions = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.repetitions = 1;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("load_pipeline_spec resolves paths against the file") {
    const auto dir = fresh_dir("pipeline_load");
    std::ofstream(dir / "job.json") << R"({"inputs": ["in/*.xyz", "/abs/a.xyz"], "output_dir": "out",
        "stages": [{"type": "augtune", "model": "m.json"}]})";
    const auto spec = load_pipeline_spec(dir / "job.json");
    CHECK(spec.inputs[0] == (dir / "in/*.xyz").string());
    CHECK(spec.inputs[1] == "/abs/a.xyz");
    CHECK(spec.output_dir == dir / "out");
    CHECK(spec.stages[0].model == (dir / "m.json").string());
    CHECK_THROWS_AS(load_pipeline_spec(dir / "absent.json"), IoError);
}

TEST_CASE("input expansion") {
    const auto dir = fresh_dir("pipeline_expand");
    write_fixtures(dir, 3);
    std::ofstream(dir / "notes.md") << "x";
    fs::create_directories(dir / "sub");
    const auto from_dir = expand_inputs({dir.string()});
    REQUIRE(from_dir.size() == 3);
    CHECK(from_dir[0].filename() == "cloud_0.xyz");
    CHECK(from_dir[2].filename() == "cloud_2.xyz");
    CHECK(expand_inputs({(dir / "cloud_[12].xyz").string()}).size() == 2);
    CHECK(expand_inputs({(dir / "*.none").string()}).empty());
    const auto mixed = expand_inputs({(dir / "cloud_2.xyz").string(), (dir / "cloud_0.xyz").string()});
    CHECK(mixed[0].filename() == "cloud_2.xyz");
}

TEST_CASE("seed derivation") {
    CHECK(sample_seed(1, 0, 0) != sample_seed(1, 0, 1));
    CHECK(sample_seed(1, 0, 1) != sample_seed(1, 1, 0));
    CHECK(stage_seed(1, 0, 0, 0) != stage_seed(1, 0, 0, 1));
    CHECK(stage_seed(7, 2, 3, 1) == derive_seed(7, {2, 3, 1}));
    CHECK(sample_seed(7, 2, 3) == derive_seed(7, {2, 3}));
    CHECK(output_name("a/b/chair.ply", 2, CloudFormat::PlyAscii) == "chair__rep2.ply");
    CHECK(output_name("a/chair.txt", 0, CloudFormat::XyzText) == "chair__rep0.xyz");
}

TEST_CASE("two-stage run on ten files writes thirty outputs") {
    const auto root = fresh_dir("pipeline_thirty");
    write_fixtures(root / "in", 10);
    const auto spec = basic_spec(root / "in", root / "out");
    const RunReport r = run_pipeline(spec);
    CHECK(r.samples.size() == 30);
    CHECK(r.errors.empty());
    int outputs = 0;
    for (const auto& e : fs::directory_iterator(root / "out"))
        outputs += e.path().filename().string().find("__rep") != std::string::npos;
    CHECK(outputs == 30);
    CHECK(fs::exists(root / "out" / kReportFile));
    CHECK(fs::exists(root / "out" / kTimingFile));
    for (const auto& s : r.samples) {
        CHECK(s.stages.size() == 2);
        CHECK(s.points_in == 128);
        CHECK(s.points_out == 128);
        CHECK(fs::exists(root / "out" / s.output));
    }
    CHECK(r.samples[4].output == "cloud_1__rep1.xyz");
}

TEST_CASE("dual runs are byte identical") {
    const auto root = fresh_dir("pipeline_dual");
    write_fixtures(root / "in", 4);
    auto a = basic_spec(root / "in", root / "a");
    auto b = basic_spec(root / "in", root / "b");
    const RunReport ra = run_pipeline(a);
    run_pipeline(b);
    CHECK(slurp(root / "a" / kReportFile) == slurp(root / "b" / kReportFile));
    for (const auto& s : ra.samples) CHECK(slurp(root / "a" / s.output) == slurp(root / "b" / s.output));
}

TEST_CASE("degenerate pointwolf copies inputs byte for byte") {
    const auto root = fresh_dir("pipeline_identity");
    write_fixtures(root / "in", 3);
    PipelineSpec s;
    s.inputs = {(root / "in").string()};
    s.output_dir = root / "out";
    s.normalize = false;
    s.stages.push_back(parse_stage(R"({"type": "pointwolf", "rho_s": 1, "rho_r_deg": 0, "rho_t": 0})"));
    const auto r = run_pipeline(s);
    REQUIRE(r.samples.size() == 3);
    for (const auto& rec : r.samples) CHECK(slurp(rec.input) == slurp(root / "out" / rec.output));

    s.normalize = true;
    s.output_dir = root / "norm";
    for (const auto& rec : run_pipeline(s).samples) {
        const PointCloud expect = normalize_unit_sphere(read_cloud(rec.input));
        CHECK(max_abs_diff(read_cloud(root / "norm" / rec.output), expect) <= 1e-8);
    }
}

TEST_CASE("seed isolation across repetitions") {
    const auto root = fresh_dir("pipeline_isolation");
    write_fixtures(root / "in", 2);
    auto a = basic_spec(root / "in", root / "a");
    a.repetitions = 2;
    auto b = a;
    b.output_dir = root / "b";
    b.repetitions = 3;  // adds rep 2 without touching reps 0 and 1
    const auto ra = run_pipeline(a);
    run_pipeline(b);
    for (const auto& s : ra.samples) CHECK(slurp(root / "a" / s.output) == slurp(root / "b" / s.output));

    auto c = a;
    c.output_dir = root / "c";
    c.seed = a.seed + 1;
    const auto rc = run_pipeline(c);
    for (const auto& s : rc.samples) CHECK(slurp(root / "a" / s.output) != slurp(root / "c" / s.output));
}

TEST_CASE("report round trip and replay") {
    const auto root = fresh_dir("pipeline_replay");
    write_fixtures(root / "in", 3);
    auto spec = basic_spec(root / "in", root / "out");
    spec.stages.push_back(parse_stage(R"({"type": "dropout", "rate": 0.5, "pad": "shrink"})"));
    run_pipeline(spec);
    const RunReport r = parse_report(slurp(root / "out" / kReportFile));
    CHECK(r.master_seed == 99);
    REQUIRE(r.samples.size() == 9);
    for (const auto& rec : r.samples) {
        CHECK(rec.stages.size() == 3);
        CHECK(rec.seed == sample_seed(99, rec.file_ordinal, rec.rep));
        const PointCloud replayed = replay_sample(spec, rec);
        CHECK(replayed.rows() == rec.points_out);
        std::ostringstream buf;
        write_cloud(replayed, buf, CloudFormat::XyzText);
        CHECK(buf.str() == slurp(root / "out" / rec.output));
    }
    CHECK(RunReport(r).json() + "\n" == slurp(root / "out" / kReportFile));
    CHECK_THROWS_AS(parse_report("{}"), InvalidInput);
}

TEST_CASE("per-file errors are recorded or rethrown") {
    const auto root = fresh_dir("pipeline_errors");
    write_fixtures(root / "in", 2);
    std::ofstream(root / "in" / "broken.xyz") << "1 2\n";
    auto spec = basic_spec(root / "in", root / "out");
    spec.repetitions = 1;
    const auto r = run_pipeline(spec);
    CHECK(r.samples.size() == 2);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].input.find("broken.xyz") != std::string::npos);
    CHECK(r.errors[0].message.find(":1:") != std::string::npos);
    CHECK(parse_report(slurp(root / "out" / kReportFile)).errors.size() == 1);

    spec.strict = true;
    spec.output_dir = root / "strict";
    CHECK_THROWS_AS(run_pipeline(spec), InvalidInput);

    spec.strict = false;
    spec.inputs = {(root / "nothing" / "*.xyz").string()};
    CHECK_THROWS_AS(run_pipeline(spec), InvalidInput);
}

TEST_CASE("colliding stems are rejected") {
    const auto root = fresh_dir("pipeline_stems");
    write_fixtures(root / "a", 1);
    write_fixtures(root / "b", 1);
    PipelineSpec s;
    s.inputs = {(root / "a").string(), (root / "b").string()};
    s.output_dir = root / "out";
    s.stages.push_back(parse_stage(R"({"type": "noise", "sigma": 0.01})"));
    CHECK_THROWS_AS(run_pipeline(s), ConfigError);
}

TEST_CASE("augtune stage with a model and directory labels") {
    const auto root = fresh_dir("pipeline_augtune");
    Rng rng(3);
    std::vector<std::pair<PointCloud, int>> train;
    std::vector<std::string> names;
    for (auto cls : kShapeClasses) {
        names.push_back(shape_name(cls));
        fs::create_directories(root / "in" / shape_name(cls));
        for (int i = 0; i < 5; ++i)
            train.emplace_back(normalize_unit_sphere(sample_shape(cls, 256, rng)), static_cast<int>(cls));
        write_cloud(sample_shape(cls, 256, rng), root / "in" / shape_name(cls) / (shape_name(cls) + "_0.xyz"));
    }
    ReferenceOracle::train(train, names).save(root / "model.json");

    PipelineSpec s;
    s.inputs = {(root / "in" / "*" / "*.xyz").string()};
    s.output_dir = root / "out";
    s.seed = 5;
    Stage st = parse_stage(R"({"type": "augtune", "lambda": 0.3})");
    st.model = (root / "model.json").string();
    s.stages.push_back(st);
    const auto r = run_pipeline(s);
    REQUIRE(r.errors.empty());
    REQUIRE(r.samples.size() == 3);
    for (const auto& rec : r.samples) {
        REQUIRE(rec.stages[0].augtune.has_value());
        const auto& a = *rec.stages[0].augtune;
        CHECK(a.lambda == 0.3);
        CHECK(a.alpha >= 0);
        CHECK(a.alpha <= 1);
        CHECK(a.c_target == std::max(a.c_prop, 0.7 * a.c_orig));
    }
    const auto parsed = parse_report(slurp(root / "out" / kReportFile));
    CHECK(parsed.samples[1].stages[0].augtune->c_orig == r.samples[1].stages[0].augtune->c_orig);

    s.stages[0].label = "pyramid";
    s.output_dir = root / "bad";
    const auto bad = run_pipeline(s);
    CHECK(bad.errors.size() == 3);
    s.stages[0].label = "1";
    s.output_dir = root / "indexed";
    CHECK(run_pipeline(s).errors.empty());
}

}  // TEST_SUITE
