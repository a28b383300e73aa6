#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pointwolf/augtune.hpp"
#include "pointwolf/cda.hpp"
#include "pointwolf/corruptions.hpp"
#include "pointwolf/io.hpp"
#include "pointwolf/wolf.hpp"

namespace pointwolf {

struct Stage {
    enum class Type { Cda, PointWolf, AugTune, Corruption };

    Type type = Type::PointWolf;
    CdaConfig cda;
    WolfConfig wolf;           // PointWolf and AugTune
    double lambda = 0.3;       // AugTune
    std::string model;         // AugTune: reference oracle file
    std::optional<std::string> label;  // AugTune: class name or index; default = parent dir name
    CorruptionSpec corruption;

    std::string name() const;
};

/// Declarative batch job. See docs/pipeline-config.md for the file schema.
struct PipelineSpec {
    std::vector<std::string> inputs;  // files, directories or glob patterns
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    bool normalize = true;
    int repetitions = 1;
    std::optional<CloudFormat> format;  // overrides extension detection on read
    bool strict = false;
    std::vector<Stage> stages;

    void validate() const;
};

/// Raised for malformed configuration files (usage errors, not data errors).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

PipelineSpec parse_pipeline_spec(std::string_view json_text);
PipelineSpec load_pipeline_spec(const std::filesystem::path& path);
/// Stage object as accepted in the "stages" array of a config file.
Stage parse_stage(std::string_view json_text);

/// Expands files, directories (supported extensions, non-recursive) and glob
/// patterns. Each entry's matches are sorted; entry order is kept.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs);

struct StageRecord {
    std::size_t ordinal = 0;
    std::string type;
    std::uint64_t seed = 0;
    std::optional<AugTuneState> augtune;
};

struct SampleRecord {
    std::string input;
    std::size_t file_ordinal = 0;
    int rep = 0;
    std::string output;  // file name inside output_dir
    std::uint64_t seed = 0;
    Index points_in = 0;
    Index points_out = 0;
    std::vector<StageRecord> stages;
    double elapsed_ms = 0;  // kept out of the report, see RunReport::timing_json
};

struct FileError {
    std::size_t file_ordinal = 0;
    std::string input;
    std::string message;
};

struct RunReport {
    std::uint64_t master_seed = 0;
    std::vector<SampleRecord> samples;
    std::vector<FileError> errors;

    /// Deterministic report: every field is a function of (inputs, spec).
    std::string json() const;
    /// Wall-clock timings per sample, written next to the report.
    std::string timing_json() const;
};

RunReport parse_report(std::string_view json_text);

inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kTimingFile = "timing.json";

std::uint64_t sample_seed(std::uint64_t master, std::size_t file_ordinal, int rep);
std::uint64_t stage_seed(std::uint64_t master, std::size_t file_ordinal, int rep, std::size_t stage);

/// `<stem>__rep<k><ext>`
std::string output_name(const std::filesystem::path& input, int rep, CloudFormat format);

/// Applies the stages to one (already normalized) cloud using the given
/// per-stage seeds and fills `stages` with what each one did.
PointCloud apply_stages(const PipelineSpec& spec, const PointCloud& cloud,
                        const std::filesystem::path& input, const std::vector<std::uint64_t>& seeds,
                        std::vector<StageRecord>* stages = nullptr);

/// Runs the whole job: writes every output plus report.json and timing.json
/// into spec.output_dir. Per-file failures are recorded and skipped, or
/// rethrown when spec.strict is set.
RunReport run_pipeline(const PipelineSpec& spec);

/// Recomputes one output from its report record.
PointCloud replay_sample(const PipelineSpec& spec, const SampleRecord& record);

}  // namespace pointwolf
