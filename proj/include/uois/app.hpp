#pragma once

// The uois subcommands as library calls, shared by the CLI and the
// acceptance harness.

#include "uois/config.hpp"
#include "uois/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace uois::app {

namespace fs = std::filesystem;

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitCheck = 3 };

/// <out>/camera.json plus <out>/scene_NNNN[_vK]/{rgb,depth,label,semantic}.png
/// and pose.json for config.scene_count scenes.
void gen_scenes(const Config& config, const fs::path& out);

struct SegmentOptions {
    fs::path data;
    fs::path out;
    std::optional<fs::path> refined_masks;  // <dir>/<scene>/mask_<k>.png
    bool write_crops = false;               // crop_<k>_rgb.png, crop_<k>_mask.png, crops.json
};

struct BatchOutcome {
    int processed = 0;
    std::vector<std::string> failures;  // "scene: message", in scene order
};

/// Writes <out>/<scene>/label.png for every scene of `data`.
BatchOutcome segment_dataset(const Config& config, const SegmentOptions& options);

struct EvaluateOutcome {
    ScoreReport report;
    std::vector<std::string> missing;  // scenes present on one side only
};

/// Scores every scene that has label.png under both roots.
EvaluateOutcome evaluate_dirs(const Config& config, const fs::path& pred, const fs::path& gt);

/// scores.csv and summary.json.
void write_evaluation(const EvaluateOutcome& outcome, const fs::path& out);
std::string summary_json(const EvaluateOutcome& outcome);

/// Per instance, config.samples_per_instance perturbed refinement pairs:
/// <out>/NNNNNN_{rgb,input,target}.png and <out>/index.json. Sample k draws
/// from substream k of config.seed.
BatchOutcome augment_dataset(const Config& config, const fs::path& data, const fs::path& out);

}  // namespace uois::app
