#pragma once

// Every tunable in one JSON document. Missing keys keep their defaults;
// unknown keys are rejected. "auto" sizes (nms_radius, min_votes, morphology
// radii, slack_radius) scale with the image and are resolved per grid.

#include "uois/augment.hpp"
#include "uois/metrics.hpp"
#include "uois/pipeline.hpp"
#include "uois/scenegen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace uois {

enum class PredictorKind { Oracle, Cached };

struct PredictorConfig {
    PredictorKind kind = PredictorKind::Oracle;
    double direction_noise_deg = 0.0;
    double label_flip_prob = 0.0;
};

struct ImpConfig {
    bool enabled = true;
    ElementShape shape = ElementShape::Disk;
    std::optional<int> open_radius;
    std::optional<int> close_radius;
    Connectivity connectivity = Connectivity::Eight;
};

struct Config {
    std::uint64_t seed = 0;
    int workers = 1;

    VotingParams voting;
    std::optional<double> nms_radius;
    std::optional<int> min_votes;
    bool exact_voting = false;

    ImpConfig imp;
    PredictorConfig predictor;

    std::optional<int> slack_radius;
    Averaging averaging = Averaging::PerImage;

    SceneConfig scene;
    int scene_count = 100;
    bool depth_noise = false;
    NoiseConfig noise;

    AugmentConfig augment;
    int samples_per_instance = 1;
    double pad_frac = kDefaultPadFrac;

    /// Throws Error on the first invalid value.
    void validate() const;

    SegmentParams segment_params(const ImageGrid& grid) const;
    int slack_for(const ImageGrid& grid) const;
};

Config config_from_json(const std::string& text);
Config load_config(const std::filesystem::path& path);
/// Full document with every key, "auto" for unset sizes.
std::string config_to_json(const Config& config);

}  // namespace uois
