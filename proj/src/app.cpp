#include "uois/app.hpp"

#include "uois/augment.hpp"
#include "uois/geometry.hpp"
#include "uois/io.hpp"
#include "uois/parallel.hpp"
#include "uois/pipeline.hpp"
#include "uois/random.hpp"
#include "uois/scenegen.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <set>

namespace uois::app {
namespace {

using nlohmann::json;

std::string scene_dir_name(int index, int view)
{
    char buf[32];
    if (view == 0)
        std::snprintf(buf, sizeof buf, "scene_%04d", index);
    else
        std::snprintf(buf, sizeof buf, "scene_%04d_v%d", index, view);
    return buf;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw io::DataError(path.string() + ": cannot write");
}

Raster<std::uint8_t> mask_png(const BinaryMask& m) { return m.cast<std::uint8_t>() * std::uint8_t(255); }

// Stable across runs and platforms.
std::uint64_t name_hash(const std::string& name)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : name)
        h = (h ^ ch) * 1099511628211ull;
    return h;
}

json box_json(const CropBox& b) { return {{"row0", b.row0}, {"col0", b.col0}, {"row1", b.row1}, {"col1", b.col1}, {"size", b.size}}; }

json prf_json(const PRF& p) { return {{"precision", p.precision}, {"recall", p.recall}, {"f", p.fmeasure}}; }

// Depth noise draws from streams above 2^62 so they never meet scene streams.
constexpr std::uint64_t kNoiseStreamBase = 1ull << 62;

DensePrediction predict_scene(const Config& config, const io::SceneData& scene, const OrganizedPointCloud<double>& cloud, const fs::path& dir)
{
    if (config.predictor.kind == PredictorKind::Cached) {
        const auto dirs = io::directions_from_field(io::read_field(dir / io::kDirectionsFile));
        const auto probs = io::semantic_from_field(io::read_field(dir / io::kProbsFile));
        return {probs, dirs};
    }
    if (!scene.labels)
        throw io::DataError((dir / io::kLabelFile).string() + ": required by the oracle predictor");
    const std::uint64_t seed = Rng(config.seed, name_hash(scene.name)).next_u64();
    return OraclePredictor(*scene.labels, config.predictor.direction_noise_deg, config.predictor.label_flip_prob, seed).predict(cloud);
}

template <typename Fn>
BatchOutcome for_each_scene(const std::vector<std::string>& names, int workers, Fn&& fn)
{
    std::vector<std::string> errors(names.size());
    parallel_for(names.size(), workers, [&](std::size_t i) {
        try {
            fn(i);
        } catch (const Error& e) {
            errors[i] = names[i] + ": " + e.what();
        }
    });
    BatchOutcome out;
    for (auto& e : errors) {
        if (e.empty())
            ++out.processed;
        else
            out.failures.push_back(std::move(e));
    }
    return out;
}

}  // namespace

void gen_scenes(const Config& config, const fs::path& out)
{
    fs::create_directories(out);
    const SceneConfig& cfg = config.scene;
    const auto camera = PinholeCamera<double>::from_vertical_fov(cfg.grid(), cfg.vertical_fov_deg);
    io::write_camera(out / io::kCameraFile, camera);
    parallel_for(std::size_t(config.scene_count), config.workers, [&](std::size_t i) {
        Rng rng = scene_rng(cfg, i);
        const auto views = generate_views(cfg, rng);
        for (std::size_t v = 0; v < views.size(); ++v) {
            const RenderedView& view = views[v];
            const fs::path dir = out / scene_dir_name(int(i), int(v));
            fs::create_directories(dir);
            Raster<double> depth = view.depth;
            BinaryMask valid = view.valid;
            if (config.depth_noise) {
                Rng noise_rng(cfg.rng_seed, kNoiseStreamBase + i * views.size() + v);
                const auto noisy = apply_depth_noise(backproject(view.depth, view.valid, view.camera), config.noise, noise_rng);
                depth = noisy.depth();
                valid = noisy.valid() && depth > 0;
            }
            io::write_png(dir / io::kRgbFile, view.rgb);
            io::write_png(dir / io::kDepthFile, io::depth_to_mm(depth, valid));
            io::write_png(dir / io::kLabelFile, io::labels_to_png(view.instances));
            io::write_png(dir / io::kSemanticFile, view.semantic().labels());
            json pose;
            pose["position"] = {view.pose.position.x(), view.pose.position.y(), view.pose.position.z()};
            for (int r = 0; r < 3; ++r)
                pose["rotation"].push_back({view.pose.rotation(r, 0), view.pose.rotation(r, 1), view.pose.rotation(r, 2)});
            write_text(dir / io::kPoseFile, pose.dump(2) + "\n");
        }
    });
}

BatchOutcome segment_dataset(const Config& config, const SegmentOptions& options)
{
    const auto camera = io::read_camera(options.data / io::kCameraFile);
    const auto names = io::list_scenes(options.data, io::kDepthFile);
    const auto params = config.segment_params(camera.grid());
    fs::create_directories(options.out);
    return for_each_scene(names, config.workers, [&](std::size_t i) {
        const std::string& name = names[i];
        const fs::path dir = options.data / name;
        const auto scene = io::read_scene(options.data, name, camera);
        const auto cloud = backproject(scene.depth, scene.valid, camera);
        InstanceLabelMap result = segment_prediction(predict_scene(config, scene, cloud, dir), scene.valid, params).instances;

        const fs::path out_dir = options.out / name;
        fs::create_directories(out_dir);
        if (options.write_crops) {
            if (!scene.rgb)
                throw io::DataError((dir / io::kRgbFile).string() + ": required for crops");
            json index = json::array();
            const auto pairs = refine_pairs(result, *scene.rgb, config.pad_frac);
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                const std::string stem = "crop_" + std::to_string(k);
                io::write_png(out_dir / (stem + "_rgb.png"), pairs[k].rgb_crop);
                io::write_png(out_dir / (stem + "_mask.png"), mask_png(pairs[k].mask_crop));
                index.push_back({{"instance", int(k) + kFirstInstanceId}, {"crop_box", box_json(pairs[k].crop_box)}});
            }
            write_text(out_dir / "crops.json", index.dump(2) + "\n");
        }
        if (options.refined_masks) {
            std::vector<BinaryMask> refined;
            std::vector<CropBox> boxes;
            for (const auto& [id, mask] : instance_masks(result)) {
                const fs::path file = *options.refined_masks / name / ("mask_" + std::to_string(id - kFirstInstanceId) + ".png");
                const auto raw = io::read_png8(file);
                if (raw.rows() != kRefineSize || raw.cols() != kRefineSize)
                    throw io::DataError(file.string() + ": expected " + std::to_string(kRefineSize) + "x" + std::to_string(kRefineSize));
                refined.push_back(raw > 0);
                boxes.push_back(crop_box(mask, config.pad_frac));
            }
            result = paste_refined(refined, boxes, result);
        }

        io::write_png(out_dir / io::kLabelFile, io::labels_to_png(result));
    });
}

EvaluateOutcome evaluate_dirs(const Config& config, const fs::path& pred, const fs::path& gt)
{
    if (!fs::is_directory(gt))
        throw io::DataError(gt.string() + ": not a directory");
    if (!fs::is_directory(pred))
        throw io::DataError(pred.string() + ": not a directory");
    const auto gt_names = io::list_scenes(gt, io::kLabelFile);
    const auto pred_names = io::list_scenes(pred, io::kLabelFile);
    const std::set<std::string> have_pred(pred_names.begin(), pred_names.end());
    const std::set<std::string> have_gt(gt_names.begin(), gt_names.end());

    EvaluateOutcome out;
    std::vector<std::string> pairs;
    for (const auto& n : gt_names)
        (have_pred.count(n) ? pairs : out.missing).push_back(n);
    for (const auto& n : pred_names)
        if (!have_gt.count(n))
            out.missing.push_back(n);
    std::sort(out.missing.begin(), out.missing.end());

    std::vector<ImageScores> scores(pairs.size());
    std::vector<std::string> errors(pairs.size());
    parallel_for(pairs.size(), config.workers, [&](std::size_t i) {
        const auto p = io::labels_from_png(io::read_png16(pred / pairs[i] / io::kLabelFile));
        const auto g = io::labels_from_png(io::read_png16(gt / pairs[i] / io::kLabelFile));
        if (!(p.grid() == g.grid()))
            throw io::DataError(pairs[i] + ": prediction and ground truth differ in size");
        scores[i] = evaluate_image(p, g, config.slack_for(g.grid()), pairs[i]);
    });
    out.report = aggregate(std::move(scores), config.averaging);
    return out;
}

std::string summary_json(const EvaluateOutcome& outcome)
{
    json j;
    j["images"] = outcome.report.images.size();
    j["averaging"] = outcome.report.averaging == Averaging::Pixel ? "pixel" : "image";
    j["overlap"] = prf_json(outcome.report.overlap);
    j["boundary"] = prf_json(outcome.report.boundary);
    j["missing"] = outcome.missing;
    return j.dump(2) + "\n";
}

void write_evaluation(const EvaluateOutcome& outcome, const fs::path& out)
{
    fs::create_directories(out);
    std::ofstream csv(out / "scores.csv");
    write_csv(csv, outcome.report);
    if (!csv)
        throw io::DataError((out / "scores.csv").string() + ": cannot write");
    write_text(out / "summary.json", summary_json(outcome));
}

BatchOutcome augment_dataset(const Config& config, const fs::path& data, const fs::path& out)
{
    const auto camera = io::read_camera(data / io::kCameraFile);
    const auto names = io::list_scenes(data, io::kLabelFile);
    fs::create_directories(out);

    // Instance counts first so sample ids do not depend on scheduling.
    std::vector<int> counts(names.size(), 0);
    auto outcome = for_each_scene(names, config.workers, [&](std::size_t i) {
        counts[i] = io::labels_from_png(io::read_png16(data / names[i] / io::kLabelFile)).num_instances();
    });
    if (!outcome.failures.empty())
        return outcome;
    std::vector<std::size_t> first(names.size() + 1, 0);
    for (std::size_t i = 0; i < names.size(); ++i)
        first[i + 1] = first[i] + std::size_t(counts[i]) * std::size_t(config.samples_per_instance);

    std::vector<json> entries(first.back());
    outcome = for_each_scene(names, config.workers, [&](std::size_t i) {
        const auto scene = io::read_scene(data, names[i], camera);
        if (!scene.rgb)
            throw io::DataError((data / names[i] / io::kRgbFile).string() + ": required for refinement pairs");
        std::size_t id = first[i];
        for (const auto& [instance, mask] : instance_masks(*scene.labels)) {
            for (int s = 0; s < config.samples_per_instance; ++s, ++id) {
                Rng rng = Rng(config.seed).substream(id);
                const BinaryMask perturbed = augment_mask(mask, config.augment, rng);
                const RefinePair pair = make_refine_pair(*scene.rgb, mask, perturbed, config.pad_frac);
                char stem[32];
                std::snprintf(stem, sizeof stem, "%06zu", id);
                io::write_png(out / (std::string(stem) + "_rgb.png"), pair.rgb_crop);
                io::write_png(out / (std::string(stem) + "_input.png"), mask_png(pair.mask_crop));
                io::write_png(out / (std::string(stem) + "_target.png"), mask_png(*pair.gt_crop));
                entries[id] = {{"id", id},   {"scene", names[i]}, {"instance", instance}, {"seed", config.seed},
                               {"stream", id}, {"crop_box", box_json(pair.crop_box)}};
            }
        }
    });
    json index = json::array();
    for (auto& e : entries)
        if (!e.is_null())
            index.push_back(std::move(e));
    write_text(out / "index.json", index.dump(2) + "\n");
    return outcome;
}

}  // namespace uois::app
