// Acceptance run: one PASS/FAIL line per criterion, exit 3 on any failure.

#include "uois/app.hpp"
#include "uois/checks.hpp"
#include "uois/geometry.hpp"
#include "uois/pipeline.hpp"
#include "uois/scenegen.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

namespace {

using namespace uois;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeed = 2024;
constexpr int kScenes = 100;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

bool failed = false;

void report(int id, const std::string& name, bool ok, const std::string& detail)
{
    failed = failed || !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail << std::endl;
}

void report(int id, const std::string& name, const std::vector<CheckResult>& parts)
{
    bool ok = true;
    std::string detail;
    for (const auto& p : parts) {
        ok = ok && p.passed;
        const std::string label = parts.size() > 1 ? p.name + ": " : "";
        detail += (detail.empty() ? "" : "; ") + std::string(p.passed ? "" : "FAILED ") + label + p.detail;
    }
    report(id, name, ok, detail);
}

Config base_config()
{
    Config c;
    c.seed = kSeed;
    c.scene.rng_seed = kSeed;
    c.augment.rng_seed = kSeed;
    c.scene_count = kScenes;
    c.workers = 1;
    return c;
}

app::EvaluateOutcome segment_and_score(const Config& config, const fs::path& data, const fs::path& out)
{
    const auto seg = app::segment_dataset(config, {data, out, std::nullopt, false});
    if (!seg.failures.empty())
        throw Error("segment failed: " + seg.failures.front());
    return app::evaluate_dirs(config, out, data);
}

}  // namespace

int main()
{
    const fs::path root = fs::temp_directory_path() / ("uois_acceptance_" + std::to_string(std::random_device{}()));
    const fs::path data = root / "data";
    try {
        // 1. Oracle end-to-end.
        Config config = base_config();
        const auto t_gen = Clock::now();
        app::gen_scenes(config, data);
        const double gen_s = seconds_since(t_gen);
        const auto t0 = Clock::now();
        const auto oracle = segment_and_score(config, data, root / "oracle");
        const double pipeline_s = seconds_since(t0);
        const auto& rep = oracle.report;
        report(1, "oracle end-to-end", rep.images.size() == kScenes && rep.overlap.fmeasure >= 99.5 && rep.boundary.fmeasure >= 99.0 && pipeline_s <= 60.0,
               fmt("%.0f scenes, Overlap F %.3f (>= 99.5), Boundary F %.3f (>= 99.0), ", double(rep.images.size()), rep.overlap.fmeasure,
                   rep.boundary.fmeasure) +
                   fmt("segment + evaluate %.1f s (<= 60 s, 1 worker); generation %.1f s", pipeline_s, gen_s));

        // 2. IMP efficacy under 10 degree direction noise and 2% label flips.
        Config noisy = config;
        noisy.predictor.direction_noise_deg = 10.0;
        noisy.predictor.label_flip_prob = 0.02;
        const auto with_imp = segment_and_score(noisy, data, root / "imp_on").report;
        noisy.imp.enabled = false;
        const auto without_imp = segment_and_score(noisy, data, root / "imp_off").report;
        const double gain = with_imp.boundary.fmeasure - without_imp.boundary.fmeasure;
        report(2, "IMP efficacy", gain >= 5.0,
               fmt("mean Boundary F %.2f with IMP vs %.2f without, gain %.2f (>= 5)", with_imp.boundary.fmeasure, without_imp.boundary.fmeasure, gain));

        // 3-7. Oracle equivalences and laws.
        report(3, "voting equivalence", {check_voting_equivalence(kSeed, 500, 64)});
        report(4, "gradient checks",
               {check_semantic_gradient(kSeed, 100), check_direction_gradient(kSeed, 100), check_rrn_gradient(kSeed, 100)});
        report(5, "metrics oracle", {check_hungarian(kSeed, 200), check_metric_fixtures()});
        report(6, "morphology laws", {check_morphology_laws(kSeed, 1000)});
        report(7, "augmentation contract", {check_augment_contract(kSeed, 1000)});

        // 8. Performance.
        SceneConfig ten = config.scene;
        ten.object_count_range = {10, 10};
        Rng rng = scene_rng(ten, 0);
        const RenderedView view = generate_scene(ten, rng);
        const auto cloud = backproject(view.depth, view.valid, view.camera);
        const auto params = config.segment_params(cloud.grid());
        double worst = 0;
        int found = 0;
        for (const auto& [noise, flips] : {std::pair{0.0, 0.0}, std::pair{10.0, 0.02}}) {
            const auto prediction = OraclePredictor(view.instances, noise, flips, kSeed).predict(cloud);
            const auto t = Clock::now();
            const auto seg = segment_prediction(prediction, cloud.valid(), params);
            worst = std::max(worst, seconds_since(t));
            if (noise == 0.0)
                found = seg.instances.num_instances();
        }
        Config four = config;
        four.workers = 4;
        const auto t_eval = Clock::now();
        const auto eval4 = app::evaluate_dirs(four, root / "oracle", data);
        const double eval_s = seconds_since(t_eval);
        report(8, "performance", worst <= 2.0 && eval_s <= 10.0 && eval4.report.images.size() == kScenes,
               fmt("voting + IMP on 640x480 with 10 objects (%.0f visible, %.0f found) %.2f s worst of clean/noisy (<= 2 s); ",
                   double(view.instances.num_instances()), double(found), worst) +
                   fmt("evaluate %.0f images with 4 workers %.2f s (<= 10 s)", double(eval4.report.images.size()), eval_s));

        // Paired per-scene comparison under direction noise alone.
        Config dir_noise = config;
        dir_noise.predictor.direction_noise_deg = 10.0;
        const auto paired_on = segment_and_score(dir_noise, data, root / "paired_on").report;
        dir_noise.imp.enabled = false;
        const auto paired_off = segment_and_score(dir_noise, data, root / "paired_off").report;
        int wins = 0;
        for (std::size_t i = 0; i < paired_on.images.size(); ++i)
            wins += paired_on.images[i].boundary.fmeasure >= paired_off.images[i].boundary.fmeasure;
        const double share = 100.0 * wins / double(paired_on.images.size());
        std::cout << (share >= 90.0 ? "PASS" : "FAIL") << " [paired] IMP per scene: Boundary F with IMP >= without on "
                  << fmt("%.0f%% of scenes (>= 90%%) at 10 degree noise", share) << std::endl;
        failed = failed || share < 90.0;
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
        failed = true;
    }
    fs::remove_all(root);
    return failed ? 3 : 0;
}
