#include "uois/app.hpp"
#include "uois/checks.hpp"
#include "uois/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using namespace uois;
using app::fs::path;

struct GlobalFlags {
    std::optional<path> config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool exact_voting = false;
    std::optional<int> slack_radius;
    std::optional<path> out;
};

class UsageError : public Error {
public:
    using Error::Error;
};

Config resolve_config(const GlobalFlags& flags)
{
    Config c;
    if (flags.config) {
        try {
            c = load_config(*flags.config);
        } catch (const Error& e) {
            throw io::DataError(e.what());
        }
    }
    if (flags.seed) {
        c.seed = *flags.seed;
        c.scene.rng_seed = *flags.seed;
        c.augment.rng_seed = *flags.seed;
    }
    if (flags.workers)
        c.workers = *flags.workers;
    if (flags.exact_voting)
        c.exact_voting = true;
    if (flags.slack_radius)
        c.slack_radius = *flags.slack_radius;
    try {
        c.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return c;
}

path require_out(const GlobalFlags& flags, const char* command)
{
    if (!flags.out)
        throw UsageError(std::string(command) + ": --out is required");
    return *flags.out;
}

int report_failures(const app::BatchOutcome& outcome, const char* verb)
{
    for (const auto& f : outcome.failures)
        std::cerr << "error: " << f << '\n';
    std::cerr << verb << ' ' << outcome.processed << " scene(s)";
    if (!outcome.failures.empty())
        std::cerr << ", " << outcome.failures.size() << " failed";
    std::cerr << '\n';
    return outcome.failures.empty() ? app::kExitOk : app::kExitData;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"Unseen object instance segmentation from depth"};
    cli.require_subcommand(1);

    GlobalFlags flags;
    cli.add_option("--config", flags.config, "JSON config; missing keys keep defaults");
    cli.add_option("--seed", flags.seed, "Seed for every random draw");
    cli.add_option("--workers", flags.workers, "Worker threads for per-image work");
    cli.add_flag("--exact-voting", flags.exact_voting, "Use the O(N^2) reference voting");
    cli.add_option("--slack-radius", flags.slack_radius, "Boundary match tolerance in pixels");
    cli.add_option("--out", flags.out, "Output directory");

    auto* gen = cli.add_subcommand("gen-scenes", "Render a synthetic tabletop dataset");
    std::optional<int> count;
    gen->add_option("--count", count, "Number of scenes (default scenes.count)");

    auto* seg = cli.add_subcommand("segment", "Segment every scene of a dataset");
    path seg_data;
    std::optional<path> refined;
    bool crops = false;
    seg->add_option("data", seg_data, "Dataset root")->required();
    seg->add_option("--refined-masks", refined, "Externally refined 224x224 crop masks, <dir>/<scene>/mask_<k>.png");
    seg->add_flag("--crops", crops, "Write refinement crops and crops.json per scene");

    auto* eval = cli.add_subcommand("evaluate", "Score predicted label maps against ground truth");
    path pred_dir, gt_dir;
    eval->add_option("pred", pred_dir, "Predicted dataset root")->required();
    eval->add_option("gt", gt_dir, "Ground-truth dataset root")->required();

    auto* aug = cli.add_subcommand("augment-gen", "Generate refinement training pairs");
    path aug_data;
    aug->add_option("data", aug_data, "Dataset root with rgb.png and label.png")->required();

    auto* check = cli.add_subcommand("selfcheck", "Run gradient, oracle and determinism checks");
    std::string inject;
    check->add_option("--inject-wrong-gradient", inject)->group("")->check(CLI::IsMember({"semantic", "direction", "rrn"}));

    for (auto* sub : {gen, seg, eval, aug, check})
        sub->fallthrough();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? app::kExitOk : app::kExitUsage;
    }

    try {
        Config config = resolve_config(flags);
        if (gen->parsed()) {
            if (count) {
                if (*count < 0)
                    throw UsageError("gen-scenes: --count must be >= 0");
                config.scene_count = *count;
            }
            app::gen_scenes(config, require_out(flags, "gen-scenes"));
            std::cerr << "wrote " << config.scene_count << " scene(s)\n";
            return app::kExitOk;
        }
        if (seg->parsed()) {
            app::SegmentOptions options{seg_data, require_out(flags, "segment"), refined, crops};
            return report_failures(app::segment_dataset(config, options), "segmented");
        }
        if (eval->parsed()) {
            const auto outcome = app::evaluate_dirs(config, pred_dir, gt_dir);
            if (outcome.report.images.empty()) {
                std::cerr << "error: no scene has both a prediction and ground truth\n";
                for (const auto& m : outcome.missing)
                    std::cerr << "missing: " << m << '\n';
                return app::kExitData;
            }
            if (flags.out)
                app::write_evaluation(outcome, *flags.out);
            std::cout << app::summary_json(outcome);
            for (const auto& m : outcome.missing)
                std::cerr << "missing, skipped: " << m << '\n';
            return outcome.missing.empty() ? app::kExitOk : app::kExitData;
        }
        if (aug->parsed())
            return report_failures(app::augment_dataset(config, aug_data, require_out(flags, "augment-gen")), "augmented");
        if (check->parsed()) {
            SelfcheckOptions options{config.seed, GradientFault::None};
            if (inject == "semantic")
                options.fault = GradientFault::Semantic;
            else if (inject == "direction")
                options.fault = GradientFault::Direction;
            else if (inject == "rrn")
                options.fault = GradientFault::Rrn;
            const auto results = run_selfcheck(options);
            std::cout << format_report(results);
            for (const auto& r : results)
                if (!r.passed)
                    return app::kExitCheck;
            return app::kExitOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return app::kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return app::kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return app::kExitData;
    }
    return app::kExitUsage;
}
