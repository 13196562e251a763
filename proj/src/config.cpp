#include "uois/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace uois {
namespace {

using nlohmann::json;

template <typename T>
json opt(const std::optional<T>& v)
{
    return v ? json(*v) : json("auto");
}

template <typename T>
std::optional<T> get_opt(const json& j)
{
    if (j.is_string() && j.get<std::string>() == "auto")
        return std::nullopt;
    return j.get<T>();
}

template <typename E>
E get_enum(const json& j, std::initializer_list<std::pair<const char*, E>> names, const char* what)
{
    const auto s = j.get<std::string>();
    for (const auto& [name, value] : names)
        if (s == name)
            return value;
    throw Error(std::string("config: unknown ") + what + " '" + s + "'");
}

const char* score_mode_name(ScoreMode m) { return m == ScoreMode::DirectionCoverage ? "direction_coverage" : "pixel_fraction"; }
const char* shape_name(ElementShape s) { return s == ElementShape::Square ? "square" : "disk"; }

json to_json(const Config& c)
{
    const auto& v = c.voting;
    const auto& s = c.scene;
    const auto& a = c.augment;
    return {
        {"seed", c.seed},
        {"workers", c.workers},
        {"voting",
         {{"num_bins", v.num_bins},
          {"score_mode", score_mode_name(v.score_mode)},
          {"score_threshold", v.score_threshold},
          {"nms_radius", opt(c.nms_radius)},
          {"assign_angle_tol_deg", v.assign_angle_tol_deg},
          {"explain_away", v.explain_away},
          {"min_votes", opt(c.min_votes)},
          {"explain_ratio", v.explain_ratio},
          {"exact", c.exact_voting}}},
        {"imp",
         {{"enabled", c.imp.enabled},
          {"shape", shape_name(c.imp.shape)},
          {"open_radius", opt(c.imp.open_radius)},
          {"close_radius", opt(c.imp.close_radius)},
          {"connectivity", int(c.imp.connectivity)}}},
        {"predictor",
         {{"kind", c.predictor.kind == PredictorKind::Oracle ? "oracle" : "cached"},
          {"direction_noise_deg", c.predictor.direction_noise_deg},
          {"label_flip_prob", c.predictor.label_flip_prob}}},
        {"metrics", {{"slack_radius", opt(c.slack_radius)}, {"averaging", c.averaging == Averaging::PerImage ? "image" : "pixel"}}},
        {"scenes",
         {{"count", c.scene_count},
          {"object_count_range", s.object_count_range},
          {"camera_height_range", s.camera_height_range},
          {"camera_distance_range", s.camera_distance_range},
          {"camera_roll_range", s.camera_roll_range},
          {"target_spread", s.target_spread},
          {"vertical_fov_deg", s.vertical_fov_deg},
          {"height", s.height},
          {"width", s.width},
          {"table_half_extent", s.table_half_extent},
          {"floor_z", s.floor_z},
          {"max_depth", s.max_depth},
          {"box_half_size_range", s.box_half_size_range},
          {"sphere_radius_range", s.sphere_radius_range},
          {"cylinder_radius_range", s.cylinder_radius_range},
          {"cylinder_height_range", s.cylinder_height_range},
          {"max_footprint_overlap", s.max_footprint_overlap},
          {"stack_probability", s.stack_probability},
          {"placement_attempts", s.placement_attempts},
          {"views_per_scene", s.views_per_scene},
          {"depth_noise", c.depth_noise},
          {"noise",
           {{"gamma_shape", c.noise.gamma_shape},
            {"gamma_scale", c.noise.gamma_scale},
            {"gp_grid_downsample", c.noise.gp_grid_downsample},
            {"gp_sigma", c.noise.gp_sigma}}}}},
        {"augment",
         {{"samples_per_instance", c.samples_per_instance},
          {"pad_frac", c.pad_frac},
          {"translate_frac_range", a.translate_frac_range},
          {"rotate_deg_range", a.rotate_deg_range},
          {"addcut_radius_beta", a.addcut_radius_beta},
          {"addcut_radius_scale", a.addcut_radius_scale},
          {"morph_iters_range", a.morph_iters_range},
          {"morph_kernel_beta", a.morph_kernel_beta},
          {"morph_kernel_scale", a.morph_kernel_scale},
          {"ellipse_count_lambda", a.ellipse_count_lambda},
          {"ellipse_radius_gamma_shape", a.ellipse_radius_gamma_shape},
          {"ellipse_radius_gamma_scale", a.ellipse_radius_gamma_scale},
          {"apply_probs", a.apply_probs}}},
    };
}

Config from_json(const json& j)
{
    Config c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.workers = j.at("workers").get<int>();

    const json& v = j.at("voting");
    c.voting.num_bins = v.at("num_bins").get<int>();
    c.voting.score_mode = get_enum<ScoreMode>(
        v.at("score_mode"), {{"direction_coverage", ScoreMode::DirectionCoverage}, {"pixel_fraction", ScoreMode::PixelFraction}}, "score_mode");
    c.voting.score_threshold = v.at("score_threshold").get<double>();
    c.nms_radius = get_opt<double>(v.at("nms_radius"));
    c.voting.assign_angle_tol_deg = v.at("assign_angle_tol_deg").get<double>();
    c.voting.explain_away = v.at("explain_away").get<bool>();
    c.min_votes = get_opt<int>(v.at("min_votes"));
    c.voting.explain_ratio = v.at("explain_ratio").get<double>();
    c.exact_voting = v.at("exact").get<bool>();

    const json& m = j.at("imp");
    c.imp.enabled = m.at("enabled").get<bool>();
    c.imp.shape = get_enum<ElementShape>(m.at("shape"), {{"square", ElementShape::Square}, {"disk", ElementShape::Disk}}, "imp shape");
    c.imp.open_radius = get_opt<int>(m.at("open_radius"));
    c.imp.close_radius = get_opt<int>(m.at("close_radius"));
    const int conn = m.at("connectivity").get<int>();
    if (conn != 4 && conn != 8)
        throw Error("config: imp.connectivity must be 4 or 8");
    c.imp.connectivity = conn == 4 ? Connectivity::Four : Connectivity::Eight;

    const json& p = j.at("predictor");
    c.predictor.kind = get_enum<PredictorKind>(p.at("kind"), {{"oracle", PredictorKind::Oracle}, {"cached", PredictorKind::Cached}}, "predictor");
    c.predictor.direction_noise_deg = p.at("direction_noise_deg").get<double>();
    c.predictor.label_flip_prob = p.at("label_flip_prob").get<double>();

    const json& e = j.at("metrics");
    c.slack_radius = get_opt<int>(e.at("slack_radius"));
    c.averaging = get_enum<Averaging>(e.at("averaging"), {{"image", Averaging::PerImage}, {"pixel", Averaging::Pixel}}, "averaging");

    const json& s = j.at("scenes");
    c.scene_count = s.at("count").get<int>();
    s.at("object_count_range").get_to(c.scene.object_count_range);
    s.at("camera_height_range").get_to(c.scene.camera_height_range);
    s.at("camera_distance_range").get_to(c.scene.camera_distance_range);
    s.at("camera_roll_range").get_to(c.scene.camera_roll_range);
    c.scene.target_spread = s.at("target_spread").get<double>();
    c.scene.vertical_fov_deg = s.at("vertical_fov_deg").get<double>();
    c.scene.height = s.at("height").get<int>();
    c.scene.width = s.at("width").get<int>();
    s.at("table_half_extent").get_to(c.scene.table_half_extent);
    c.scene.floor_z = s.at("floor_z").get<double>();
    c.scene.max_depth = s.at("max_depth").get<double>();
    s.at("box_half_size_range").get_to(c.scene.box_half_size_range);
    s.at("sphere_radius_range").get_to(c.scene.sphere_radius_range);
    s.at("cylinder_radius_range").get_to(c.scene.cylinder_radius_range);
    s.at("cylinder_height_range").get_to(c.scene.cylinder_height_range);
    c.scene.max_footprint_overlap = s.at("max_footprint_overlap").get<double>();
    c.scene.stack_probability = s.at("stack_probability").get<double>();
    c.scene.placement_attempts = s.at("placement_attempts").get<int>();
    c.scene.views_per_scene = s.at("views_per_scene").get<int>();
    c.depth_noise = s.at("depth_noise").get<bool>();
    const json& n = s.at("noise");
    c.noise.gamma_shape = n.at("gamma_shape").get<double>();
    c.noise.gamma_scale = n.at("gamma_scale").get<double>();
    c.noise.gp_grid_downsample = n.at("gp_grid_downsample").get<int>();
    c.noise.gp_sigma = n.at("gp_sigma").get<double>();

    const json& a = j.at("augment");
    c.samples_per_instance = a.at("samples_per_instance").get<int>();
    c.pad_frac = a.at("pad_frac").get<double>();
    a.at("translate_frac_range").get_to(c.augment.translate_frac_range);
    a.at("rotate_deg_range").get_to(c.augment.rotate_deg_range);
    a.at("addcut_radius_beta").get_to(c.augment.addcut_radius_beta);
    c.augment.addcut_radius_scale = a.at("addcut_radius_scale").get<double>();
    a.at("morph_iters_range").get_to(c.augment.morph_iters_range);
    a.at("morph_kernel_beta").get_to(c.augment.morph_kernel_beta);
    c.augment.morph_kernel_scale = a.at("morph_kernel_scale").get<double>();
    c.augment.ellipse_count_lambda = a.at("ellipse_count_lambda").get<double>();
    c.augment.ellipse_radius_gamma_shape = a.at("ellipse_radius_gamma_shape").get<double>();
    c.augment.ellipse_radius_gamma_scale = a.at("ellipse_radius_gamma_scale").get<double>();
    a.at("apply_probs").get_to(c.augment.apply_probs);

    c.scene.rng_seed = c.seed;
    c.augment.rng_seed = c.seed;
    return c;
}

void reject_unknown(const json& user, const json& reference, const std::string& where)
{
    if (!user.is_object())
        throw Error("config: " + (where.empty() ? std::string("document") : where) + " must be an object");
    for (const auto& [key, value] : user.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        if (!reference.contains(key))
            throw Error("config: unknown key '" + path + "'");
        if (reference.at(key).is_object())
            reject_unknown(value, reference.at(key), path);
    }
}

}  // namespace

void Config::validate() const
{
    if (workers < 1)
        throw Error("config: workers must be at least 1");
    voting.validate();
    if (nms_radius && !(*nms_radius >= 1.0))
        throw Error("config: voting.nms_radius must be >= 1");
    if (min_votes && *min_votes < 0)
        throw Error("config: voting.min_votes must be >= 0");
    if ((imp.open_radius && *imp.open_radius < 1) || (imp.close_radius && *imp.close_radius < 1))
        throw Error("config: imp radii must be >= 1");
    if (!(predictor.direction_noise_deg >= 0.0))
        throw Error("config: predictor.direction_noise_deg must be >= 0");
    if (!(predictor.label_flip_prob >= 0.0 && predictor.label_flip_prob <= 1.0))
        throw Error("config: predictor.label_flip_prob must be in [0, 1]");
    if (slack_radius && *slack_radius < 0)
        throw Error("config: metrics.slack_radius must be >= 0");
    if (scene_count < 0)
        throw Error("config: scenes.count must be >= 0");
    scene.validate();
    noise.validate();
    augment.validate();
    if (samples_per_instance < 1)
        throw Error("config: augment.samples_per_instance must be >= 1");
    if (!(pad_frac >= 0.0))
        throw Error("config: augment.pad_frac must be >= 0");
}

SegmentParams Config::segment_params(const ImageGrid& grid) const
{
    SegmentParams p = SegmentParams::defaults_for(grid);
    const VotingParams scaled = VotingParams::defaults_for(grid);
    p.voting = voting;
    p.voting.nms_radius = nms_radius.value_or(scaled.nms_radius);
    p.voting.min_votes = min_votes.value_or(scaled.min_votes);
    p.method = exact_voting ? VotingMethod::Exact : VotingMethod::Fast;
    p.use_imp = imp.enabled;
    const int r = default_element(grid).radius();
    p.imp.open_element = StructuringElement(imp.shape, imp.open_radius.value_or(r));
    p.imp.close_element = StructuringElement(imp.shape, imp.close_radius.value_or(r));
    p.imp.connectivity = imp.connectivity;
    return p;
}

int Config::slack_for(const ImageGrid& grid) const { return slack_radius.value_or(default_slack_radius(grid)); }

Config config_from_json(const std::string& text)
{
    json user;
    try {
        user = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    const json defaults = to_json(Config{});
    reject_unknown(user, defaults, "");
    json merged = defaults;
    merged.merge_patch(user);
    Config c;
    try {
        c = from_json(merged);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return config_from_json(text.str());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string config_to_json(const Config& config) { return to_json(config).dump(2); }

}  // namespace uois
