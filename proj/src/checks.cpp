#include "uois/checks.hpp"

#include "uois/augment.hpp"
#include "uois/geometry.hpp"
#include "uois/losses.hpp"
#include "uois/metrics.hpp"
#include "uois/morphology.hpp"
#include "uois/pipeline.hpp"
#include "uois/random.hpp"
#include "uois/scenegen.hpp"
#include "uois/voting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace uois {
namespace {

using Probs = ProbArray<double>;

constexpr double kFdStep = 1e-5;
constexpr double kGradTol = 1e-5;
constexpr double kPerfectTol = 1e-9;

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

int uniform_int(Rng& rng, int lo, int hi) { return int(rng.uniform_int(lo, hi)); }

BinaryMask random_mask(Rng& rng, int h, int w, double density)
{
    BinaryMask m(h, w);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = rng.bernoulli(density);
    return m;
}

void paint_ellipse(Raster<std::int32_t>& labels, double cr, double cc, double ar, double ac, std::int32_t id)
{
    for (int r = 0; r < labels.rows(); ++r)
        for (int c = 0; c < labels.cols(); ++c) {
            const double y = (r - cr) / ar;
            const double x = (c - cc) / ac;
            if (x * x + y * y <= 1.0)
                labels(r, c) = id;
        }
}

// Table with a background strip on top, then occluding ellipses.
InstanceLabelMap random_scene(Rng& rng, int h, int w, int count, double min_radius, double max_radius)
{
    Raster<std::int32_t> l = Raster<std::int32_t>::Constant(h, w, kTableLabel);
    l.topRows(h / 6).setConstant(kBackgroundLabel);
    for (int k = 0; k < count; ++k) {
        const double ar = rng.uniform(min_radius, max_radius);
        const double ac = rng.uniform(min_radius, max_radius);
        paint_ellipse(l, rng.uniform(0, h - 1), rng.uniform(0, w - 1), ar, ac, kFirstInstanceId + k);
    }
    return InstanceLabelMap::compacted(std::move(l));
}

Probs random_simplex(Rng& rng, Eigen::Index n, int classes)
{
    Probs p(n, classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k < classes; ++k)
            p(i, k) = rng.uniform(0.05, 1.0);
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

Raster<double> unit_angle(const Raster<double>& angle, bool sine)
{
    return sine ? Raster<double>(angle.sin()) : Raster<double>(angle.cos());
}

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

template <typename Array>
Array numeric_gradient(Array x, const std::function<double(const Array&)>& f)
{
    Array g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double x0 = x.data()[i];
        x.data()[i] = x0 + kFdStep;
        const double up = f(x);
        x.data()[i] = x0 - kFdStep;
        const double down = f(x);
        x.data()[i] = x0;
        g.data()[i] = (up - down) / (2 * kFdStep);
    }
    return g;
}

template <typename A, typename B>
double max_rel_error(const A& analytic, const B& numeric)
{
    double worst = 0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i)
        worst = std::max(worst, rel_error(analytic.data()[i], numeric.data()[i]));
    return worst;
}

CheckResult gradient_result(std::string name, int trials, double worst, double perfect)
{
    const bool ok = worst < kGradTol && std::abs(perfect) <= kPerfectTol;
    return {std::move(name), ok,
            std::to_string(trials) + " trials, max relative error " + sci(worst) + " (tol " + sci(kGradTol) + "), loss at perfect prediction " +
                sci(perfect)};
}

// Scales one gradient so the check must notice.
template <typename Array>
void corrupt(Array& grad)
{
    grad *= 1.01;
}

DirectionField<double> random_unit_field(Rng& rng, int h, int w)
{
    Raster<double> a(h, w);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a.data()[i] = rng.uniform(0, 2 * std::numbers::pi);
    return DirectionField<double>(unit_angle(a, true), unit_angle(a, false));
}

// Mix of exact bin edges, diagonal/axis directions, and arbitrary angles.
DirectionField<double> random_edge_field(Rng& rng, int h, int w, int bins)
{
    Raster<double> dr(h, w), dc(h, w);
    for (Eigen::Index i = 0; i < dr.size(); ++i) {
        double a;
        switch (uniform_int(rng, 0, 2)) {
        case 0:
            a = 2 * std::numbers::pi * uniform_int(rng, 0, bins - 1) / bins;
            break;
        case 1:
            a = std::numbers::pi / 4 * uniform_int(rng, 0, 7);
            break;
        default:
            a = rng.uniform(0, 2 * std::numbers::pi);
        }
        dr.data()[i] = std::sin(a);
        dc.data()[i] = std::cos(a);
    }
    dr = (dr.abs() < 1e-15).select(0.0, dr);
    dc = (dc.abs() < 1e-15).select(0.0, dc);
    return DirectionField<double>(dr, dc);
}

DirectionField<double> rotate_field(const DirectionField<double>& dirs, Rng& rng, double sigma_deg)
{
    Raster<double> dr = dirs.drow();
    Raster<double> dc = dirs.dcol();
    for (Eigen::Index i = 0; i < dr.size(); ++i) {
        const double a = rng.normal(0.0, sigma_deg) * std::numbers::pi / 180.0;
        const double y = dr.data()[i];
        const double x = dc.data()[i];
        dr.data()[i] = std::cos(a) * y - std::sin(a) * x;
        dc.data()[i] = std::sin(a) * y + std::cos(a) * x;
    }
    return DirectionField<double>(dr, dc, dirs.valid());
}

// Breadth-first labeling in discovery order.
Raster<std::int32_t> flood_fill(const BinaryMask& m, Connectivity conn, int& count)
{
    Raster<std::int32_t> lab = Raster<std::int32_t>::Constant(m.rows(), m.cols(), -1);
    count = 0;
    const int span = conn == Connectivity::Eight ? 1 : 0;
    for (int y = 0; y < m.rows(); ++y)
        for (int x = 0; x < m.cols(); ++x) {
            if (!m(y, x) || lab(y, x) >= 0)
                continue;
            std::deque<Pixel> queue{{y, x}};
            lab(y, x) = count;
            while (!queue.empty()) {
                const Pixel p = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dy == 0 && dx == 0) || (dy != 0 && dx != 0 && !span))
                            continue;
                        const int yy = p.row + dy, xx = p.col + dx;
                        if (yy >= 0 && xx >= 0 && yy < m.rows() && xx < m.cols() && m(yy, xx) && lab(yy, xx) < 0) {
                            lab(yy, xx) = count;
                            queue.push_back({yy, xx});
                        }
                    }
            }
            ++count;
        }
    return lab;
}

// Same partition into the same number of parts, with consistent sizes.
bool same_components(const BinaryMask& m, Connectivity conn)
{
    int count = 0;
    const auto expected = flood_fill(m, conn, count);
    const auto got = label_components(m, conn);
    if (int(got.sizes.size()) != count)
        return false;
    std::map<int, int> fwd, back;
    std::vector<long> sizes(got.sizes.size(), 0);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const int a = expected.data()[i];
        const int b = got.labels.data()[i];
        if ((a < 0) != (b < 0))
            return false;
        if (a < 0)
            continue;
        if (fwd.emplace(a, b).first->second != b || back.emplace(b, a).first->second != a)
            return false;
        ++sizes[std::size_t(b)];
    }
    return std::equal(sizes.begin(), sizes.end(), got.sizes.begin());
}

double exhaustive_best(const Eigen::MatrixXd& f)
{
    std::vector<int> perm(std::size_t(f.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0;
    do {
        double total = 0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            total += f(Eigen::Index(i), perm[i]);
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool prf_equals(const PRF& got, double p, double r, double f, double tol)
{
    return std::abs(got.precision - p) <= tol && std::abs(got.recall - r) <= tol && std::abs(got.fmeasure - f) <= tol;
}

}  // namespace

CheckResult check_semantic_gradient(std::uint64_t seed, int trials, GradientFault fault)
{
    Rng rng(seed, 1);
    double worst = 0, perfect = 0;
    for (int t = 0; t < trials; ++t) {
        Raster<std::uint8_t> l(8, 8);
        for (Eigen::Index i = 0; i < l.size(); ++i)
            l.data()[i] = std::uint8_t(uniform_int(rng, 0, kNumSemanticClasses - 1));
        const SemanticLabels gt(l);
        const Probs p = random_simplex(rng, l.size(), kNumSemanticClasses);
        auto analytic = semantic_loss(p, gt).grad;
        if (fault == GradientFault::Semantic)
            corrupt(analytic);
        const auto numeric = numeric_gradient<Probs>(p, [&](const Probs& x) { return semantic_loss(x, gt).value; });
        worst = std::max(worst, max_rel_error(analytic, numeric));
        perfect = std::max(perfect, std::abs(semantic_loss(SemanticProbs<double>::one_hot(gt), gt).value));
    }
    return gradient_result("semantic loss gradient", trials, worst, perfect);
}

CheckResult check_direction_gradient(std::uint64_t seed, int trials, GradientFault fault)
{
    Rng rng(seed, 2);
    double worst = 0, perfect = 0;
    for (int t = 0; t < trials; ++t) {
        const auto map = random_scene(rng, 8, 8, uniform_int(rng, 0, 4), 1, 4);
        const auto gt = gt_direction_field(map);
        const auto pred = random_unit_field(rng, 8, 8);
        auto r = direction_loss(pred, gt, map);
        if (fault == GradientFault::Direction) {
            corrupt(r.grad_drow);
            corrupt(r.grad_dcol);
        }
        const auto nr = numeric_gradient<Raster<double>>(pred.drow(), [&](const Raster<double>& x) {
            return direction_loss<double>(x, pred.dcol(), gt, map).value;
        });
        const auto nc = numeric_gradient<Raster<double>>(pred.dcol(), [&](const Raster<double>& x) {
            return direction_loss<double>(pred.drow(), x, gt, map).value;
        });
        worst = std::max({worst, max_rel_error(r.grad_drow, nr), max_rel_error(r.grad_dcol, nc)});
        perfect = std::max(perfect, std::abs(direction_loss(gt, gt, map).value));
    }
    return gradient_result("direction loss gradient", trials, worst, perfect);
}

CheckResult check_rrn_gradient(std::uint64_t seed, int trials, GradientFault fault)
{
    Rng rng(seed, 3);
    double worst = 0, perfect = 0;
    for (int t = 0; t < trials; ++t) {
        const BinaryMask gt = random_mask(rng, 8, 8, rng.uniform(0.1, 0.9));
        const Probs p = random_simplex(rng, gt.size(), 2);
        auto analytic = rrn_loss(p, gt).grad;
        if (fault == GradientFault::Rrn)
            corrupt(analytic);
        const auto numeric = numeric_gradient<Probs>(p, [&](const Probs& x) { return rrn_loss(x, gt).value; });
        worst = std::max(worst, max_rel_error(analytic, numeric));

        Probs exact(gt.size(), 2);
        for (Eigen::Index i = 0; i < gt.size(); ++i)
            exact.row(i) << (gt.data()[i] ? 0.0 : 1.0), (gt.data()[i] ? 1.0 : 0.0);
        perfect = std::max(perfect, std::abs(rrn_loss(exact, gt).value));
    }
    return gradient_result("refinement loss gradient", trials, worst, perfect);
}

CheckResult check_voting_equivalence(std::uint64_t seed, int grids, int max_side)
{
    Rng rng(seed, 4);
    const int min_side = std::min(8, max_side);
    int with_instances = 0;
    for (int g = 0; g < grids; ++g) {
        const int h = uniform_int(rng, min_side, max_side);
        const int w = uniform_int(rng, min_side, max_side);
        const double max_r = std::max(2.0, std::min(h, w) / 3.0);
        const auto map = random_scene(rng, h, w, uniform_int(rng, 0, 6), 1.5, max_r);
        VotingParams params = VotingParams::defaults_for(map.grid());
        params.explain_away = g % 4 != 3;
        params.score_threshold = rng.uniform(0.02, 0.3);
        params.min_votes = uniform_int(rng, 1, 10);
        DirectionField<double> dirs = g % 2 == 0 ? rotate_field(gt_direction_field(map), rng, rng.uniform(0.0, 20.0))
                                                 : random_edge_field(rng, h, w, params.num_bins);
        const auto se = center_scores(map.semantic(), dirs, params, VotingMethod::Exact);
        const auto sf = center_scores(map.semantic(), dirs, params, VotingMethod::Fast);
        if (!(se.votes == sf.votes).all() || !(se.covered_bins == sf.covered_bins).all())
            return {"voting fast == exact", false, "grid " + std::to_string(g) + " (" + std::to_string(h) + "x" + std::to_string(w) + ") vote counts differ"};
        const auto exact = hough_vote(map.semantic(), dirs, params, VotingMethod::Exact);
        const auto fast = hough_vote(map.semantic(), dirs, params, VotingMethod::Fast);
        if (!(exact.labels() == fast.labels()).all())
            return {"voting fast == exact", false, "grid " + std::to_string(g) + " (" + std::to_string(h) + "x" + std::to_string(w) + ") differs"};
        with_instances += exact.num_instances() > 0;
    }
    return {"voting fast == exact", true,
            std::to_string(grids) + " grids up to " + std::to_string(max_side) + "x" + std::to_string(max_side) + ", " + std::to_string(with_instances) +
                " with instances, vote rasters equal on all"};
}

CheckResult check_morphology_laws(std::uint64_t seed, int masks)
{
    Rng rng(seed, 5);
    auto fail = [](int t, const char* law) { return CheckResult{"morphology laws", false, std::string(law) + " fails on mask " + std::to_string(t)}; };
    for (int t = 0; t < masks; ++t) {
        const int h = uniform_int(rng, 1, 40);
        const int w = uniform_int(rng, 1, 40);
        BinaryMask m = random_mask(rng, h, w, rng.uniform(0.05, 0.95));
        if (uniform_int(rng, 0, 1) && h > 4 && w > 4) {
            Raster<std::int32_t> blob = Raster<std::int32_t>::Zero(h, w);
            const double ar = rng.uniform(1, std::max(1.5, h / 2.0 - 1));
            const double ac = rng.uniform(1, std::max(1.5, w / 2.0 - 1));
            paint_ellipse(blob, rng.uniform(0, h - 1), rng.uniform(0, w - 1), ar, ac, 1);
            m = m || (blob == 1);
        }
        const StructuringElement se(uniform_int(rng, 0, 1) ? ElementShape::Disk : ElementShape::Square, uniform_int(rng, 1, 4));
        const BinaryMask e = erode(m, se), d = dilate(m, se), o = open(m, se), c = close(m, se);
        if ((e && !m).any())
            return fail(t, "erosion anti-extensivity");
        if ((m && !d).any())
            return fail(t, "dilation extensivity");
        if ((o && !m).any())
            return fail(t, "opening anti-extensivity");
        if ((m && !c).any())
            return fail(t, "closing extensivity");
        if (!(open(o, se) == o).all())
            return fail(t, "opening idempotence");
        if (!(close(c, se) == c).all())
            return fail(t, "closing idempotence");
        if (!same_components(m, Connectivity::Four) || !same_components(m, Connectivity::Eight))
            return fail(t, "flood-fill component equivalence");
    }
    return {"morphology laws", true, std::to_string(masks) + " masks, 4- and 8-connected components match flood fill"};
}

CheckResult check_hungarian(std::uint64_t seed, int cases)
{
    Rng rng(seed, 6);
    for (int t = 0; t < cases; ++t) {
        const int n = uniform_int(rng, 1, 6);
        Eigen::MatrixXd s(n, n);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            s.data()[i] = uniform_int(rng, 0, 3) == 0 ? 0.0 : rng.uniform();
        const auto a = hungarian_max(s);
        std::vector<int> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> ids(static_cast<std::size_t>(n));
        std::iota(ids.begin(), ids.end(), 0);
        double total = 0;
        if (sorted == ids)
            for (int i = 0; i < n; ++i)
                total += s(i, a[std::size_t(i)]);
        if (sorted != ids || std::abs(total - exhaustive_best(s)) > 1e-12)
            return {"hungarian == exhaustive", false, "case " + std::to_string(t) + " (" + std::to_string(n) + " instances)"};
    }
    return {"hungarian == exhaustive", true, std::to_string(cases) + " cases with 1-6 instances"};
}

CheckResult check_metric_fixtures()
{
    const std::string name = "metric fixtures";
    Raster<std::int32_t> gt_l = Raster<std::int32_t>::Ones(20, 20);
    gt_l.block(2, 2, 8, 8).setConstant(2);
    gt_l.block(12, 12, 6, 6).setConstant(3);
    const InstanceLabelMap gt(gt_l);
    if (!prf_equals(overlap_prf(gt, gt), 100, 100, 100, 0) || !prf_equals(boundary_prf(gt, gt, 2), 100, 100, 100, 0))
        return {name, false, "identical maps are not 100/100/100"};

    Raster<std::int32_t> single = Raster<std::int32_t>::Ones(20, 20);
    single.block(2, 2, 8, 8).setConstant(2);
    Raster<std::int32_t> half = Raster<std::int32_t>::Ones(20, 20);
    half.block(2, 2, 8, 4).setConstant(2);
    const PRF h = overlap_prf(InstanceLabelMap(half), InstanceLabelMap(single));
    if (!prf_equals(h, 100, 50, 200.0 / 3.0, 1e-12))
        return {name, false, "half overlap gives " + std::to_string(h.precision) + "/" + std::to_string(h.recall) + "/" + std::to_string(h.fmeasure)};

    BinaryMask a = BinaryMask::Zero(10, 10), b = BinaryMask::Zero(10, 10);
    a.block(2, 2, 4, 4).setConstant(true);
    b.block(2, 4, 4, 4).setConstant(true);
    if (pairwise_f(a, b) != 0.5)
        return {name, false, "shifted square pairwise F is " + std::to_string(pairwise_f(a, b))};
    return {name, true, "identical 100/100/100, half overlap 100/50/66.7, shifted square F 0.5"};
}

CheckResult check_augment_contract(std::uint64_t seed, int runs)
{
    const std::string name = "augmentation contract";
    Rng shapes(seed, 7);
    AugmentConfig all_on;
    all_on.apply_probs = {1, 1, 1, 1};
    AugmentConfig all_off;
    all_off.apply_probs = {0, 0, 0, 0};
    const AugmentConfig defaults;
    int changed = 0;
    for (int i = 0; i < runs; ++i) {
        const int h = uniform_int(shapes, 16, 64);
        const int w = uniform_int(shapes, 16, 64);
        Raster<std::int32_t> blob = Raster<std::int32_t>::Zero(h, w);
        const double ar = shapes.uniform(1.5, h / 3.0);
        const double ac = shapes.uniform(1.5, w / 3.0);
        paint_ellipse(blob, shapes.uniform(0, h - 1), shapes.uniform(0, w - 1), ar, ac, 1);
        blob(uniform_int(shapes, 0, h - 1), uniform_int(shapes, 0, w - 1)) = 1;
        const BinaryMask mask = blob == 1;
        const AugmentConfig& cfg = i % 2 ? all_on : defaults;

        Rng a = Rng(seed, 8).substream(std::uint64_t(i) + (1ull << 32));
        Rng b = a;
        const BinaryMask out = augment_mask(mask, cfg, a);
        if (out.rows() != h || out.cols() != w || !out.any())
            return {name, false, "run " + std::to_string(i) + " returned an empty or resized mask"};
        if (!(augment_mask(mask, cfg, b) == out).all())
            return {name, false, "run " + std::to_string(i) + " is not reproducible"};
        Rng c = a;
        if (!(augment_mask(mask, all_off, c) == mask).all())
            return {name, false, "run " + std::to_string(i) + " changes the mask with all probabilities 0"};
        changed += !(out == mask).all();
    }
    return {name, true, std::to_string(runs) + " runs nonempty and reproducible, " + std::to_string(changed) + " changed the mask"};
}

CheckResult check_determinism(std::uint64_t seed)
{
    const std::string name = "determinism";
    SceneConfig cfg;
    cfg.rng_seed = seed;
    cfg.height = 120;
    cfg.width = 160;
    cfg.object_count_range = {3, 8};
    for (std::uint64_t index = 0; index < 3; ++index) {
        Rng r1 = scene_rng(cfg, index), r2 = scene_rng(cfg, index);
        const RenderedView a = generate_scene(cfg, r1);
        const RenderedView b = generate_scene(cfg, r2);
        bool same_rgb = true;
        for (int k = 0; k < 3; ++k)
            same_rgb = same_rgb && (a.rgb.channels[std::size_t(k)] == b.rgb.channels[std::size_t(k)]).all();
        if (!(a.depth == b.depth).all() || !(a.instances.labels() == b.instances.labels()).all() || !same_rgb)
            return {name, false, "scene " + std::to_string(index) + " differs between runs"};

        const auto cloud = backproject(a.depth, a.valid, a.camera);
        Rng n1(seed, 100 + index), n2(seed, 100 + index);
        if (apply_depth_noise(cloud, NoiseConfig{}, n1).xyz() != apply_depth_noise(cloud, NoiseConfig{}, n2).xyz())
            return {name, false, "depth noise on scene " + std::to_string(index) + " differs between runs"};

        const OraclePredictor noisy(a.instances, 10.0, 0.02, seed + index);
        const auto params = SegmentParams::defaults_for(cloud.grid());
        const auto s1 = segment(cloud, noisy, params);
        const auto s2 = segment(cloud, noisy, params);
        if (!(s1.instances.labels() == s2.instances.labels()).all())
            return {name, false, "segmentation of scene " + std::to_string(index) + " differs between runs"};
    }
    return {name, true, "scene generation, depth noise, noisy segmentation repeat bit-identically"};
}

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options)
{
    const std::uint64_t s = options.seed;
    return {
        check_semantic_gradient(s, 100, options.fault),
        check_direction_gradient(s, 100, options.fault),
        check_rrn_gradient(s, 100, options.fault),
        check_voting_equivalence(s, 500, 64),
        check_morphology_laws(s, 1000),
        check_hungarian(s, 200),
        check_metric_fixtures(),
        check_augment_contract(s, 200),
        check_determinism(s),
    };
}

std::string format_report(const std::vector<CheckResult>& results)
{
    std::ostringstream out;
    for (const auto& r : results)
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    return out.str();
}

}  // namespace uois
