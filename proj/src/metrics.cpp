#include "uois/metrics.hpp"

#include "uois/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace uois {

double pairwise_f(const BinaryMask& pred, const BinaryMask& gt)
{
    require_same_grid(ImageGrid::of(pred), ImageGrid::of(gt), "pairwise F");
    const long a = pred.count();
    const long b = gt.count();
    const long both = (pred && gt).count();
    if (a == 0 || b == 0 || both == 0)
        return 0.0;
    const double p = double(both) / a;
    const double r = double(both) / b;
    return 2 * p * r / (p + r);
}

namespace {

struct InstanceStats {
    std::vector<long> sizes;
    std::vector<BoundingBox> boxes;
};

InstanceStats instance_stats(const InstanceLabelMap& map)
{
    const int k = map.num_instances();
    InstanceStats s{std::vector<long>(std::size_t(k), 0), std::vector<BoundingBox>(std::size_t(k))};
    for (auto& b : s.boxes)
        b = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
    const auto& l = map.labels();
    for (int r = 0; r < l.rows(); ++r) {
        for (int c = 0; c < l.cols(); ++c) {
            const int id = l(r, c);
            if (id < kFirstInstanceId)
                continue;
            const auto i = std::size_t(id - kFirstInstanceId);
            ++s.sizes[i];
            auto& b = s.boxes[i];
            b.row0 = std::min(b.row0, r);
            b.col0 = std::min(b.col0, c);
            b.row1 = std::max(b.row1, r);
            b.col1 = std::max(b.col1, c);
        }
    }
    return s;
}

}  // namespace

Eigen::MatrixXd pairwise_f_matrix(const InstanceLabelMap& pred, const InstanceLabelMap& gt)
{
    require_same_grid(pred.grid(), gt.grid(), "pairwise F matrix");
    const int m = pred.num_instances();
    const int n = gt.num_instances();
    Eigen::MatrixXd inter = Eigen::MatrixXd::Zero(m, n);
    std::vector<long> ps(std::size_t(m), 0), gs(std::size_t(n), 0);
    const auto& pl = pred.labels();
    const auto& gl = gt.labels();
    for (Eigen::Index i = 0; i < pl.size(); ++i) {
        const int p = pl.data()[i] - kFirstInstanceId;
        const int g = gl.data()[i] - kFirstInstanceId;
        if (p >= 0)
            ++ps[std::size_t(p)];
        if (g >= 0)
            ++gs[std::size_t(g)];
        if (p >= 0 && g >= 0)
            inter(p, g) += 1;
    }
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(m, n);
    for (int p = 0; p < m; ++p) {
        for (int g = 0; g < n; ++g) {
            if (inter(p, g) == 0)
                continue;
            const double prec = inter(p, g) / double(ps[std::size_t(p)]);
            const double rec = inter(p, g) / double(gs[std::size_t(g)]);
            f(p, g) = 2 * prec * rec / (prec + rec);
        }
    }
    return f;
}

std::vector<int> hungarian_max(const Eigen::MatrixXd& score)
{
    if (score.rows() != score.cols())
        throw Error("hungarian: score matrix must be square");
    const int n = int(score.rows());
    // Shortest augmenting paths with potentials, minimizing -score; 1-based with a virtual column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(std::size_t(n + 1), 0.0), v(std::size_t(n + 1), 0.0);
    std::vector<int> match(std::size_t(n + 1), 0), way(std::size_t(n + 1), 0);
    for (int row = 1; row <= n; ++row) {
        match[0] = row;
        int j0 = 0;
        std::vector<double> minv(std::size_t(n + 1), inf);
        std::vector<char> used(std::size_t(n + 1), 0);
        do {
            used[std::size_t(j0)] = 1;
            const int i0 = match[std::size_t(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[std::size_t(j)])
                    continue;
                const double cur = -score(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
                if (cur < minv[std::size_t(j)]) {
                    minv[std::size_t(j)] = cur;
                    way[std::size_t(j)] = j0;
                }
                if (minv[std::size_t(j)] < delta) {
                    delta = minv[std::size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[std::size_t(j)]) {
                    u[std::size_t(match[std::size_t(j)])] += delta;
                    v[std::size_t(j)] -= delta;
                } else {
                    minv[std::size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[std::size_t(j0)] != 0);
        do {
            const int j1 = way[std::size_t(j0)];
            match[std::size_t(j0)] = match[std::size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(std::size_t(n), -1);
    for (int j = 1; j <= n; ++j)
        assignment[std::size_t(match[std::size_t(j)] - 1)] = j - 1;
    return assignment;
}

Matching match_instances(const InstanceLabelMap& pred, const InstanceLabelMap& gt)
{
    const Eigen::MatrixXd f = pairwise_f_matrix(pred, gt);
    const int m = int(f.rows());
    const int n = int(f.cols());
    const int size = std::max(m, n);
    Eigen::MatrixXd square = Eigen::MatrixXd::Zero(size, size);
    square.topLeftCorner(m, n) = f;
    const auto assignment = hungarian_max(square);

    Matching out;
    std::vector<char> gt_used(std::size_t(n), 0);
    for (int p = 0; p < m; ++p) {
        const int g = assignment[std::size_t(p)];
        if (g < n) {
            out.pairs.emplace_back(p + kFirstInstanceId, g + kFirstInstanceId);
            gt_used[std::size_t(g)] = 1;
        } else {
            out.unmatched_pred.push_back(p + kFirstInstanceId);
        }
    }
    for (int g = 0; g < n; ++g)
        if (!gt_used[std::size_t(g)])
            out.unmatched_gt.push_back(g + kFirstInstanceId);
    return out;
}

PRF PRF::from(double precision, double recall)
{
    const double f = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    return {precision, recall, f};
}

PRF PrfCounts::prf(bool pred_empty, bool gt_empty) const
{
    if (pred_empty && gt_empty)
        return {100, 100, 100};
    if (pred_empty || gt_empty)
        return {0, 0, 0};
    const double p = precision_total > 0 ? 100 * precision_hits / precision_total : 0.0;
    const double r = recall_total > 0 ? 100 * recall_hits / recall_total : 0.0;
    return PRF::from(p, r);
}

int default_slack_radius(const ImageGrid& grid) { return std::max(1, static_cast<int>(std::lround(0.0075 * grid.diagonal()))); }

PrfCounts overlap_counts(const InstanceLabelMap& pred, const InstanceLabelMap& gt, const Matching& matching)
{
    require_same_grid(pred.grid(), gt.grid(), "overlap metrics");
    const auto ps = instance_stats(pred);
    const auto gs = instance_stats(gt);
    PrfCounts counts;
    for (long s : ps.sizes)
        counts.precision_total += double(s);
    for (long s : gs.sizes)
        counts.recall_total += double(s);
    const auto& pl = pred.labels();
    const auto& gl = gt.labels();
    for (const auto& [p, g] : matching.pairs) {
        const auto& pb = ps.boxes[std::size_t(p - kFirstInstanceId)];
        long both = 0;
        for (int r = pb.row0; r <= pb.row1; ++r)
            for (int c = pb.col0; c <= pb.col1; ++c)
                both += pl(r, c) == p && gl(r, c) == g;
        counts.precision_hits += double(both);
        counts.recall_hits += double(both);
    }
    return counts;
}

namespace {

BoundingBox grow(const BoundingBox& b, int margin, const ImageGrid& grid)
{
    return {std::max(0, b.row0 - margin), std::max(0, b.col0 - margin), std::min(grid.height() - 1, b.row1 + margin),
            std::min(grid.width() - 1, b.col1 + margin)};
}

BoundingBox unite(const BoundingBox& a, const BoundingBox& b)
{
    return {std::min(a.row0, b.row0), std::min(a.col0, b.col0), std::max(a.row1, b.row1), std::max(a.col1, b.col1)};
}

// Instance mask restricted to `box`. Boxes keep a one-pixel margin around the
// instance unless clipped by the image, so crop edges act like image edges.
BinaryMask crop_instance(const InstanceLabelMap& map, int id, const BoundingBox& box)
{
    return map.labels().block(box.row0, box.col0, box.height(), box.width()) == id;
}

BinaryMask slack(const BinaryMask& boundary, int radius)
{
    return radius > 0 ? dilate(boundary, StructuringElement::disk(radius)) : boundary;
}

}  // namespace

PrfCounts boundary_counts(const InstanceLabelMap& pred, const InstanceLabelMap& gt, const Matching& matching, int slack_radius)
{
    require_same_grid(pred.grid(), gt.grid(), "boundary metrics");
    if (slack_radius < 0)
        throw Error("boundary metrics: slack radius must be nonnegative");
    const ImageGrid& grid = pred.grid();
    const auto ps = instance_stats(pred);
    const auto gs = instance_stats(gt);
    PrfCounts counts;
    for (int i = 0; i < pred.num_instances(); ++i) {
        const auto box = grow(ps.boxes[std::size_t(i)], 1, grid);
        counts.precision_total += double(inner_boundary(crop_instance(pred, i + kFirstInstanceId, box)).count());
    }
    for (int j = 0; j < gt.num_instances(); ++j) {
        const auto box = grow(gs.boxes[std::size_t(j)], 1, grid);
        counts.recall_total += double(inner_boundary(crop_instance(gt, j + kFirstInstanceId, box)).count());
    }
    for (const auto& [p, g] : matching.pairs) {
        // Zero-overlap pairs score nothing.
        const auto& pb = ps.boxes[std::size_t(p - kFirstInstanceId)];
        if (!(pred.labels().block(pb.row0, pb.col0, pb.height(), pb.width()) == p &&
              gt.labels().block(pb.row0, pb.col0, pb.height(), pb.width()) == g)
                 .any())
            continue;
        const auto box = grow(unite(ps.boxes[std::size_t(p - kFirstInstanceId)], gs.boxes[std::size_t(g - kFirstInstanceId)]), slack_radius + 1, grid);
        const BinaryMask bp = inner_boundary(crop_instance(pred, p, box));
        const BinaryMask bg = inner_boundary(crop_instance(gt, g, box));
        counts.precision_hits += double((bp && slack(bg, slack_radius)).count());
        counts.recall_hits += double((slack(bp, slack_radius) && bg).count());
    }
    return counts;
}

PRF overlap_prf(const InstanceLabelMap& pred, const InstanceLabelMap& gt)
{
    return overlap_counts(pred, gt, match_instances(pred, gt)).prf(pred.num_instances() == 0, gt.num_instances() == 0);
}

PRF boundary_prf(const InstanceLabelMap& pred, const InstanceLabelMap& gt, int slack_radius)
{
    return boundary_counts(pred, gt, match_instances(pred, gt), slack_radius).prf(pred.num_instances() == 0, gt.num_instances() == 0);
}

ImageScores evaluate_image(const InstanceLabelMap& pred, const InstanceLabelMap& gt, int slack_radius, std::string image_id)
{
    const Matching matching = match_instances(pred, gt);
    ImageScores s;
    s.image_id = std::move(image_id);
    s.pred_empty = pred.num_instances() == 0;
    s.gt_empty = gt.num_instances() == 0;
    s.overlap_counts = overlap_counts(pred, gt, matching);
    s.boundary_counts = boundary_counts(pred, gt, matching, slack_radius);
    s.overlap = s.overlap_counts.prf(s.pred_empty, s.gt_empty);
    s.boundary = s.boundary_counts.prf(s.pred_empty, s.gt_empty);
    return s;
}

ScoreReport aggregate(std::vector<ImageScores> images, Averaging averaging)
{
    ScoreReport report;
    report.images = std::move(images);
    report.averaging = averaging;
    if (report.images.empty())
        return report;
    if (averaging == Averaging::PerImage) {
        const double n = double(report.images.size());
        for (const auto& s : report.images) {
            report.overlap.precision += s.overlap.precision / n;
            report.overlap.recall += s.overlap.recall / n;
            report.overlap.fmeasure += s.overlap.fmeasure / n;
            report.boundary.precision += s.boundary.precision / n;
            report.boundary.recall += s.boundary.recall / n;
            report.boundary.fmeasure += s.boundary.fmeasure / n;
        }
        return report;
    }
    PrfCounts o, b;
    bool pred_empty = true, gt_empty = true;
    for (const auto& s : report.images) {
        for (auto [dst, src] : {std::pair{&o, &s.overlap_counts}, std::pair{&b, &s.boundary_counts}}) {
            dst->precision_hits += src->precision_hits;
            dst->precision_total += src->precision_total;
            dst->recall_hits += src->recall_hits;
            dst->recall_total += src->recall_total;
        }
        pred_empty = pred_empty && s.pred_empty;
        gt_empty = gt_empty && s.gt_empty;
    }
    report.overlap = o.prf(pred_empty, gt_empty);
    report.boundary = b.prf(pred_empty, gt_empty);
    return report;
}

void write_csv(std::ostream& out, const ScoreReport& report)
{
    out << "image,overlap_precision,overlap_recall,overlap_f,boundary_precision,boundary_recall,boundary_f\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& s : report.images)
        out << s.image_id << ',' << s.overlap.precision << ',' << s.overlap.recall << ',' << s.overlap.fmeasure << ',' << s.boundary.precision << ','
            << s.boundary.recall << ',' << s.boundary.fmeasure << '\n';
}

}  // namespace uois
