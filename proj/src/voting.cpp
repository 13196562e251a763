#include "uois/voting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace uois {

void VotingParams::validate() const
{
    if (num_bins < 4)
        throw Error("voting: num_bins must be >= 4");
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0))
        throw Error("voting: score_threshold must be in [0, 1]");
    if (!(nms_radius >= 1.0))
        throw Error("voting: nms_radius must be >= 1");
    if (!(assign_angle_tol_deg > 0.0 && assign_angle_tol_deg < 180.0))
        throw Error("voting: assign_angle_tol_deg must be in (0, 180)");
    if (min_votes < 0)
        throw Error("voting: min_votes must be >= 0");
    if (!(explain_ratio >= 0.0 && explain_ratio <= 1.0))
        throw Error("voting: explain_ratio must be in [0, 1]");
}

VotingParams VotingParams::defaults_for(const ImageGrid& grid)
{
    VotingParams p;
    p.nms_radius = std::max(1.0, 20.0 * grid.diagonal() / 800.0);
    p.min_votes = std::max(10, int(std::lround(0.0005 * double(grid.size()))));
    return p;
}

int direction_bin(double drow, double dcol, int num_bins)
{
    // Directions that are exact multiples of 45 degrees.
    int octant = -1;
    if (drow == 0.0)
        octant = dcol >= 0.0 ? 0 : 4;
    else if (dcol == 0.0)
        octant = drow > 0.0 ? 2 : 6;
    else if (std::abs(drow) == std::abs(dcol))
        octant = drow > 0.0 ? (dcol > 0.0 ? 1 : 3) : (dcol < 0.0 ? 5 : 7);
    if (octant >= 0)
        return (octant * num_bins) / 8;

    double a = std::atan2(drow, dcol);
    if (a < 0.0)
        a += 2.0 * std::numbers::pi;
    const int k = static_cast<int>(std::floor(a * (num_bins / (2.0 * std::numbers::pi))));
    return std::clamp(k, 0, num_bins - 1);
}

namespace {

struct ObjectPixels {
    std::vector<Pixel> all;
    std::vector<Pixel> voters;
    std::vector<int> voter_bins;
};

ObjectPixels collect(const SemanticLabels& labels, const DirectionField<double>& dirs, int num_bins)
{
    ObjectPixels out;
    const ImageGrid& grid = labels.grid();
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            if (!labels.is_object(r, c))
                continue;
            out.all.push_back({r, c});
            if (dirs.valid()(r, c)) {
                out.voters.push_back({r, c});
                out.voter_bins.push_back(direction_bin(dirs.drow()(r, c), dirs.dcol()(r, c), num_bins));
            }
        }
    }
    return out;
}

CenterScores finish(Raster<std::int32_t> votes, Raster<std::int32_t> covered, std::size_t object_count, const VotingParams& params)
{
    CenterScores out;
    out.score = Raster<double>::Zero(votes.rows(), votes.cols());
    if (params.score_mode == ScoreMode::DirectionCoverage) {
        out.score = covered.cast<double>() / double(params.num_bins);
    } else if (object_count > 1) {
        const double denom = double(object_count - 1);
        for (Eigen::Index i = 0; i < votes.size(); ++i)
            out.score.data()[i] = double(votes.data()[i]) / denom;
    }
    out.votes = std::move(votes);
    out.covered_bins = std::move(covered);
    return out;
}

CenterScores scores_exact(const SemanticLabels& labels, const DirectionField<double>& dirs, const VotingParams& params)
{
    const ImageGrid& grid = labels.grid();
    const int h = grid.height();
    const int w = grid.width();
    const auto px = collect(labels, dirs, params.num_bins);

    // Bin of every possible pixel offset, indexed (dr + h - 1, dc + w - 1).
    Raster<std::int16_t> offset_bins(2 * h - 1, 2 * w - 1);
    for (int dr = -(h - 1); dr <= h - 1; ++dr)
        for (int dc = -(w - 1); dc <= w - 1; ++dc)
            offset_bins(dr + h - 1, dc + w - 1) = static_cast<std::int16_t>(direction_bin(dr, dc, params.num_bins));

    Raster<std::int32_t> votes = Raster<std::int32_t>::Zero(h, w);
    Raster<std::int32_t> covered = Raster<std::int32_t>::Zero(h, w);
    std::vector<char> seen(static_cast<std::size_t>(params.num_bins));
    for (const Pixel& p : px.all) {
        std::int32_t count = 0;
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t j = 0; j < px.voters.size(); ++j) {
            const Pixel& q = px.voters[j];
            if (q == p)
                continue;
            if (offset_bins(p.row - q.row + h - 1, p.col - q.col + w - 1) == px.voter_bins[j]) {
                ++count;
                seen[std::size_t(px.voter_bins[j])] = 1;
            }
        }
        votes(p.row, p.col) = count;
        covered(p.row, p.col) = static_cast<std::int32_t>(std::count(seen.begin(), seen.end(), 1));
    }
    return finish(std::move(votes), std::move(covered), px.all.size(), params);
}

// Column-offset range of a bin's wedge on the rows above or below the apex.
struct WedgeRows {
    bool present = false;
    bool lo_infinite = false;
    bool hi_infinite = false;
    double lo_cot = 0.0;  // dc_lo = dr * lo_cot
    double hi_cot = 0.0;  // dc_hi = dr * hi_cot
};

struct BinWedge {
    WedgeRows below;  // dr > 0, angles in (0, pi)
    WedgeRows above;  // dr < 0, angles in (pi, 2 pi)
    bool right = false;  // dr == 0, dc > 0
    bool left = false;   // dr == 0, dc < 0
};

std::vector<BinWedge> bin_wedges(int num_bins)
{
    constexpr double pi = std::numbers::pi;
    std::vector<BinWedge> out(static_cast<std::size_t>(num_bins));
    for (int k = 0; k < num_bins; ++k) {
        const double t0 = 2.0 * pi * k / num_bins;
        const double t1 = 2.0 * pi * (k + 1) / num_bins;
        BinWedge& wedge = out[std::size_t(k)];
        {
            const double a = std::max(t0, 0.0);
            const double b = std::min(t1, pi);
            wedge.below.present = a < b;
            wedge.below.lo_infinite = b >= pi;
            wedge.below.hi_infinite = a <= 0.0;
            wedge.below.lo_cot = wedge.below.lo_infinite ? 0.0 : 1.0 / std::tan(b);
            wedge.below.hi_cot = wedge.below.hi_infinite ? 0.0 : 1.0 / std::tan(a);
        }
        {
            const double a = std::max(t0, pi);
            const double b = std::min(t1, 2.0 * pi);
            wedge.above.present = a < b;
            wedge.above.lo_infinite = a <= pi;
            wedge.above.hi_infinite = b >= 2.0 * pi;
            wedge.above.lo_cot = wedge.above.lo_infinite ? 0.0 : 1.0 / std::tan(a);
            wedge.above.hi_cot = wedge.above.hi_infinite ? 0.0 : 1.0 / std::tan(b);
        }
        wedge.right = direction_bin(0.0, 1.0, num_bins) == k;
        wedge.left = direction_bin(0.0, -1.0, num_bins) == k;
    }
    return out;
}

// Emits the column runs (r, c0, c1) of object-grid pixels whose offset from
// q falls in bin k. Columns within kEps of a wedge edge are decided by
// direction_bin itself; everything farther inside is at least ~1e-13 rad from
// any bin edge.
template <typename Emit>
void wedge_runs(const BinWedge& wedge, Pixel q, int k, int h, int w, int bins, Emit&& emit)
{
    constexpr double kEps = 1e-6;
    if (wedge.right && q.col + 1 < w)
        emit(q.row, q.col + 1, w - 1);
    if (wedge.left && q.col > 0)
        emit(q.row, 0, q.col - 1);

    auto scan = [&](const WedgeRows& rows, int r_begin, int r_end) {
        for (int r = r_begin; r < r_end; ++r) {
            const double dr = r - q.row;
            const double x_lo = rows.lo_infinite ? -std::numeric_limits<double>::infinity() : q.col + dr * rows.lo_cot;
            const double x_hi = rows.hi_infinite ? std::numeric_limits<double>::infinity() : q.col + dr * rows.hi_cot;
            int c0 = static_cast<int>(std::ceil(std::clamp(x_lo - kEps, -1.0, double(w))));
            int c1 = static_cast<int>(std::floor(std::clamp(x_hi + kEps, -1.0, double(w))));
            c0 = std::max(c0, 0);
            c1 = std::min(c1, w - 1);
            if (c0 > c1)
                continue;
            if (!rows.lo_infinite && c0 - x_lo <= kEps && direction_bin(dr, c0 - q.col, bins) != k)
                ++c0;
            if (c0 <= c1 && !rows.hi_infinite && x_hi - c1 <= kEps && direction_bin(dr, c1 - q.col, bins) != k)
                --c1;
            if (c0 <= c1)
                emit(r, c0, c1);
        }
    };
    if (wedge.below.present)
        scan(wedge.below, q.row + 1, h);
    if (wedge.above.present)
        scan(wedge.above, 0, q.row);
}

CenterScores scores_fast(const SemanticLabels& labels, const DirectionField<double>& dirs, const VotingParams& params)
{
    const ImageGrid& grid = labels.grid();
    const int h = grid.height();
    const int w = grid.width();
    const int bins = params.num_bins;
    const auto px = collect(labels, dirs, bins);
    const auto wedges = bin_wedges(bins);

    std::vector<std::vector<std::size_t>> by_bin(static_cast<std::size_t>(bins));
    for (std::size_t j = 0; j < px.voters.size(); ++j)
        by_bin[std::size_t(px.voter_bins[j])].push_back(j);

    // Row-wise difference array of one bin's votes.
    Raster<std::int32_t> diff(h, w + 1);
    auto add_run = [&](int r, int c0, int c1) {
        ++diff(r, c0);
        --diff(r, c1 + 1);
    };

    Raster<std::int32_t> votes = Raster<std::int32_t>::Zero(h, w);
    Raster<std::int32_t> covered = Raster<std::int32_t>::Zero(h, w);
    for (int k = 0; k < bins; ++k) {
        if (by_bin[std::size_t(k)].empty())
            continue;
        diff.setZero();
        for (const std::size_t j : by_bin[std::size_t(k)])
            wedge_runs(wedges[std::size_t(k)], px.voters[j], k, h, w, bins, add_run);

        for (int r = 0; r < h; ++r) {
            std::int32_t run = 0;
            for (int c = 0; c < w; ++c) {
                run += diff(r, c);
                if (run > 0 && labels.is_object(r, c)) {
                    votes(r, c) += run;
                    ++covered(r, c);
                }
            }
        }
    }
    return finish(std::move(votes), std::move(covered), px.all.size(), params);
}

}  // namespace

CenterScores center_scores(const SemanticLabels& labels, const DirectionField<double>& dirs, const VotingParams& params, VotingMethod method)
{
    require_same_grid(labels.grid(), dirs.grid(), "center_scores");
    params.validate();
    return method == VotingMethod::Exact ? scores_exact(labels, dirs, params) : scores_fast(labels, dirs, params);
}

std::vector<Pixel> select_centers(const CenterScores& scores, const VotingParams& params)
{
    params.validate();
    struct Candidate {
        double score;
        Pixel pixel;
    };
    std::vector<Candidate> candidates;
    for (int r = 0; r < scores.score.rows(); ++r) {
        for (int c = 0; c < scores.score.cols(); ++c) {
            const double s = scores.score(r, c);
            if (s > 0.0 && s >= params.score_threshold)
                candidates.push_back({s, {r, c}});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.pixel < b.pixel;
    });

    const double r2 = params.nms_radius * params.nms_radius;
    std::vector<Pixel> kept;
    for (const auto& cand : candidates) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Pixel& k) {
            const double dr = cand.pixel.row - k.row;
            const double dc = cand.pixel.col - k.col;
            return dr * dr + dc * dc <= r2;
        });
        if (!suppressed)
            kept.push_back(cand.pixel);
    }
    return kept;
}

std::vector<Pixel> select_centers_explained(const SemanticLabels& labels, const DirectionField<double>& dirs, const CenterScores& scores,
                                            const VotingParams& params)
{
    require_same_grid(labels.grid(), dirs.grid(), "select_centers_explained");
    params.validate();
    const ImageGrid& grid = labels.grid();
    const int h = grid.height();
    const int w = grid.width();

    struct Candidate {
        std::int32_t votes;
        Pixel pixel;
    };
    std::vector<Candidate> candidates;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double s = scores.score(r, c);
            if (s > 0.0 && s >= params.score_threshold && scores.votes(r, c) >= params.min_votes)
                candidates.push_back({scores.votes(r, c), {r, c}});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.votes != b.votes)
            return a.votes > b.votes;
        return a.pixel < b.pixel;
    });
    if (candidates.empty())
        return {};

    struct Voter {
        Pixel pixel;
        int bin;
        Eigen::Vector2d dir;
    };
    std::vector<Voter> open;
    const auto px = collect(labels, dirs, params.num_bins);
    for (std::size_t j = 0; j < px.voters.size(); ++j)
        open.push_back({px.voters[j], px.voter_bins[j], dirs(px.voters[j].row, px.voters[j].col)});

    // Fresh votes are counted one of two ways. Scanning the open voters costs
    // O(open) per candidate and suits few candidates. Tracking live counts
    // (initial votes minus the wedges of explained voters, as row-wise
    // differences) costs about O(voters * h) overall. Scan until the scans
    // would have paid for tracking, then switch.
    const auto wedges = bin_wedges(params.num_bins);
    Raster<std::int16_t> offset_bins;
    Raster<std::int32_t> live;
    Raster<std::int32_t> diff;
    std::vector<Voter> closed;
    bool tracking = false;
    const double scan_budget = double(open.size()) * h / 4.0;
    double scanned = 0.0;

    auto remove_run = [&](int r, int c0, int c1) {
        ++diff(r, c0);
        --diff(r, c1 + 1);
    };
    auto apply_closed = [&] {
        for (const Voter& v : closed)
            wedge_runs(wedges[std::size_t(v.bin)], v.pixel, v.bin, h, w, params.num_bins, remove_run);
        closed.clear();
        for (int r = 0; r < h; ++r) {
            std::int32_t run = 0;
            for (int c = 0; c < w; ++c) {
                run += diff(r, c);
                live(r, c) -= run;
            }
        }
        diff.setZero();
    };
    auto fresh_votes = [&](const Pixel& p) -> std::int32_t {
        if (!tracking && scanned + double(open.size()) > scan_budget) {
            tracking = true;
            live = scores.votes;
            diff = Raster<std::int32_t>::Zero(h, w + 1);
            apply_closed();
        }
        if (tracking)
            return live(p.row, p.col);
        if (offset_bins.size() == 0) {
            offset_bins.resize(2 * h - 1, 2 * w - 1);
            for (int dr = -(h - 1); dr <= h - 1; ++dr)
                for (int dc = -(w - 1); dc <= w - 1; ++dc)
                    offset_bins(dr + h - 1, dc + w - 1) = static_cast<std::int16_t>(direction_bin(dr, dc, params.num_bins));
        }
        scanned += double(open.size());
        std::int32_t n = 0;
        for (const Voter& v : open)
            if (v.pixel != p && offset_bins(p.row - v.pixel.row + h - 1, p.col - v.pixel.col + w - 1) == v.bin)
                ++n;
        return n;
    };

    const double r2 = params.nms_radius * params.nms_radius;
    std::vector<Pixel> kept;
    for (const auto& cand : candidates) {
        const Pixel p = cand.pixel;
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Pixel& k) {
            const double dr = p.row - k.row;
            const double dc = p.col - k.col;
            return dr * dr + dc * dc <= r2;
        });
        if (suppressed)
            continue;

        const std::int32_t fresh = fresh_votes(p);
        if (fresh < params.min_votes || fresh < params.explain_ratio * cand.votes)
            continue;

        kept.push_back(p);
        std::erase_if(open, [&](const Voter& v) {
            const Eigen::Vector2d to(p.row - v.pixel.row, p.col - v.pixel.col);
            const double along = to.dot(v.dir);
            const double across = to.x() * v.dir.y() - to.y() * v.dir.x();
            const bool explained = to.squaredNorm() <= r2 || (along > 0.0 && across * across <= r2);
            if (explained)
                closed.push_back(v);
            return explained;
        });
        if (tracking)
            apply_closed();
    }
    return kept;
}

VotingResult assign_pixels_detailed(const SemanticLabels& labels, const DirectionField<double>& dirs, const std::vector<Pixel>& centers,
                                    const VotingParams& params)
{
    require_same_grid(labels.grid(), dirs.grid(), "assign_pixels");
    params.validate();
    const ImageGrid& grid = labels.grid();
    const double cos_tol = std::cos(params.assign_angle_tol_deg * std::numbers::pi / 180.0);

    Raster<std::int32_t> raw = Raster<std::int32_t>::Zero(grid.height(), grid.width());
    std::vector<long> won(centers.size(), 0);
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            const int cls = labels(r, c);
            if (cls == int(SemanticClass::Table)) {
                raw(r, c) = kTableLabel;
                continue;
            }
            if (cls != int(SemanticClass::Object) || centers.empty())
                continue;

            const bool has_dir = dirs.valid()(r, c);
            const Eigen::Vector2d d = dirs(r, c);
            int nearest_pointed = -1;
            double nearest_d2 = std::numeric_limits<double>::infinity();
            int best_aligned = -1;
            double best_cos = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < centers.size(); ++i) {
                const Eigen::Vector2d v(centers[i].row - r, centers[i].col - c);
                const double d2 = v.squaredNorm();
                bool pointed = !has_dir || d2 == 0.0;
                double cos_angle = 1.0;
                if (!pointed) {
                    cos_angle = d.dot(v) / std::sqrt(d2);
                    pointed = cos_angle >= cos_tol;
                }
                if (pointed && d2 < nearest_d2) {
                    nearest_d2 = d2;
                    nearest_pointed = int(i);
                }
                if (cos_angle > best_cos) {
                    best_cos = cos_angle;
                    best_aligned = int(i);
                }
            }
            const int chosen = nearest_pointed >= 0 ? nearest_pointed : best_aligned;
            raw(r, c) = kFirstInstanceId + chosen;
            ++won[std::size_t(chosen)];
        }
    }

    std::vector<Pixel> kept;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (won[i] > 0)
            kept.push_back(centers[i]);
    }
    return {InstanceLabelMap::compacted(std::move(raw)), std::move(kept)};
}

VotingResult hough_vote_detailed(const SemanticLabels& labels, const DirectionField<double>& dirs, const VotingParams& params,
                                 VotingMethod method)
{
    const auto scores = center_scores(labels, dirs, params, method);
    const auto centers = params.explain_away ? select_centers_explained(labels, dirs, scores, params) : select_centers(scores, params);
    return assign_pixels_detailed(labels, dirs, centers, params);
}

}  // namespace uois
