#pragma once

// Hough voting layer: per-pixel center directions + object mask -> instances.
//
// Angles are measured as atan2(drow, dcol) in [0, 2*pi) and split into M
// equal half-open bins [k * 2pi/M, (k+1) * 2pi/M).

#include "uois/core.hpp"

#include <vector>

namespace uois {

// How a pixel's votes become its center score.
//  - DirectionCoverage: fraction of the M direction bins from which at least
//    one object pixel points at it.
//  - PixelFraction: fraction of the other object pixels pointing at it.
enum class ScoreMode { DirectionCoverage, PixelFraction };

struct VotingParams {
    int num_bins = 60;
    ScoreMode score_mode = ScoreMode::DirectionCoverage;
    double score_threshold = 0.25;
    double nms_radius = 20.0;
    double assign_angle_tol_deg = 30.0;
    // Explain-away selection (see select_centers_explained).
    bool explain_away = true;
    int min_votes = 10;
    double explain_ratio = 0.1;

    void validate() const;

    // NMS radius scaled from 20 px at 640x480 to the grid's diagonal;
    // min_votes = max(10, 0.0005 * pixels).
    static VotingParams defaults_for(const ImageGrid& grid);
};

enum class VotingMethod { Exact, Fast };

struct CenterScores {
    Raster<std::int32_t> votes;         // voting pixels, object pixels only
    Raster<std::int32_t> covered_bins;  // distinct bins among those voters
    Raster<double> score;               // per VotingParams::score_mode; 0 off-object
};

/// Bin of a direction. Axis-aligned and diagonal directions are resolved
/// exactly so that bin(-v) == bin(v) + M/2 (mod M) for even M.
int direction_bin(double drow, double dcol, int num_bins);

/// Votes for every object pixel p: object pixels q != p whose predicted
/// direction falls in the same bin as the geometric direction q -> p.
/// `Exact` is the O(N^2) definition; `Fast` rasterizes each voter's angular
/// wedge row by row and is bit-identical in both counts.
CenterScores center_scores(const SemanticLabels& labels, const DirectionField<double>& dirs, const VotingParams& params,
                           VotingMethod method = VotingMethod::Fast);

/// Greedy NMS over pixels with a positive score >= threshold, in descending
/// score then (row, col) order.
std::vector<Pixel> select_centers(const CenterScores& scores, const VotingParams& params);

/// Greedy selection that discounts votes already accounted for. Candidates
/// pass the score threshold and have at least min_votes votes; they are
/// visited in descending votes then (row, col) order. A candidate outside
/// nms_radius of every kept center is kept when the voters for it that no
/// kept center explains number at least min_votes and at least
/// explain_ratio of its votes. A voter is explained by a center lying within
/// nms_radius of the voter's ray. `scores` must be center_scores of the same
/// inputs.
std::vector<Pixel> select_centers_explained(const SemanticLabels& labels, const DirectionField<double>& dirs, const CenterScores& scores,
                                            const VotingParams& params);

struct VotingResult {
    InstanceLabelMap instances;
    std::vector<Pixel> centers;  // centers[k] produced instance id k + 2
};

/// Assigns each object pixel to the nearest center within the angular
/// tolerance of its direction, or failing that to the center of least
/// angular deviation. Pixels without a valid direction take the nearest
/// center. Centers that win no pixels are dropped and ids compacted.
VotingResult assign_pixels_detailed(const SemanticLabels& labels, const DirectionField<double>& dirs, const std::vector<Pixel>& centers,
                                    const VotingParams& params);

inline InstanceLabelMap assign_pixels(const SemanticLabels& labels, const DirectionField<double>& dirs, const std::vector<Pixel>& centers,
                                      const VotingParams& params)
{
    return assign_pixels_detailed(labels, dirs, centers, params).instances;
}

VotingResult hough_vote_detailed(const SemanticLabels& labels, const DirectionField<double>& dirs, const VotingParams& params,
                                 VotingMethod method = VotingMethod::Fast);

inline InstanceLabelMap hough_vote(const SemanticLabels& labels, const DirectionField<double>& dirs, const VotingParams& params,
                                   VotingMethod method = VotingMethod::Fast)
{
    return hough_vote_detailed(labels, dirs, params, method).instances;
}

}  // namespace uois
