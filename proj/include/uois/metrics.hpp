#pragma once

// Overlap and boundary precision/recall/F-measure between predicted and
// ground-truth instance maps, on a one-to-one matching that maximizes the
// summed pairwise F-measure. Table and background are never scored.

#include "uois/core.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace uois {

/// F-measure of one predicted mask against one ground-truth mask, in [0, 1].
double pairwise_f(const BinaryMask& pred, const BinaryMask& gt);

/// Pairwise F for every (predicted, ground-truth) instance pair.
Eigen::MatrixXd pairwise_f_matrix(const InstanceLabelMap& pred, const InstanceLabelMap& gt);

/// Maximum-weight perfect matching on a square score matrix; returns the
/// column assigned to each row.
std::vector<int> hungarian_max(const Eigen::MatrixXd& score);

struct Matching {
    std::vector<std::pair<int, int>> pairs;  // (predicted id, ground-truth id)
    std::vector<int> unmatched_pred;
    std::vector<int> unmatched_gt;
};

Matching match_instances(const InstanceLabelMap& pred, const InstanceLabelMap& gt);

struct PRF {
    double precision = 0;
    double recall = 0;
    double fmeasure = 0;

    /// F from P and R (any scale), 0 when both are 0.
    static PRF from(double precision, double recall);
};

/// Raw sums behind one PRF, kept for micro averaging.
struct PrfCounts {
    double precision_hits = 0;
    double precision_total = 0;
    double recall_hits = 0;
    double recall_total = 0;

    /// P, R, F scaled to [0, 100] with the empty-map conventions.
    PRF prf(bool pred_empty, bool gt_empty) const;
};

/// max(1, round(0.0075 * diagonal)).
int default_slack_radius(const ImageGrid& grid);

PrfCounts overlap_counts(const InstanceLabelMap& pred, const InstanceLabelMap& gt, const Matching& matching);
PrfCounts boundary_counts(const InstanceLabelMap& pred, const InstanceLabelMap& gt, const Matching& matching, int slack_radius);

PRF overlap_prf(const InstanceLabelMap& pred, const InstanceLabelMap& gt);
PRF boundary_prf(const InstanceLabelMap& pred, const InstanceLabelMap& gt, int slack_radius);

struct ImageScores {
    std::string image_id;
    PRF overlap;
    PRF boundary;
    PrfCounts overlap_counts;
    PrfCounts boundary_counts;
    bool pred_empty = false;
    bool gt_empty = false;
};

/// One matching, both metric families.
ImageScores evaluate_image(const InstanceLabelMap& pred, const InstanceLabelMap& gt, int slack_radius, std::string image_id = {});

enum class Averaging { PerImage, Pixel };

struct ScoreReport {
    std::vector<ImageScores> images;
    PRF overlap;
    PRF boundary;
    Averaging averaging = Averaging::PerImage;
};

/// PerImage: unweighted mean of each number. Pixel: P/R/F of the summed counts.
ScoreReport aggregate(std::vector<ImageScores> images, Averaging averaging = Averaging::PerImage);

/// Header plus one row per image:
/// image,overlap_precision,overlap_recall,overlap_f,boundary_precision,boundary_recall,boundary_f
void write_csv(std::ostream& out, const ScoreReport& report);

}  // namespace uois
