#include "uois/geometry.hpp"
#include "uois/losses.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <functional>

namespace uois {
namespace {

using testing::Rng;
using Probs = ProbArray<double>;

constexpr double kStep = 1e-5;
constexpr double kRelTol = 1e-5;

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

// Central difference of f with respect to every entry of x.
template <typename Array>
Array numeric_gradient(Array x, const std::function<double(const Array&)>& f)
{
    Array g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double x0 = x.data()[i];
        x.data()[i] = x0 + kStep;
        const double up = f(x);
        x.data()[i] = x0 - kStep;
        const double down = f(x);
        x.data()[i] = x0;
        g.data()[i] = (up - down) / (2 * kStep);
    }
    return g;
}

Probs random_simplex(Rng& rng, Eigen::Index n, int classes)
{
    Probs p(n, classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k < classes; ++k)
            p(i, k) = testing::uniform_real(rng, 0.05, 1.0);
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

SemanticLabels random_semantic(Rng& rng, int h, int w, int classes)
{
    Raster<std::uint8_t> l(h, w);
    for (Eigen::Index i = 0; i < l.size(); ++i)
        l.data()[i] = std::uint8_t(testing::uniform_int(rng, 0, classes - 1));
    return SemanticLabels(l, classes);
}

DirectionField<double> random_unit_field(Rng& rng, int h, int w)
{
    Raster<double> dr(h, w), dc(h, w);
    for (Eigen::Index i = 0; i < dr.size(); ++i) {
        const double a = testing::uniform_real(rng, 0, 2 * M_PI);
        dr.data()[i] = std::sin(a);
        dc.data()[i] = std::cos(a);
    }
    return DirectionField<double>(dr, dc);
}

TEST(SemanticWeights, InverseClassFrequencySumsToOne)
{
    Raster<std::uint8_t> l = Raster<std::uint8_t>::Zero(4, 4);
    l.block(0, 0, 1, 4).setConstant(1);
    l(3, 3) = 2;
    const auto w = semantic_weights<double>(SemanticLabels(l));
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(w(3, 3), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(w(0, 0), 1.0 / 12.0);
    EXPECT_DOUBLE_EQ(w(1, 0), 1.0 / 33.0);
}

TEST(SemanticWeights, AbsentClassCarriesNoWeight)
{
    const Raster<std::uint8_t> l = Raster<std::uint8_t>::Ones(3, 5);
    const auto w = semantic_weights<double>(SemanticLabels(l));
    EXPECT_TRUE((w == 1.0 / 15.0).all());
}

TEST(SemanticLoss, PerfectPredictionIsZero)
{
    Rng rng(41);
    const auto gt = random_semantic(rng, 8, 8, 3);
    const auto r = semantic_loss(SemanticProbs<double>::one_hot(gt), gt);
    EXPECT_NEAR(r.value, 0.0, 1e-9);
}

TEST(SemanticLoss, UniformPredictionIsLogClasses)
{
    Rng rng(42);
    for (int classes : {2, 3}) {
        const auto gt = random_semantic(rng, 7, 9, classes);
        const Probs p = Probs::Constant(63, classes, 1.0 / classes);
        EXPECT_NEAR(semantic_loss(p, gt).value, std::log(double(classes)), 1e-12);
    }
    EXPECT_NEAR(semantic_loss(Probs(Probs::Constant(12, 3, 1.0 / 3)), SemanticLabels(Raster<std::uint8_t>::Zero(3, 4))).value, 1.0986, 1e-4);
}

TEST(SemanticLoss, ZeroProbabilityIsClamped)
{
    const SemanticLabels gt(Raster<std::uint8_t>::Zero(1, 2));
    Probs p(2, 3);
    p << 0, 1, 0, 1, 0, 0;
    const auto r = semantic_loss(p, gt);
    EXPECT_NEAR(r.value, 0.5 * -std::log(1e-12), 1e-9);
    EXPECT_TRUE(std::isfinite(r.grad(0, 0)));
}

TEST(SemanticLoss, GradientMatchesFiniteDifferences)
{
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const auto gt = random_semantic(rng, 8, 8, 3);
        const Probs p = random_simplex(rng, 64, 3);
        const auto analytic = semantic_loss(p, gt).grad;
        const auto numeric = numeric_gradient<Probs>(p, [&](const Probs& x) { return semantic_loss(x, gt).value; });
        for (Eigen::Index i = 0; i < p.size(); ++i)
            ASSERT_LT(rel_error(analytic.data()[i], numeric.data()[i]), kRelTol) << "trial " << trial << " entry " << i;
    }
}

TEST(SemanticLoss, NonNegativeAndInvariantToUpsampling)
{
    Rng rng(44);
    for (int trial = 0; trial < 20; ++trial) {
        const int h = testing::uniform_int(rng, 2, 9);
        const int w = testing::uniform_int(rng, 2, 9);
        const auto gt = random_semantic(rng, h, w, 3);
        const Probs p = random_simplex(rng, h * w, 3);
        const double v = semantic_loss(p, gt).value;
        EXPECT_GE(v, 0.0);

        Raster<std::uint8_t> up(2 * h, 2 * w);
        Probs pu(4 * h * w, 3);
        for (int r = 0; r < 2 * h; ++r)
            for (int c = 0; c < 2 * w; ++c) {
                up(r, c) = gt(r / 2, c / 2);
                pu.row(r * 2 * w + c) = p.row((r / 2) * w + c / 2);
            }
        EXPECT_NEAR(semantic_loss(pu, SemanticLabels(up)).value, v, 1e-12);
    }
}

TEST(SemanticLoss, ShapeMismatchThrows)
{
    const SemanticLabels gt(Raster<std::uint8_t>::Zero(2, 2));
    EXPECT_THROW(semantic_loss(Probs(Probs::Constant(5, 3, 1.0 / 3)), gt), Error);
}

TEST(RrnLoss, PerfectUniformAndGradient)
{
    Rng rng(45);
    BinaryMask gt = testing::random_mask(rng, 8, 8, 0.4);
    Probs perfect(64, 2);
    for (Eigen::Index i = 0; i < 64; ++i)
        perfect.row(i) << (gt.data()[i] ? 0.0 : 1.0), (gt.data()[i] ? 1.0 : 0.0);
    EXPECT_NEAR(rrn_loss(perfect, gt).value, 0.0, 1e-9);
    EXPECT_NEAR(rrn_loss(Probs(Probs::Constant(64, 2, 0.5)), gt).value, std::log(2.0), 1e-12);

    for (int trial = 0; trial < 100; ++trial) {
        gt = testing::random_mask(rng, 8, 8, testing::uniform_real(rng, 0.1, 0.9));
        const Probs p = random_simplex(rng, 64, 2);
        const auto analytic = rrn_loss(p, gt).grad;
        const auto numeric = numeric_gradient<Probs>(p, [&](const Probs& x) { return rrn_loss(x, gt).value; });
        for (Eigen::Index i = 0; i < p.size(); ++i)
            ASSERT_LT(rel_error(analytic.data()[i], numeric.data()[i]), kRelTol) << "trial " << trial;
    }
}

TEST(DirectionWeights, PerInstanceAndBackgroundSums)
{
    Rng rng(46);
    const auto map = testing::random_scene(rng, 30, 40, 4, 3, 9);
    const auto w = direction_weights<double>(map);
    for (const auto& [id, mask] : instance_masks(map))
        EXPECT_NEAR(mask.select(w.alpha, 0.0).sum(), 1.0, 1e-12) << id;
    EXPECT_NEAR(w.alpha.sum(), map.num_instances(), 1e-10);
    EXPECT_NEAR(w.beta.sum(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(w.lambda_bt, 0.1);
}

TEST(DirectionLoss, PerfectPredictionIsZero)
{
    Rng rng(47);
    const auto map = testing::random_scene(rng, 24, 32, 3, 3, 8);
    const auto gt = gt_direction_field(map);
    EXPECT_NEAR(direction_loss(gt, gt, map).value, 0.0, 1e-9);
}

TEST(DirectionLoss, AntiParallelObjectsGiveInstanceCount)
{
    Raster<std::int32_t> l = Raster<std::int32_t>::Constant(12, 12, 2);
    l.rightCols(5).setConstant(3);
    l.bottomRows(3).setConstant(4);
    const InstanceLabelMap map(l);
    Rng rng(48);
    const auto gt = random_unit_field(rng, 12, 12);
    const DirectionField<double> flipped(Raster<double>(-gt.drow()), Raster<double>(-gt.dcol()));
    EXPECT_NEAR(direction_loss(flipped, gt, map).value, 3.0, 1e-12);
}

TEST(DirectionLoss, BackgroundTermUsesFixedDirection)
{
    const InstanceLabelMap map(Raster<std::int32_t>::Ones(3, 3));
    const auto gt = gt_direction_field(map);
    const auto down = DirectionField<double>::constant(map.grid(), -kFixedDirection);
    // 0.1/2 * sum beta * (1 - (-1)) = 0.1
    EXPECT_NEAR(direction_loss(down, gt, map).value, 0.1, 1e-12);
}

TEST(DirectionLoss, BoundedAndGradientMatchesFiniteDifferences)
{
    Rng rng(49);
    for (int trial = 0; trial < 100; ++trial) {
        const auto map = testing::random_scene(rng, 8, 8, testing::uniform_int(rng, 0, 4), 1, 4);
        const auto gt = gt_direction_field(map);
        const auto pred = random_unit_field(rng, 8, 8);
        const auto r = direction_loss(pred, gt, map);
        EXPECT_GE(r.value, 0.0);
        EXPECT_LE(r.value, map.num_instances() + 0.1 + 1e-12);

        const auto nr = numeric_gradient<Raster<double>>(pred.drow(), [&](const Raster<double>& x) {
            return direction_loss<double>(x, pred.dcol(), gt, map).value;
        });
        const auto nc = numeric_gradient<Raster<double>>(pred.dcol(), [&](const Raster<double>& x) {
            return direction_loss<double>(pred.drow(), x, gt, map).value;
        });
        for (Eigen::Index i = 0; i < nr.size(); ++i) {
            ASSERT_LT(rel_error(r.grad_drow.data()[i], nr.data()[i]), kRelTol) << "trial " << trial;
            ASSERT_LT(rel_error(r.grad_dcol.data()[i], nc.data()[i]), kRelTol) << "trial " << trial;
        }
    }
}

TEST(DirectionLoss, GridMismatchThrows)
{
    const InstanceLabelMap map(Raster<std::int32_t>::Ones(3, 3));
    const auto gt = gt_direction_field(map);
    const auto other = DirectionField<double>::constant(ImageGrid(3, 4), kFixedDirection);
    EXPECT_THROW(direction_loss(other, gt, map), Error);
}

TEST(TotalLoss, SumOfComponents)
{
    Rng rng(50);
    for (int trial = 0; trial < 20; ++trial) {
        const auto map = testing::random_scene(rng, 10, 12, 3, 2, 5);
        const auto gt_dirs = gt_direction_field(map);
        const SemanticProbs<double> probs(map.grid(), random_simplex(rng, 120, 3));
        const auto dirs = random_unit_field(rng, 10, 12);
        const auto t = total_loss(probs, dirs, map, gt_dirs);
        const double a = semantic_loss(probs.probs(), map.semantic()).value;
        const double b = direction_loss(dirs, gt_dirs, map).value;
        EXPECT_EQ(t.value, a + b);
        EXPECT_EQ(t.semantic.value, a);
        EXPECT_EQ(t.direction.value, b);
    }
    const auto map = testing::random_scene(rng, 10, 12, 3, 2, 5);
    const auto gt_dirs = gt_direction_field(map);
    EXPECT_NEAR(total_loss(SemanticProbs<double>::one_hot(map.semantic()), gt_dirs, map, gt_dirs).value, 0.0, 1e-9);
}

TEST(Losses, FloatInstantiation)
{
    const InstanceLabelMap map(Raster<std::int32_t>::Ones(2, 2));
    const SemanticLabels gt = map.semantic();
    const auto r = semantic_loss(ProbArray<float>(ProbArray<float>::Constant(4, 3, 1.0f / 3)), gt);
    EXPECT_NEAR(r.value, std::log(3.0f), 1e-6f);
}

}  // namespace
}  // namespace uois
