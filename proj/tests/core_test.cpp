#include "uois/core.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace uois {
namespace {

using testing::Rng;

TEST(InstanceMasks, AllZerosHasNoInstances)
{
    InstanceLabelMap map(Raster<std::int32_t>::Zero(4, 5));
    EXPECT_EQ(map.num_instances(), 0);
    EXPECT_TRUE(instance_masks(map).empty());
}

TEST(InstanceMasks, SingleBlock)
{
    Raster<std::int32_t> l = Raster<std::int32_t>::Zero(6, 6);
    l.block(1, 2, 2, 2).setConstant(2);
    const auto masks = instance_masks(InstanceLabelMap(l));
    ASSERT_EQ(masks.size(), 1u);
    EXPECT_EQ(masks[0].first, 2);
    EXPECT_EQ(masks[0].second.count(), 4);
}

TEST(InstanceMasks, SeededThreeLabelsMatchPixelCounts)
{
    Rng rng(17);
    Raster<std::int32_t> l = Raster<std::int32_t>::Zero(10, 10);
    for (Eigen::Index i = 0; i < l.size(); ++i)
        l.data()[i] = testing::uniform_int(rng, 0, 4);
    // Every label must occur for the map to be valid.
    l(0, 0) = 2;
    l(0, 1) = 3;
    l(0, 2) = 4;
    const InstanceLabelMap map(l);
    const auto masks = instance_masks(map);
    ASSERT_EQ(masks.size(), 3u);

    long labeled = 0;
    std::array<long, 5> brute{};
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c) {
            ++brute[std::size_t(l(r, c))];
            labeled += l(r, c) >= 2;
        }
    long total = 0;
    BinaryMask seen = BinaryMask::Zero(10, 10);
    for (const auto& [id, mask] : masks) {
        EXPECT_EQ(mask.count(), brute[std::size_t(id)]);
        EXPECT_FALSE((seen && mask).any()) << "masks overlap";
        seen = seen || mask;
        total += mask.count();
    }
    EXPECT_EQ(total, labeled);
}

TEST(InstanceMasks, RoundTripRepaint)
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto map = testing::random_scene(rng, testing::uniform_int(rng, 5, 40), testing::uniform_int(rng, 5, 40),
                                               testing::uniform_int(rng, 0, 6), 1.0, 8.0);
        Raster<std::int32_t> repainted = (map.labels() == kTableLabel).cast<std::int32_t>() * kTableLabel;
        for (const auto& [id, mask] : instance_masks(map))
            repainted = mask.select(Raster<std::int32_t>::Constant(mask.rows(), mask.cols(), id), repainted);
        EXPECT_TRUE((repainted == map.labels()).all());
    }
}

TEST(InstanceLabelMap, RejectsGapsAndNegatives)
{
    Raster<std::int32_t> l = Raster<std::int32_t>::Zero(3, 3);
    l(1, 1) = 3;
    EXPECT_THROW(InstanceLabelMap{l}, Error);
    l(1, 1) = -1;
    EXPECT_THROW(InstanceLabelMap{l}, Error);
}

TEST(InstanceLabelMap, CompactionPreservesOrder)
{
    Raster<std::int32_t> l = Raster<std::int32_t>::Zero(2, 3);
    l << 1, 9, 9, 5, 0, 7;
    const auto map = InstanceLabelMap::compacted(l);
    Raster<std::int32_t> expected(2, 3);
    expected << 1, 4, 4, 2, 0, 3;
    EXPECT_TRUE((map.labels() == expected).all());
    EXPECT_EQ(map.num_instances(), 3);
}

TEST(MaskCentroid, Singleton)
{
    BinaryMask m = BinaryMask::Zero(10, 10);
    m(3, 7) = true;
    const auto c = mask_centroid(m);
    EXPECT_DOUBLE_EQ(c.x(), 3.0);
    EXPECT_DOUBLE_EQ(c.y(), 7.0);
}

TEST(MaskCentroid, SymmetricBlock)
{
    BinaryMask m = BinaryMask::Zero(10, 10);
    m.block(4, 4, 2, 2).setConstant(true);
    const auto c = mask_centroid(m);
    EXPECT_DOUBLE_EQ(c.x(), 4.5);
    EXPECT_DOUBLE_EQ(c.y(), 4.5);
}

TEST(MaskCentroid, SeededBlobMatchesDirectSum)
{
    Rng rng(99);
    BinaryMask m = BinaryMask::Zero(30, 30);
    int placed = 0;
    while (placed < 50) {
        const int r = testing::uniform_int(rng, 0, 29);
        const int c = testing::uniform_int(rng, 0, 29);
        if (!m(r, c)) {
            m(r, c) = true;
            ++placed;
        }
    }
    long sr = 0, sc = 0;
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 30; ++c)
            if (m(r, c)) {
                sr += r;
                sc += c;
            }
    const auto c = mask_centroid(m);
    EXPECT_DOUBLE_EQ(c.x(), double(sr) / 50.0);
    EXPECT_DOUBLE_EQ(c.y(), double(sc) / 50.0);
}

TEST(MaskCentroid, EmptyMaskThrows)
{
    EXPECT_THROW(mask_centroid(BinaryMask::Zero(3, 3)), Error);
}

TEST(SemanticProbs, ArgmaxIsValidLabeling)
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int h = testing::uniform_int(rng, 1, 12);
        const int w = testing::uniform_int(rng, 1, 12);
        SemanticProbs<double>::Probs p(h * w, 3);
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            for (int k = 0; k < 3; ++k)
                p(i, k) = testing::uniform_real(rng, 0.01, 1.0);
            p.row(i) /= p.row(i).sum();
        }
        const auto labels = SemanticProbs<double>(ImageGrid(h, w), p).argmax();
        EXPECT_LT(labels.labels().maxCoeff(), labels.classes());
    }
}

TEST(SemanticProbs, RejectsNonSimplex)
{
    SemanticProbs<double>::Probs p(1, 3);
    p << 0.5, 0.5, 0.5;
    EXPECT_THROW((SemanticProbs<double>(ImageGrid(1, 1), p)), Error);
    p << 1.2, -0.2, 0.0;
    EXPECT_THROW((SemanticProbs<double>(ImageGrid(1, 1), p)), Error);
}

TEST(DirectionField, RejectsNonUnitValidPixels)
{
    Raster<double> dr = Raster<double>::Constant(2, 2, 0.5);
    Raster<double> dc = Raster<double>::Zero(2, 2);
    EXPECT_THROW((DirectionField<double>(dr, dc)), Error);
    EXPECT_NO_THROW((DirectionField<double>(dr, dc, BinaryMask::Zero(2, 2))));
}

TEST(ImageGrid, RejectsEmpty)
{
    EXPECT_THROW(ImageGrid(0, 4), Error);
    EXPECT_THROW(ImageGrid(4, -1), Error);
}

}  // namespace
}  // namespace uois
