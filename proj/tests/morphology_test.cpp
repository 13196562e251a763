#include "uois/morphology.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <map>

namespace uois {
namespace {

using testing::Rng;

bool in_element(ElementShape shape, int r, int dy, int dx)
{
    if (shape == ElementShape::Square)
        return std::abs(dy) <= r && std::abs(dx) <= r;
    return dy * dy + dx * dx <= r * r;
}

// Neighbourhood scan; out-of-grid neighbours are skipped.
BinaryMask oracle_morph(const BinaryMask& m, ElementShape shape, int r, bool erode_op)
{
    BinaryMask out(m.rows(), m.cols());
    for (int y = 0; y < m.rows(); ++y)
        for (int x = 0; x < m.cols(); ++x) {
            bool all = true, any = false;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    if (!in_element(shape, r, dy, dx))
                        continue;
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || xx < 0 || yy >= m.rows() || xx >= m.cols())
                        continue;
                    all = all && m(yy, xx);
                    any = any || m(yy, xx);
                }
            out(y, x) = erode_op ? all : any;
        }
    return out;
}

// BFS flood fill; returns labels in discovery order.
Raster<std::int32_t> oracle_components(const BinaryMask& m, Connectivity conn, int& count)
{
    Raster<std::int32_t> lab = Raster<std::int32_t>::Constant(m.rows(), m.cols(), -1);
    count = 0;
    for (int y = 0; y < m.rows(); ++y)
        for (int x = 0; x < m.cols(); ++x) {
            if (!m(y, x) || lab(y, x) >= 0)
                continue;
            std::deque<Pixel> q{{y, x}};
            lab(y, x) = count;
            while (!q.empty()) {
                const Pixel p = q.front();
                q.pop_front();
                const int n4[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
                const int nd[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
                auto visit = [&](int dy, int dx) {
                    const int yy = p.row + dy, xx = p.col + dx;
                    if (yy >= 0 && xx >= 0 && yy < m.rows() && xx < m.cols() && m(yy, xx) && lab(yy, xx) < 0) {
                        lab(yy, xx) = count;
                        q.push_back({yy, xx});
                    }
                };
                for (const auto& d : n4)
                    visit(d[0], d[1]);
                if (conn == Connectivity::Eight)
                    for (const auto& d : nd)
                        visit(d[0], d[1]);
            }
            ++count;
        }
    return lab;
}

StructuringElement random_element(Rng& rng)
{
    return StructuringElement(testing::uniform_int(rng, 0, 1) ? ElementShape::Disk : ElementShape::Square, testing::uniform_int(rng, 1, 4));
}

BinaryMask random_test_mask(Rng& rng)
{
    const int h = testing::uniform_int(rng, 1, 40);
    const int w = testing::uniform_int(rng, 1, 40);
    BinaryMask m = testing::random_mask(rng, h, w, testing::uniform_real(rng, 0.05, 0.95));
    if (testing::uniform_int(rng, 0, 1) && h > 4 && w > 4)
        m = m || testing::random_blob(rng, h, w, 1, std::max(1, std::min(h, w) / 2 - 1));
    return m;
}

TEST(StructuringElement, DiskChords)
{
    const auto se = StructuringElement::disk(3);
    EXPECT_EQ(se.half_width(0), 3);
    EXPECT_EQ(se.half_width(1), 2);
    EXPECT_EQ(se.half_width(2), 2);
    EXPECT_EQ(se.half_width(3), 0);
    EXPECT_TRUE(se.contains(2, 2));
    EXPECT_FALSE(se.contains(3, 1));
    EXPECT_THROW(StructuringElement::square(0), Error);
}

TEST(StructuringElement, DefaultScalesWithDiagonal)
{
    EXPECT_EQ(default_element(ImageGrid(480, 640)).radius(), 2);
    EXPECT_EQ(default_element(ImageGrid(960, 1280)).radius(), 4);
    EXPECT_EQ(default_element(ImageGrid(10, 10)).radius(), 1);
    EXPECT_EQ(default_element(ImageGrid(480, 640)).shape(), ElementShape::Disk);
}

TEST(Morphology, ErodeSquareShrinksByOne)
{
    BinaryMask m = BinaryMask::Zero(9, 9);
    m.block(2, 2, 5, 5).setConstant(true);
    BinaryMask expected = BinaryMask::Zero(9, 9);
    expected.block(3, 3, 3, 3).setConstant(true);
    EXPECT_TRUE((erode(m, StructuringElement::square(1)) == expected).all());
}

TEST(Morphology, DilateSinglePixelIsElement)
{
    BinaryMask m = BinaryMask::Zero(11, 11);
    m(5, 5) = true;
    for (auto shape : {ElementShape::Square, ElementShape::Disk}) {
        const StructuringElement se(shape, 3);
        const auto d = dilate(m, se);
        for (int y = 0; y < 11; ++y)
            for (int x = 0; x < 11; ++x)
                EXPECT_EQ(d(y, x), in_element(shape, 3, y - 5, x - 5));
    }
}

TEST(Morphology, OpenRemovesSpeckleKeepsSquare)
{
    BinaryMask m = BinaryMask::Zero(20, 20);
    m.block(4, 4, 8, 8).setConstant(true);
    m(16, 16) = true;
    BinaryMask expected = BinaryMask::Zero(20, 20);
    expected.block(4, 4, 8, 8).setConstant(true);
    EXPECT_TRUE((open(m, StructuringElement::square(1)) == expected).all());
}

TEST(Morphology, CloseFillsHole)
{
    BinaryMask m = BinaryMask::Zero(12, 12);
    m.block(2, 2, 8, 8).setConstant(true);
    m(5, 6) = false;
    BinaryMask expected = BinaryMask::Zero(12, 12);
    expected.block(2, 2, 8, 8).setConstant(true);
    EXPECT_TRUE((close(m, StructuringElement::square(1)) == expected).all());
}

TEST(Morphology, BorderPixelsAreNotEroded)
{
    const BinaryMask full = BinaryMask::Ones(6, 7);
    EXPECT_TRUE(erode(full, StructuringElement::disk(2)).all());
    EXPECT_TRUE(close(full, StructuringElement::square(3)).all());
}

TEST(Morphology, MatchesNeighbourhoodScanOracle)
{
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const auto m = random_test_mask(rng);
        const auto se = random_element(rng);
        ASSERT_TRUE((erode(m, se) == oracle_morph(m, se.shape(), se.radius(), true)).all()) << "trial " << trial;
        ASSERT_TRUE((dilate(m, se) == oracle_morph(m, se.shape(), se.radius(), false)).all()) << "trial " << trial;
    }
}

TEST(Morphology, LawsOnRandomMasks)
{
    Rng rng(32);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = random_test_mask(rng);
        const auto se = random_element(rng);
        const auto e = erode(m, se);
        const auto d = dilate(m, se);
        const auto o = open(m, se);
        const auto c = close(m, se);
        ASSERT_FALSE((e && !m).any()) << "erosion anti-extensive, trial " << trial;
        ASSERT_FALSE((m && !d).any()) << "dilation extensive, trial " << trial;
        ASSERT_FALSE((o && !m).any()) << "opening anti-extensive, trial " << trial;
        ASSERT_FALSE((m && !c).any()) << "closing extensive, trial " << trial;
        ASSERT_TRUE((open(o, se) == o).all()) << "opening idempotent, trial " << trial;
        ASSERT_TRUE((close(c, se) == c).all()) << "closing idempotent, trial " << trial;
        ASSERT_TRUE((dilate(m, se) == !erode(BinaryMask(!m), se)).all()) << "duality, trial " << trial;
    }
}

TEST(Morphology, Increasing)
{
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_test_mask(rng);
        const BinaryMask b = a || testing::random_mask(rng, int(a.rows()), int(a.cols()), 0.2);
        const auto se = random_element(rng);
        ASSERT_FALSE((open(a, se) && !open(b, se)).any());
        ASSERT_FALSE((close(a, se) && !close(b, se)).any());
    }
}

TEST(Components, FourVersusEightConnectivity)
{
    BinaryMask m = BinaryMask::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 2) = true;
    m(0, 3) = true;
    EXPECT_EQ(label_components(m, Connectivity::Four).sizes.size(), 4u);
    const auto eight = label_components(m, Connectivity::Eight);
    ASSERT_EQ(eight.sizes.size(), 2u);
    EXPECT_EQ(eight.sizes[0], 3);
    EXPECT_EQ(eight.sizes[1], 1);
    EXPECT_EQ(eight.labels(2, 2), 0);
    EXPECT_EQ(eight.labels(0, 3), 1);
    EXPECT_EQ(eight.labels(3, 3), -1);
}

TEST(Components, EqualSizesOrderedByFirstPixel)
{
    BinaryMask m = BinaryMask::Zero(5, 5);
    m(4, 0) = m(4, 1) = true;
    m(0, 3) = m(0, 4) = true;
    const auto lab = label_components(m, Connectivity::Four);
    ASSERT_EQ(lab.sizes.size(), 2u);
    EXPECT_EQ(lab.first_pixels[0], (Pixel{0, 3}));
    EXPECT_EQ(lab.first_pixels[1], (Pixel{4, 0}));
}

TEST(Components, MatchFloodFillOracle)
{
    Rng rng(34);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = random_test_mask(rng);
        const auto conn = trial % 2 ? Connectivity::Four : Connectivity::Eight;
        int count = 0;
        const auto expected = oracle_components(m, conn, count);
        const auto got = label_components(m, conn);
        ASSERT_EQ(int(got.sizes.size()), count) << "trial " << trial;
        // Same partition, sizes consistent and sorted.
        std::map<int, int> fwd;
        std::vector<long> sizes(got.sizes.size(), 0);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const int a = expected.data()[i];
            const int b = got.labels.data()[i];
            ASSERT_EQ(a < 0, b < 0);
            if (a < 0)
                continue;
            ASSERT_EQ(fwd.emplace(a, b).first->second, b) << "trial " << trial;
            ++sizes[std::size_t(b)];
        }
        ASSERT_EQ(int(fwd.size()), count);
        EXPECT_EQ(sizes, got.sizes);
        for (std::size_t k = 1; k < sizes.size(); ++k)
            ASSERT_TRUE(sizes[k - 1] > sizes[k] || (sizes[k - 1] == sizes[k] && got.first_pixels[k - 1] < got.first_pixels[k]));
        const auto parts = connected_components(m, conn);
        ASSERT_EQ(int(parts.size()), count);
        for (std::size_t k = 0; k < parts.size(); ++k)
            EXPECT_EQ(parts[k].count(), got.sizes[k]);
    }
}

TEST(InnerBoundary, FilledSquare)
{
    BinaryMask m = BinaryMask::Zero(7, 7);
    m.block(1, 1, 5, 5).setConstant(true);
    const auto b = inner_boundary(m);
    EXPECT_EQ(b.count(), 16);
    EXPECT_FALSE(b(3, 3));
    EXPECT_TRUE(b(1, 1));
    EXPECT_TRUE(inner_boundary(BinaryMask::Ones(3, 3)).count() == 8);
}

// Whole-image open/close, then the component whose nearest pixel is closest.
BinaryMask oracle_imp(const BinaryMask& m, const Eigen::Vector2d& center, const ImpParams& p)
{
    const BinaryMask o = oracle_morph(m, p.open_element.shape(), p.open_element.radius(), true);
    const BinaryMask oo = oracle_morph(o, p.open_element.shape(), p.open_element.radius(), false);
    const BinaryMask cd = oracle_morph(oo, p.close_element.shape(), p.close_element.radius(), false);
    const BinaryMask cc = oracle_morph(cd, p.close_element.shape(), p.close_element.radius(), true);
    int count = 0;
    const auto lab = oracle_components(cc, p.connectivity, count);
    if (count == 0)
        return BinaryMask::Zero(m.rows(), m.cols());
    std::vector<double> best(std::size_t(count), 1e300);
    std::vector<long> size(std::size_t(count), 0);
    for (int y = 0; y < m.rows(); ++y)
        for (int x = 0; x < m.cols(); ++x)
            if (lab(y, x) >= 0) {
                best[std::size_t(lab(y, x))] = std::min(best[std::size_t(lab(y, x))], (Eigen::Vector2d(y, x) - center).squaredNorm());
                ++size[std::size_t(lab(y, x))];
            }
    int pick = 0;
    for (int k = 1; k < count; ++k)
        if (best[std::size_t(k)] < best[std::size_t(pick)] ||
            (best[std::size_t(k)] == best[std::size_t(pick)] && size[std::size_t(k)] > size[std::size_t(pick)]))
            pick = k;
    return lab == pick;
}

TEST(ImpProcess, RemovesSaltNoise)
{
    BinaryMask m = BinaryMask::Zero(40, 40);
    m.block(10, 10, 15, 15).setConstant(true);
    m(2, 3) = m(35, 30) = m(5, 33) = true;
    m(17, 17) = false;
    BinaryMask expected = BinaryMask::Zero(40, 40);
    expected.block(10, 10, 15, 15).setConstant(true);
    const ImpParams p{StructuringElement::square(1), StructuringElement::square(1), Connectivity::Eight};
    EXPECT_TRUE((imp_process(m, {17, 17}, p) == expected).all());
}

TEST(ImpProcess, DropsSatelliteComponent)
{
    BinaryMask m = BinaryMask::Zero(40, 60);
    m.block(5, 5, 12, 12).setConstant(true);
    m.block(20, 40, 10, 10).setConstant(true);
    const ImpParams p{StructuringElement::square(1), StructuringElement::square(1), Connectivity::Eight};
    const auto out = imp_process(m, {10, 10}, p);
    EXPECT_EQ(out.count(), 144);
    EXPECT_TRUE(out(5, 5));
    EXPECT_FALSE(out(25, 45));
    // Center nearer the smaller piece picks it.
    EXPECT_EQ(imp_process(m, {25, 45}, p).count(), 100);
}

TEST(ImpProcess, EmptyInputAndFullErasure)
{
    const ImpParams p{StructuringElement::square(2), StructuringElement::square(2), Connectivity::Eight};
    EXPECT_FALSE(imp_process(BinaryMask::Zero(10, 10), {5, 5}, p).any());
    BinaryMask thin = BinaryMask::Zero(10, 10);
    thin.row(5).setConstant(true);
    EXPECT_FALSE(imp_process(thin, {5, 5}, p).any());
}

TEST(ImpProcess, MatchesWholeImageOracle)
{
    Rng rng(35);
    for (int trial = 0; trial < 300; ++trial) {
        const int h = testing::uniform_int(rng, 8, 48);
        const int w = testing::uniform_int(rng, 8, 48);
        BinaryMask m = testing::random_blob(rng, h, w, 2, std::max(2, std::min(h, w) / 3));
        m = m || testing::random_blob(rng, h, w, 1, 4);
        m = (m && testing::random_mask(rng, h, w, 0.9)) || testing::random_mask(rng, h, w, 0.03);
        const ImpParams p{random_element(rng), random_element(rng), trial % 2 ? Connectivity::Four : Connectivity::Eight};
        const Eigen::Vector2d center(testing::uniform_real(rng, 0, h - 1), testing::uniform_real(rng, 0, w - 1));
        ASSERT_TRUE((imp_process(m, center, p) == oracle_imp(m, center, p)).all()) << "trial " << trial;
    }
}

}  // namespace
}  // namespace uois
