#include <gtest/gtest.h>

#include <random>

#include "ccmetrics/components.hpp"
#include "ccmetrics/simulate.hpp"
#include "oracle.hpp"

using namespace ccm;

TEST(Labeling, EmptyMask) {
  const auto cl = label_components(Mask3D({4, 4, 4}, {1, 1, 1}));
  EXPECT_EQ(cl.n, 0u);
  EXPECT_TRUE(cl.stats.empty());
}

TEST(Labeling, DiagonalNeighboursConnect) {
  Mask3D m({3, 3, 3}, {1, 1, 1});
  m(0, 0, 0) = 1;
  m(1, 1, 1) = 1;
  EXPECT_EQ(label_components(m).n, 1u);
}

TEST(Labeling, GapOfOneSeparates) {
  Mask3D m({1, 1, 3}, {1, 1, 1});
  m(0, 0, 0) = 1;
  m(0, 0, 2) = 1;
  const auto cl = label_components(m);
  EXPECT_EQ(cl.n, 2u);
  EXPECT_EQ(cl.labels(0, 0, 0), 1u);
  EXPECT_EQ(cl.labels(0, 0, 2), 2u);
}

TEST(Labeling, MatchesFloodFillOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    const auto dims = oracle::random_dims(rng, 16);
    const double density = std::uniform_real_distribution<double>(0.02, 0.5)(rng);
    const auto m = oracle::random_mask(rng, dims, {1, 1, 1}, density);
    std::uint32_t n = 0;
    const auto expect = oracle::flood_labels(m, n);
    const auto cl = label_components(m);
    ASSERT_EQ(cl.n, n);
    ASSERT_EQ(oracle::to_vector(cl.labels), expect) << "trial " << trial;
  }
}

TEST(Labeling, StatsAreConsistent) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dims = oracle::random_dims(rng, 12);
    const Spacing sp = oracle::random_spacing(rng, true);
    const auto m = oracle::random_mask(rng, dims, sp, 0.15);
    const auto cl = label_components(m);
    std::size_t total = 0;
    for (std::uint32_t id = 1; id <= cl.n; ++id) {
      const auto& st = cl.of(id);
      total += st.voxel_count;
      EXPECT_DOUBLE_EQ(st.physical_volume, static_cast<double>(st.voxel_count) * sp.x * sp.y * sp.z);
      // Every voxel lies inside the bounding box, and the box is tight.
      Box seen{{1 << 20, 1 << 20, 1 << 20}, {-1, -1, -1}};
      std::size_t k = 0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (cl.labels[i] != id) continue;
        seen.include(m.index(i));
        ++k;
      }
      EXPECT_EQ(k, st.voxel_count);
      EXPECT_EQ(seen.lo, st.bbox.lo);
      EXPECT_EQ(seen.hi, st.bbox.hi);
      // Relabeling a single component yields one component.
      EXPECT_EQ(label_components(component_mask(cl, id)).n, 1u);
    }
    EXPECT_EQ(total, count(m));
  }
}

TEST(Labeling, CentroidIsPhysical) {
  Mask3D m({4, 4, 4}, {2.0, 1.0, 0.5});
  m(1, 0, 0) = 1;
  m(1, 0, 1) = 1;
  const auto& st = label_components(m).of(1);
  EXPECT_DOUBLE_EQ(st.centroid[0], 2.0);
  EXPECT_DOUBLE_EQ(st.centroid[1], 0.0);
  EXPECT_DOUBLE_EQ(st.centroid[2], 0.25);
}

TEST(Selection, EmptyWhenNoComponents) {
  const auto cl = label_components(Mask3D({2, 2, 2}, {1, 1, 1}));
  EXPECT_TRUE(select_components(cl, SelectionRule::n_smallest, 0).empty());
  EXPECT_THROW(select_components(cl, SelectionRule::n_smallest, 1), std::out_of_range);
}

TEST(Selection, StrictSizeOrder) {
  // Largest first in raster order so ids do not follow size.
  const auto ph = make_phantom({20, 20, 48}, {1, 1, 1},
                               {{{10, 10, 9}, 8.0}, {{10, 10, 23}, 4.0}, {{10, 10, 31}, 2.0}});
  const auto cl = label_components(ph.mask);
  ASSERT_EQ(cl.n, 3u);
  EXPECT_EQ(select_components(cl, SelectionRule::n_smallest, 1), std::vector<std::uint32_t>{3});
  EXPECT_EQ(select_components(cl, SelectionRule::n_largest, 1), std::vector<std::uint32_t>{1});
  EXPECT_EQ(select_components(cl, SelectionRule::n_smallest, 3), (std::vector<std::uint32_t>{3, 2, 1}));
}

TEST(Selection, TiesGoToSmallerId) {
  Mask3D m({1, 1, 5}, {1, 1, 1});
  m(0, 0, 0) = 1;
  m(0, 0, 4) = 1;
  const auto cl = label_components(m);
  EXPECT_EQ(select_components(cl, SelectionRule::n_smallest, 1), std::vector<std::uint32_t>{1});
  EXPECT_EQ(select_components(cl, SelectionRule::n_largest, 1), std::vector<std::uint32_t>{1});
}
