#include "gvdb/rtree.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gvdb;
using gvdb::testing::random_items;
using gvdb::testing::scan_window;

namespace {

std::set<std::pair<int, std::uint64_t>> keys(const std::vector<SpatialItem>& items) {
  std::set<std::pair<int, std::uint64_t>> out;
  for (const auto& it : items) out.emplace(static_cast<int>(it.kind), it.id);
  return out;
}

}  // namespace

TEST(RTree, EmptyTree) {
  const auto t = RTree::bulk_load({});
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(t.height(), 0u);
  EXPECT_TRUE(t.window_query({-1e9, -1e9, 1e9, 1e9}).empty());
  EXPECT_NO_THROW(t.check_invariants());
}

TEST(RTree, SingleItem) {
  const auto t = RTree::bulk_load({SpatialItem::node(7, {1, 2})});
  EXPECT_EQ(t.height(), 1u);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_NO_THROW(t.check_invariants());
  EXPECT_EQ(t.window_query({0, 0, 5, 5}).size(), 1u);
}

TEST(RTree, WholePlaneFindsAll) {
  auto items = random_items(1000, 3);
  const auto t = RTree::bulk_load(items, 16);
  EXPECT_NO_THROW(t.check_invariants());
  EXPECT_EQ(t.height(), 3u);  // 1000 -> 63 leaves -> 4 -> 1
  EXPECT_EQ(keys(t.window_query({-1e12, -1e12, 1e12, 1e12})), keys(items));
}

TEST(RTree, MatchesLinearScan) {
  for (std::uint64_t dataset = 1; dataset <= 5; ++dataset) {
    const auto items = random_items(500 + dataset * 700, dataset);
    for (std::size_t fanout : {2u, 4u, 16u, 64u}) {
      const auto t = RTree::bulk_load(items, fanout);
      ASSERT_NO_THROW(t.check_invariants());
      std::mt19937_64 rng(dataset * 100 + fanout);
      for (int w = 0; w < 200; ++w) {
        const Rect win = gvdb::testing::random_window(rng, {0, 0, 1000, 1000});
        ASSERT_EQ(keys(t.window_query(win)), scan_window(items, win)) << "dataset " << dataset << " window " << w;
        std::vector<SpatialItem> covered;
        t.query_covered(win, [&](const SpatialItem& it) { return it.intersects(win); },
                        [&](std::uint32_t, const SpatialItem& it) {
                          covered.push_back(it);
                          return true;
                        });
        ASSERT_EQ(keys(covered), scan_window(items, win)) << "dataset " << dataset << " window " << w;
      }
    }
  }
}

TEST(RTree, BoundaryIsInclusive) {
  const auto t = RTree::bulk_load({SpatialItem::node(1, {5, 5}), SpatialItem::node(2, {5.0000001, 5}),
                                   SpatialItem::edge(3, {10, 0}, {10, 10})});
  EXPECT_EQ(keys(t.window_query({0, 0, 5, 5})), (std::set<std::pair<int, std::uint64_t>>{{0, 1}}));
  EXPECT_EQ(keys(t.window_query({10, 5, 20, 6})), (std::set<std::pair<int, std::uint64_t>>{{1, 3}}));
}

TEST(RTree, DiagonalEdgeOutsideWindowNotReturned) {
  // bbox overlaps the window but the segment does not.
  const auto t = RTree::bulk_load({SpatialItem::edge(0, {3, 0}, {0, 3})});
  EXPECT_TRUE(t.window_query({0, 0, 1, 1}).empty());
}

TEST(RTree, EarlyStop) {
  const auto t = RTree::bulk_load(random_items(300, 8));
  int seen = 0;
  const bool complete = t.query({-1e9, -1e9, 1e9, 1e9}, [](const SpatialItem&) { return true; },
                                [&](std::uint32_t, const SpatialItem&) { return ++seen < 10; });
  EXPECT_FALSE(complete);
  EXPECT_EQ(seen, 10);
}

TEST(RTree, DuplicatePointsAndFromParts) {
  std::vector<SpatialItem> items;
  for (std::uint64_t i = 0; i < 100; ++i) items.push_back(SpatialItem::node(i, {1, 1}));
  const auto t = RTree::bulk_load(items, 4);
  ASSERT_NO_THROW(t.check_invariants());
  EXPECT_EQ(t.window_query({1, 1, 1, 1}).size(), 100u);
  const auto copy = RTree::from_parts(t.items(), t.nodes(), t.fanout(), t.height());
  EXPECT_EQ(copy.window_query({0, 0, 2, 2}).size(), 100u);

  auto broken = t.nodes();
  broken.back().box = Rect{50, 50, 51, 51};
  EXPECT_THROW(RTree::from_parts(t.items(), broken, t.fanout(), t.height()), ContractViolation);
}

TEST(RTree, ZeroLengthEdgeRejected) { EXPECT_THROW(SpatialItem::edge(0, {1, 1}, {1, 1}), ContractViolation); }

TEST(RTree, BulkLoadIsDeterministic) {
  const auto items = random_items(2000, 12);
  const auto a = RTree::bulk_load(items), b = RTree::bulk_load(items);
  ASSERT_EQ(a.items().size(), b.items().size());
  for (std::size_t i = 0; i < a.items().size(); ++i) EXPECT_EQ(a.items()[i].order_key(), b.items()[i].order_key());
}
