#include <gtest/gtest.h>

#include <set>

#include "mvopt/catalog.hpp"
#include "mvopt/error.hpp"
#include "mvopt/workloads.hpp"
#include "support.hpp"

using namespace mvopt;
using mvopt::testing::int_relation;

namespace {

Catalog four() {
  return Catalog({int_relation("A", 1000, 40, {{"x", 100}}), int_relation("B", 200, 40, {{"x", 100}}),
                  int_relation("C", 50, 40, {{"y", 10}}), int_relation("D", 10, 40, {{"z", 10}})},
                 {});
}

}  // namespace

TEST(Catalog, BlocksFromDefaultBlockSize) {
  Catalog c({int_relation("A", 1000, 40, {{"x", 0}})}, {});
  EXPECT_EQ(c.blocks("A"), 10);
}

TEST(Catalog, DanglingForeignKeyRejected) {
  auto bad = [] {
    return Catalog({int_relation("r", 10, 8, {{"b", 5}})}, {{"r", {"b"}, "s", {"a"}}});
  };
  EXPECT_THROW(bad(), ValidationError);
}

TEST(Catalog, DistinctAboveCardinalityRejected) {
  auto bad = [] { return Catalog({int_relation("r", 10, 8, {{"b", 50}})}, {}); };
  EXPECT_THROW(bad(), ValidationError);
}

TEST(Catalog, ForeignKeyTargetMustBePrimaryKey) {
  auto bad = [] {
    return Catalog({int_relation("s", 10, 8, {{"a", 0}, {"c", 0}}, {"a"}), int_relation("r", 10, 8, {{"b", 5}})},
                   {{"r", {"b"}, "s", {"c"}}});
  };
  EXPECT_THROW(bad(), ValidationError);
}

TEST(Catalog, FourRelationsGiveEightUpdateIndices) {
  Catalog c = four();
  EXPECT_EQ(c.update_count(), 8);
  UpdateSpec spec = make_update_spec(c, 10);
  EXPECT_EQ(spec.update_count(), 8);
}

TEST(Catalog, UpdateIndexingIsBijective) {
  for (std::size_t n = 1; n <= 8; ++n) {
    std::set<std::pair<std::size_t, int>> seen;
    for (int i = 1; i <= 2 * static_cast<int>(n); ++i) {
      UpdateRef ref = decode_update(i);
      EXPECT_LT(ref.relation, n);
      EXPECT_EQ(ref.kind == UpdateKind::Insert, i % 2 == 1);
      EXPECT_EQ(update_index(ref.relation, ref.kind), i);
      seen.insert({ref.relation, static_cast<int>(ref.kind)});
    }
    EXPECT_EQ(seen.size(), 2 * n);
  }
}

TEST(Catalog, TenPercentUpdates) {
  Catalog c({int_relation("R", 1000, 40, {{"x", 0}})}, {});
  UpdateSpec spec = make_update_spec(c, 10);
  EXPECT_EQ(delta_stats(c, spec, 1).cardinality, 100);
  EXPECT_EQ(delta_stats(c, spec, 2).cardinality, 50);
  EXPECT_EQ(delta_stats(c, spec, 1).kind, UpdateKind::Insert);
  EXPECT_EQ(delta_stats(c, spec, 2).kind, UpdateKind::Delete);
}

TEST(Catalog, ZeroPercentUpdates) {
  Catalog c = four();
  UpdateSpec spec = make_update_spec(c, 0);
  for (int i = 1; i <= c.update_count(); ++i) EXPECT_EQ(delta_stats(c, spec, i).cardinality, 0);
}

TEST(Catalog, EightyPercentUpdates) {
  Catalog c({int_relation("R", 200, 40, {{"x", 0}})}, {});
  UpdateSpec spec = make_update_spec(c, 80);
  EXPECT_EQ(delta_stats(c, spec, 1).cardinality, 160);
  EXPECT_EQ(delta_stats(c, spec, 2).cardinality, 80);
}

TEST(Catalog, DeltaDistinctCappedByDeltaSize) {
  Catalog c({int_relation("R", 1000, 40, {{"x", 500}, {"y", 20}})}, {});
  UpdateSpec spec = make_update_spec(c, 10);
  DeltaStats d = delta_stats(c, spec, 1);
  EXPECT_DOUBLE_EQ(d.distinct.at("x"), 100);
  EXPECT_DOUBLE_EQ(d.distinct.at("y"), 20);
}

TEST(Catalog, StagedCardinalityFollowsUpdateOrder) {
  Catalog c = four();
  UpdateSpec spec = make_update_spec(c, 10);
  EXPECT_EQ(staged_cardinality(c, spec, 0, 0), 1000);
  EXPECT_EQ(staged_cardinality(c, spec, 0, 1), 1100);
  EXPECT_EQ(staged_cardinality(c, spec, 0, 2), 1050);
  EXPECT_EQ(staged_cardinality(c, spec, 0, 8), 1050);
  EXPECT_EQ(staged_cardinality(c, spec, 1, 2), 200);
}

TEST(Catalog, OverridesReplaceFractions) {
  Catalog c = four();
  UpdateSpec spec = apply_update_overrides(c, make_update_spec(c, 10), {{"B", {{"insert", 0.5}, {"delete", 0}}}});
  EXPECT_EQ(delta_stats(c, spec, 3).cardinality, 100);
  EXPECT_EQ(delta_stats(c, spec, 4).cardinality, 0);
  EXPECT_EQ(delta_stats(c, spec, 1).cardinality, 100);
}

TEST(Catalog, JsonRoundTrip) {
  for (const auto& w : bundled_workloads()) {
    Catalog again = catalog_from_json(to_json(w.catalog));
    EXPECT_EQ(again, w.catalog) << w.name;
    EXPECT_EQ(to_json(again), to_json(w.catalog));
  }
}

TEST(Catalog, MalformedJsonIsParseError) {
  EXPECT_THROW(catalog_from_json(nlohmann::json::parse(R"({"relations": 5})")), ParseError);
  EXPECT_THROW(load_catalog("/nonexistent/catalog.json"), ParseError);
}
