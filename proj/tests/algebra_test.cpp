#include <gtest/gtest.h>

#include "mvopt/algebra.hpp"
#include "mvopt/error.hpp"
#include "support.hpp"

using namespace mvopt;
using mvopt::testing::int_relation;

namespace {

Catalog abc() {
  std::vector<RelationInfo> rels = {
      int_relation("A", 100, 16, {{"x", 10}, {"z", 10}}),
      int_relation("B", 100, 16, {{"x", 10}, {"y", 10}}),
      int_relation("C", 100, 16, {{"y", 10}, {"w", 10}}),
  };
  RelationInfo e;
  e.name = "E";
  e.cardinality = 100;
  e.tuple_bytes = 32;
  e.columns = {{"eid", ColumnType::Int}, {"dno", ColumnType::Int}, {"sal", ColumnType::Decimal},
               {"name", ColumnType::String}};
  e.distinct = {{"dno", 10}};
  rels.push_back(e);
  return Catalog(rels, {});
}

std::size_t leaf_count(const LogicalExpr& e) {
  if (e.kind == LogicalExpr::Kind::Scan) return 1;
  std::size_t n = 0;
  for (const auto& in : e.inputs) n += leaf_count(*in);
  return n;
}

}  // namespace

TEST(Algebra, ThreeLeafJoin) {
  ViewDef v = parse_view("V = A JOIN B ON A.x=B.x JOIN C ON B.y=C.y", abc());
  EXPECT_EQ(v.name, "V");
  ASSERT_EQ(v.body->kind, LogicalExpr::Kind::Join);
  EXPECT_EQ(leaf_count(*v.body), 3u);
  EXPECT_EQ(v.body->inputs[0]->kind, LogicalExpr::Kind::Join);
  EXPECT_TRUE(v.materialized);
}

TEST(Algebra, GroupByRootOverScan) {
  ViewDef v = parse_view("V = GROUPBY(dno; sum(sal))(E)", abc());
  ASSERT_EQ(v.body->kind, LogicalExpr::Kind::Aggregate);
  EXPECT_EQ(v.body->inputs[0]->kind, LogicalExpr::Kind::Scan);
  ASSERT_EQ(v.body->aggregates.size(), 1u);
  EXPECT_EQ(v.body->aggregates[0].func, AggFunc::Sum);
  EXPECT_EQ(v.body->group_columns, std::vector<std::string>{"E.dno"});
}

TEST(Algebra, OutOfScopeColumn) {
  EXPECT_THROW(parse_view("V = A JOIN B ON A.x=C.x", abc()), UnknownColumn);
}

TEST(Algebra, UnknownRelation) { EXPECT_THROW(parse_view("V = A JOIN Q ON A.x=Q.x", abc()), UnknownRelation); }

TEST(Algebra, SyntaxErrors) {
  EXPECT_THROW(parse_view("V = A JOIN", abc()), SyntaxError);
  EXPECT_THROW(parse_view("A JOIN B ON A.x = B.x", abc()), SyntaxError);
  EXPECT_THROW(parse_view("V = SELECT A.x (A)", abc()), SyntaxError);
}

TEST(Algebra, StringAgainstIntIsTypeMismatch) {
  EXPECT_THROW(parse_view("V = SELECT A.x = 'a' (A)", abc()), TypeMismatch);
  EXPECT_THROW(parse_view("V = E JOIN A ON E.name = A.x", abc()), TypeMismatch);
}

TEST(Algebra, MinMaxRejected) {
  EXPECT_THROW(parse_view("V = GROUPBY(dno; min(sal))(E)", abc()), AggregateNotIncremental);
  EXPECT_THROW(parse_view("V = GROUPBY(dno; max(sal))(E)", abc()), AggregateNotIncremental);
}

TEST(Algebra, AggregateOnlyAtRoot) {
  EXPECT_THROW(parse_view("V = GROUPBY(dno; sum(sal))(E) JOIN A ON E.dno = A.x", abc()), ValidationError);
}

TEST(Algebra, AggregateSchemaCarriesCount) {
  ViewDef v = parse_view("V = GROUPBY(dno; sum(sal))(E)", abc());
  auto schema = schema_of(*v.body, abc());
  ASSERT_EQ(schema.size(), 3u);
  EXPECT_EQ(schema[0].name, "E.dno");
  EXPECT_EQ(schema[1].name, "sum_sal");
  EXPECT_EQ(schema[2].name, kCountColumn);
  EXPECT_EQ(schema[1].type, ColumnType::Decimal);
}

TEST(Algebra, JoinSchemaConcatenates) {
  ViewDef v = parse_view("V = A JOIN B ON A.x = B.x", abc());
  auto schema = schema_of(*v.body, abc());
  std::vector<std::string> names;
  for (const auto& c : schema) names.push_back(c.name);
  EXPECT_EQ(names, (std::vector<std::string>{"A.x", "A.z", "B.x", "B.y"}));
}

TEST(Algebra, SelectionsPushedToScans) {
  ViewDef v = parse_view("V = SELECT A.z < 5 AND B.y = 3 (A JOIN B ON A.x = B.x)", abc());
  ASSERT_EQ(v.body->kind, LogicalExpr::Kind::Join);
  for (const auto& in : v.body->inputs) {
    EXPECT_EQ(in->kind, LogicalExpr::Kind::Select);
    EXPECT_EQ(in->inputs[0]->kind, LogicalExpr::Kind::Scan);
    EXPECT_EQ(in->predicates.size(), 1u);
  }
}

TEST(Algebra, NormalizeIsIdempotent) {
  const char* views[] = {
      "V = SELECT A.z < 5 (SELECT A.x = 1 (A) JOIN B ON A.x = B.x)",
      "V = GROUPBY(B.y; count(*))(SELECT B.y >= 2 (A JOIN B ON A.x = B.x JOIN C ON B.y = C.y))",
      "V = A AS a1 JOIN A AS a2 ON a1.x = a2.z",
  };
  for (const char* src : views) {
    ViewDef v = parse_view(src, abc());
    ExprPtr again = normalize(v.body);
    EXPECT_TRUE(*again == *v.body) << src;
    EXPECT_EQ(again->to_string(), v.body->to_string());
  }
}

TEST(Algebra, DuplicateAliasRejected) {
  EXPECT_THROW(parse_view("V = A JOIN A ON A.x = A.z", abc()), ValidationError);
}

TEST(Algebra, CountStarAndAvg) {
  ViewDef v = parse_view("V = GROUPBY(dno; count(*), avg(sal))(E)", abc());
  ASSERT_EQ(v.body->aggregates.size(), 2u);
  EXPECT_EQ(v.body->aggregates[0].func, AggFunc::Count);
  EXPECT_EQ(v.body->aggregates[1].func, AggFunc::Avg);
  auto schema = schema_of(*v.body, abc());
  EXPECT_EQ(schema.back().name, kCountColumn);
}

TEST(Algebra, ViewListSkipsCommentsAndBlanks) {
  auto views = parse_views("# views\n\nV1 = A\n  \nV2 = B JOIN C ON B.y = C.y\n", abc());
  ASSERT_EQ(views.size(), 2u);
  EXPECT_EQ(views[1].name, "V2");
}
