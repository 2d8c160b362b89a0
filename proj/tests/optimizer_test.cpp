#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "mvopt/error.hpp"
#include "mvopt/greedy.hpp"
#include "mvopt/optimizer.hpp"
#include "mvopt/workloads.hpp"
#include "support.hpp"

using namespace mvopt;
using mvopt::testing::int_relation;
using mvopt::testing::node_with_aliases;
using mvopt::testing::session_of;

namespace {

Catalog chain() {
  return Catalog({int_relation("A", 1000, 40, {{"x", 1000}, {"z", 100}}),
                  int_relation("B", 1000, 40, {{"x", 1000}, {"y", 100}}),
                  int_relation("C", 1000, 40, {{"y", 100}, {"z", 100}})},
                 {});
}

bool has_reuse(const PlanNode& p, const ResultId& r) {
  if (p.kind == PlanNode::Kind::Reuse && p.result == r) return true;
  for (const auto& c : p.inputs) {
    if (has_reuse(c, r)) return true;
  }
  return false;
}

}  // namespace

TEST(Optimizer, LeafCostIsScanCost) {
  Session s = session_of(chain(), "V = A", 10);
  Optimizer opt(*s.memo);
  // 1050 tuples of 40 bytes at F: 11 blocks, one seek, 1050 tuples of cpu
  EXPECT_NEAR(opt.compcost(s.roots[0]).total, 10 + 11 + 10.5, 1e-9);
  EXPECT_NEAR(opt.compcost_at(s.roots[0], 0).total, 10 + 10 + 10, 1e-9);
}

TEST(Optimizer, MaterializedSubexpressionIsReused) {
  Session s = session_of(chain(), "V = A JOIN B ON A.x = B.x JOIN C ON B.y = C.y", 10);
  Optimizer opt(*s.memo);
  int root = s.roots[0];
  int ab = node_with_aliases(*s.memo, {"A", "B"});
  ASSERT_GE(ab, 0);
  double before = opt.compcost(root).total;
  MaterializationSet m = view_set(s.roots);
  m.insert({ab, 0});
  opt.set_materialized(m);
  EXPECT_LT(opt.compcost(root).total, before);
  EXPECT_TRUE(has_reuse(opt.full_plan(root, s.memo->final_stage()), {ab, 0}));
}

TEST(Optimizer, ScanDifferentialIsFree) {
  Session s = session_of(chain(), "V = A JOIN B ON A.x = B.x", 10);
  Optimizer opt(*s.memo);
  int a = s.memo->node(s.roots[0]).alias_leaf.at("A");
  EXPECT_EQ(opt.diff_cost(a, 1).total, 0);
  EXPECT_EQ(opt.diff_plan(a, 1).kind, PlanNode::Kind::Log);
}

TEST(Optimizer, NullDifferentialRejected) {
  Session s = session_of(chain(), "V = A JOIN B ON A.x = B.x", 10);
  Optimizer opt(*s.memo);
  EXPECT_THROW(opt.diff_cost(s.roots[0], 5), NullDifferential);
  EXPECT_THROW(opt.diff_plan(s.roots[0], 6), NullDifferential);
  EXPECT_THROW(opt.diff_cost(s.roots[0], 0), NullDifferential);
}

TEST(Optimizer, SelfJoinDifferentialIsUnion) {
  Session s = session_of(chain(), "V = A AS a1 JOIN A AS a2 ON a1.x = a2.z", 10);
  Optimizer opt(*s.memo);
  PlanNode p = opt.diff_plan(s.roots[0], 1);
  ASSERT_EQ(p.kind, PlanNode::Kind::Union);
  ASSERT_EQ(p.inputs.size(), 2u);
  EXPECT_GT(p.cost.total, p.inputs[0].cost.total + p.inputs[1].cost.total);
}

TEST(Optimizer, TotalDiffCostSumsNonNullEntries) {
  Session s = session_of(chain(), "V = A JOIN B ON A.x = B.x", 10);
  Optimizer opt(*s.memo);
  double sum = 0;
  for (int i = 1; i <= 4; ++i) sum += opt.diff_cost(s.roots[0], i).total;
  EXPECT_NEAR(opt.total_diff_cost(s.roots[0]).total, sum, 1e-9);
  Session z = session_of(chain(), "V = A JOIN B ON A.x = B.x", 0);
  Optimizer zo(*z.memo);
  EXPECT_EQ(zo.total_diff_cost(z.roots[0]).total, 0);
}

TEST(Optimizer, NoUpdatesMeansFreeMaintenance) {
  Session s = session_of(chain(), "V = A JOIN B ON A.x = B.x JOIN C ON B.y = C.y", 0);
  Optimizer opt(*s.memo);
  opt.set_materialized(view_set(s.roots));
  EXPECT_EQ(opt.maint_cost(s.roots[0]).total, 0);
  EXPECT_TRUE(opt.incremental(s.roots[0]));
  EXPECT_EQ(opt.total_cost().total, 0);
}

TEST(Optimizer, ChosenCostNoWorseThanAnyOperation) {
  for (const auto& w : bundled_workloads()) {
    Session s = session_of(w.catalog, w.views, 10);
    Optimizer opt(*s.memo);
    const Memo& m = *s.memo;
    for (int e : m.topo_order()) {
      for (int o : m.node(e).children) {
        const OpNode& op = m.op(o);
        Cost path = op.exec[m.final_stage()];
        for (int in : op.inputs) path += opt.compcost(in);
        EXPECT_LE(opt.compcost(e).total, path.total + 1e-9) << w.name << " E" << e;
      }
    }
  }
}

TEST(Optimizer, EmptySetCostsNothing) {
  Session s = session_of(chain(), "V = A JOIN B ON A.x = B.x", 10);
  Optimizer opt(*s.memo);
  EXPECT_EQ(opt.cost_of_set({}).total, 0);
  EXPECT_EQ(opt.total_cost().total, 0);
}

TEST(Optimizer, IncrementalUpdatesMatchFullRecompute) {
  for (const char* name : {"views10", "example31", "desk_self", "desk_agg"}) {
    const Workload& w = find_workload(name);
    Session s = session_of(w.catalog, w.views, 5);
    auto cands = gen_candidates(*s.memo, s.roots);
    ASSERT_FALSE(cands.empty());
    Optimizer inc(*s.memo);
    inc.set_materialized(view_set(s.roots));
    Optimizer ref(*s.memo);
    std::mt19937 rng(17);
    for (int step = 0; step < 60; ++step) {
      const ResultId& r = cands[rng() % cands.size()].id;
      if (inc.materialized().contains(r)) {
        inc.remove(r);
      } else {
        inc.add(r);
      }
      ref.set_materialized(inc.materialized());
      ASSERT_TRUE(inc.state() == ref.state()) << name << " step " << step;
      ASSERT_DOUBLE_EQ(inc.total_cost().total, ref.total_cost().total);
    }
  }
}

TEST(Optimizer, RollbackRestoresState) {
  const Workload& w = find_workload("join5");
  Session s = session_of(w.catalog, w.views, 2);
  Optimizer opt(*s.memo);
  opt.set_materialized(view_set(s.roots));
  auto before = opt.snapshot();
  auto cands = gen_candidates(*s.memo, s.roots);
  ASSERT_GE(cands.size(), 3u);
  opt.begin_trial();
  for (int k = 0; k < 3; ++k) opt.add(cands[k].id);
  EXPECT_FALSE(opt.materialized() == before.m);
  opt.rollback();
  EXPECT_TRUE(opt.materialized() == before.m);
  EXPECT_TRUE(opt.state() == before.state);
}

TEST(Optimizer, TwoRelationMaintenanceOracle) {
  Session s = session_of(chain(), "V = A JOIN B ON A.x = B.x", 10);
  Optimizer opt(*s.memo);
  opt.set_materialized(view_set(s.roots));
  int v = s.roots[0];
  // each term joins the delta with a rescanned other side
  EXPECT_NEAR(opt.diff_cost(v, 1).total, 42, 1e-9);
  EXPECT_NEAR(opt.diff_cost(v, 2).total, 41, 1e-9);
  EXPECT_NEAR(opt.diff_cost(v, 3).total, 44.05, 1e-9);
  EXPECT_NEAR(opt.diff_cost(v, 4).total, 43.025, 1e-9);
  EXPECT_NEAR(opt.merge_cost(v).total, 131.075, 1e-9);
  EXPECT_NEAR(opt.maint_cost(v).total, 301.15, 1e-9);
  EXPECT_NEAR(opt.recompute_cost(v).total, 127.025, 1e-9);
  EXPECT_FALSE(opt.incremental(v));
  EXPECT_NEAR(opt.total_cost().total, 127.025, 1e-9);
}
