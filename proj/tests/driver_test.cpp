#include <gtest/gtest.h>

#include "mvopt/driver.hpp"
#include "mvopt/error.hpp"
#include "mvopt/workloads.hpp"
#include "support.hpp"

using namespace mvopt;

TEST(Driver, NogreedyMaterializesOnlyViews) {
  RunConfig cfg;
  cfg.workload = "join5";
  cfg.mode = "nogreedy";
  Report r = run(cfg);
  EXPECT_EQ(r.views.size(), 5u);
  EXPECT_EQ(r.materialized.size(), 5u);
  for (const auto& m : r.materialized) {
    EXPECT_TRUE(m.view);
    EXPECT_EQ(m.tag, "permanent");
  }
  EXPECT_DOUBLE_EQ(r.total_cost, r.nogreedy_cost);
  EXPECT_EQ(r.counters.benefit_computations, 0u);
}

TEST(Driver, GreedyNoWorseThanNogreedy) {
  for (const auto& name : workload_names()) {
    RunConfig cfg;
    cfg.workload = name;
    cfg.update_pct = 5;
    Report g = run(cfg);
    cfg.mode = "nogreedy";
    Report n = run(cfg);
    EXPECT_DOUBLE_EQ(g.nogreedy_cost, n.total_cost) << name;
    EXPECT_LE(g.total_cost, n.total_cost + 1e-9) << name;
  }
}

TEST(Driver, EmptyViewListGivesEmptyReport) {
  const Workload& w = find_workload("desk_join");
  Session s = mvopt::testing::session_of(w.catalog, "# nothing\n", 10);
  Optimizer opt(*s.memo);
  RunConfig cfg;
  Report r = optimize(s, opt, cfg);
  EXPECT_TRUE(r.views.empty());
  EXPECT_TRUE(r.materialized.empty());
  EXPECT_EQ(r.total_cost, 0);
}

TEST(Driver, RunsAreDeterministic) {
  RunConfig cfg;
  cfg.workload = "views10";
  cfg.update_pct = 2;
  EXPECT_EQ(to_json(run(cfg)).dump(), to_json(run(cfg)).dump());
  EXPECT_EQ(to_text(run(cfg)), to_text(run(cfg)));
}

TEST(Driver, ConfigValidation) {
  RunConfig cfg;
  cfg.mode = "bogus";
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.mode = "greedy";
  cfg.update_pct = 150;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.update_pct = 10;
  cfg.budget_blocks = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"update_pct": "ten"})")), ParseError);
  RunConfig parsed = config_from_json(nlohmann::json::parse(R"({"workload": "agg4", "update_pct": 20, "monotone": false})"));
  EXPECT_EQ(parsed.workload, "agg4");
  EXPECT_EQ(parsed.update_pct, 20);
  EXPECT_FALSE(parsed.monotone);
}

TEST(Driver, CostOverridesApplied) {
  RunConfig cfg;
  cfg.workload = "join4";
  cfg.cost_overrides = {{"buffer_blocks", 100}, {"w_seek", 2}};
  Catalog c = config_catalog(cfg);
  EXPECT_EQ(c.params().buffer_blocks, 100);
  EXPECT_EQ(c.params().w_seek, 2);
  cfg.cost_overrides = {{"w_bogus", 1}};
  EXPECT_THROW(config_catalog(cfg), ParseError);
  cfg.cost_overrides = {{"buffer_blocks", 1}};
  EXPECT_THROW(config_catalog(cfg), ValidationError);
}

TEST(Driver, UnknownWorkloadRejected) {
  RunConfig cfg;
  cfg.workload = "nope";
  EXPECT_THROW(run(cfg), Error);
}

TEST(Driver, SweepReportsEveryPoint) {
  RunConfig cfg;
  cfg.workload = "example31";
  auto points = sweep(cfg, {1, 50});
  ASSERT_EQ(points.size(), 2u);
  for (const auto& p : points) {
    EXPECT_LE(p.greedy_cost, p.nogreedy_cost + 1e-9);
    EXPECT_GE(p.permanent_full + p.temporary_full, 1u);
  }
  EXPECT_EQ(sweep_to_json(points).size(), 2u);
}
