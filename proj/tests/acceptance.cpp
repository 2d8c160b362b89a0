// Acceptance checks; one PASS/FAIL line per criterion, exit status 1 on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "mvopt/driver.hpp"
#include "mvopt/error.hpp"
#include "mvopt/executor.hpp"
#include "mvopt/greedy.hpp"
#include "mvopt/workloads.hpp"

using namespace mvopt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Session session_for(const Catalog& c, const std::string& views, const UpdateSpec& spec, bool fk_prune = true) {
  return make_session(c, parse_views(views, c), spec, fk_prune);
}

Session session_for(const Catalog& c, const std::string& views, double pct, bool fk_prune = true) {
  return session_for(c, views, make_update_spec(c, pct), fk_prune);
}

GreedyResult greedy(Session& s, Optimizer& opt, bool incremental, bool monotone) {
  GreedyOptions o;
  o.incremental = incremental;
  o.monotone = monotone;
  return greedy_select(opt, s.roots, gen_candidates(*s.memo, s.roots), o);
}

UpdateSpec random_fractions(const Catalog& c, std::mt19937_64& rng) {
  static const double choices[] = {0, 0.1, 0.5};
  UpdateSpec spec = make_update_spec(c, 0);
  for (auto& r : spec.per_relation) {
    r.insert_fraction = choices[rng() % 3];
    r.delete_fraction = choices[rng() % 3];
  }
  return spec;
}

Outcome plan_optimality() {
  auto t0 = Clock::now();
  Outcome out;
  std::size_t checked = 0;
  for (const auto& name : workload_names()) {
    const Workload& w = find_workload(name);
    for (double pct : {1.0, 10.0, 50.0}) {
      Session s = session_for(w.catalog, w.views, pct);
      Optimizer opt(*s.memo);
      const Memo& m = *s.memo;
      for (int e : m.topo_order()) {
        if (m.leaf_count(e) > 4) continue;
        Enumeration full = enumerate_plans(m, {e, 0});
        if (full.min_cost != opt.compcost(e).total) {
          out.pass = false;
          out.detail = name + " E" + std::to_string(e) + " full";
        }
        ++checked;
        for (int i = 1; i <= m.update_count(); ++i) {
          if (m.node(e).diff[i].null) continue;
          Enumeration d = enumerate_plans(m, {e, i});
          if (d.min_cost != opt.diff_cost(e, i).total) {
            out.pass = false;
            out.detail = name + " E" + std::to_string(e) + " d" + std::to_string(i);
          }
          ++checked;
        }
      }
    }
  }
  double secs = seconds_since(t0);
  if (secs >= 10) out.pass = false;
  std::ostringstream d;
  d << checked << " results matched enumeration in " << secs << " s";
  if (!out.detail.empty()) d << "; mismatch at " << out.detail;
  out.detail = d.str();
  return out;
}

Outcome maintenance_correctness() {
  auto t0 = Clock::now();
  Outcome out;
  const char* names[] = {"desk_join", "desk_self", "desk_agg", "desk_chain", "example31", "example32"};
  std::size_t checks = 0, incremental = 0, diffs = 0, agg_deletes = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    for (const char* name : names) {
      const Workload& w = find_workload(name);
      Catalog c = scale_catalog(w.catalog, 50);
      UpdateSpec spec = random_fractions(c, rng);
      Session s = session_for(c, w.views, spec);
      Optimizer opt(*s.memo);
      greedy(s, opt, true, true);
      for (int v : s.roots) {
        if (!opt.incremental(v)) continue;
        ++incremental;
        if (!s.memo->node(v).aggregate) continue;
        for (std::size_t r = 0; r < spec.per_relation.size(); ++r) {
          if (spec.per_relation[r].delete_fraction > 0 && s.memo->node(v).base_deps.count(r)) {
            ++agg_deletes;
            break;
          }
        }
      }
      GeneratedData data = generate_database(c, s.spec, seed);
      // the chosen set, then every candidate stored so all reuse paths run
      Optimizer everything(*s.memo);
      MaterializationSet all = view_set(s.roots);
      for (const auto& cand : gen_candidates(*s.memo, s.roots)) all.insert(cand.id);
      everything.set_materialized(all);
      for (const Optimizer* o : {&opt, &everything}) {
        for (const auto& r : o->materialized().results()) diffs += r.update_index > 0 ? 1 : 0;
        for (const auto& vc : check_maintenance(s, *o, data)) {
          ++checks;
          if (!vc.pass) {
            out.pass = false;
            out.detail = std::string(name) + " " + vc.name + " seed " + std::to_string(seed);
          }
        }
      }
    }
  }
  double secs = seconds_since(t0);
  if (secs >= 60) out.pass = false;
  std::ostringstream d;
  d << checks << " view checks over 100 seeds (" << incremental << " incrementally maintained, " << agg_deletes
    << " aggregates under deletes, " << diffs << " stored differentials) in " << secs << " s";
  if (!out.detail.empty()) d << "; failure at " << out.detail;
  out.detail = d.str();
  return out;
}

Outcome incremental_equivalence() {
  Outcome out;
  std::size_t inc_visits = 0, naive_visits = 0, runs = 0;
  for (const auto& w : bundled_workloads()) {
    for (double pct : default_sweep_points()) {
      Session s = session_for(w.catalog, w.views, pct);
      Optimizer a(*s.memo), b(*s.memo);
      GreedyResult ra = greedy(s, a, true, true);
      GreedyResult rb = greedy(s, b, false, true);
      ++runs;
      inc_visits += ra.counters.node_visits;
      naive_visits += rb.counters.node_visits;
      bool ok = ra.chosen == rb.chosen && ra.total_cost.total == rb.total_cost.total &&
                ra.counters.node_visits < rb.counters.node_visits;
      if (!ok) {
        out.pass = false;
        out.detail = w.name + " at " + std::to_string(pct) + "%";
      }
    }
  }
  std::ostringstream d;
  d << runs << " runs; node visits " << inc_visits << " incremental vs " << naive_visits << " naive";
  if (!out.detail.empty()) d << "; mismatch at " << out.detail;
  out.detail = d.str();
  return out;
}

Outcome monotonicity() {
  Outcome out;
  std::size_t lazy_comp = 0, eager_comp = 0, runs = 0, held = 0;
  double worst = 0;
  for (const auto& w : bundled_workloads()) {
    for (double pct : default_sweep_points()) {
      Session s = session_for(w.catalog, w.views, pct);
      Optimizer a(*s.memo), b(*s.memo);
      GreedyResult lazy = greedy(s, a, true, true);
      GreedyResult eager = greedy(s, b, true, false);
      ++runs;
      lazy_comp += lazy.counters.benefit_computations;
      eager_comp += eager.counters.benefit_computations;
      double gap = (lazy.total_cost.total - eager.total_cost.total) / std::max(1e-12, eager.total_cost.total);
      worst = std::max(worst, gap);
      bool ok = gap <= 0.05 && lazy.counters.benefit_computations < eager.counters.benefit_computations;
      if (eager.counters.monotonicity_held) {
        ++held;
        ok = ok && lazy.chosen == eager.chosen;
      }
      if (!ok) {
        out.pass = false;
        std::ostringstream f;
        f << (out.detail.empty() ? "" : ", ") << w.name << " at " << pct << "% (+" << gap * 100 << "%)";
        out.detail += f.str();
      }
    }
  }
  std::ostringstream d;
  d << runs << " runs; benefit computations " << lazy_comp << " lazy vs " << eager_comp << " eager; worst cost gap "
    << worst * 100 << "%; monotone in " << held << " runs";
  if (!out.detail.empty()) d << "; outside tolerance: " << out.detail;
  out.detail = d.str();
  return out;
}

int node_with_leaves(const Memo& m, std::vector<std::string> aliases) {
  std::sort(aliases.begin(), aliases.end());
  for (int e : m.topo_order()) {
    std::vector<std::string> have;
    for (const auto& [a, leaf] : m.node(e).alias_leaf) have.push_back(a);
    if (have == aliases && !m.node(e).aggregate) return e;
  }
  return -1;
}

Outcome never_worse() {
  Outcome out;
  std::size_t points = 0;
  for (const char* name : {"join5", "views10"}) {
    RunConfig cfg;
    cfg.workload = name;
    for (const auto& p : sweep(cfg, default_sweep_points())) {
      ++points;
      if (p.greedy_cost > p.nogreedy_cost) {
        out.pass = false;
        out.detail = std::string(name) + " at " + std::to_string(p.update_pct) + "%";
      }
    }
  }
  const Workload& w = find_workload("example31");
  std::size_t selected = 0, runs = 0;
  for (double pct : default_sweep_points()) {
    Session s = session_for(w.catalog, w.views, pct);
    Optimizer opt(*s.memo);
    GreedyResult r = greedy(s, opt, true, true);
    int rs = node_with_leaves(*s.memo, {"R", "S"});
    ++runs;
    if (rs >= 0 && r.chosen.contains({rs, 0})) ++selected;
  }
  if (selected != runs) out.pass = false;
  std::ostringstream d;
  d << points << " sweep points with greedy <= nogreedy; R JOIN S selected at " << selected << "/" << runs
    << " update levels";
  if (!out.detail.empty()) d << "; violated at " << out.detail;
  out.detail = d.str();
  return out;
}

Outcome crossover() {
  std::size_t low_perm = 0, low_all = 0, high_perm = 0, high_all = 0;
  for (const auto& w : bundled_workloads()) {
    RunConfig cfg;
    cfg.workload = w.name;
    for (const auto& p : sweep(cfg, {1, 2, 5, 50, 60, 70, 80, 90})) {
      std::size_t all = p.permanent_full + p.temporary_full;
      if (p.update_pct <= 5) {
        low_perm += p.permanent_full;
        low_all += all;
      } else {
        high_perm += p.permanent_full;
        high_all += all;
      }
    }
  }
  double low = low_all ? static_cast<double>(low_perm) / low_all : 0;
  double high = high_all ? static_cast<double>(high_perm) / high_all : 0;
  Outcome out;
  out.pass = low_all > 0 && high_all > 0 && low > high;
  std::ostringstream d;
  d << "permanent share of extra full results " << low_perm << "/" << low_all << " at 1-5% vs " << high_perm << "/"
    << high_all << " at 50-90%";
  out.detail = d.str();
  return out;
}

Outcome fk_pruning() {
  Outcome out;
  std::size_t pruned_terms = 0, cost_checks = 0;
  const char* names[] = {"desk_join", "desk_agg", "join5", "views10"};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    const char* name = names[seed % 4];
    const Workload& w = find_workload(name);
    Catalog c = scale_catalog(w.catalog, 50);
    UpdateSpec spec = random_fractions(c, rng);
    Session s = session_for(c, w.views, spec);
    Optimizer opt(*s.memo);
    GeneratedData data = generate_database(c, s.spec, seed);
    StagedDatabase staged = stage_database(c, data.base, data.deltas);
    PlanExecutor exec(opt, staged);
    for (const auto& op : s.memo->raw_ops()) {
      if (!op.live) continue;
      for (int i = 1; i <= s.memo->update_count(); ++i) {
        const auto& terms = op.diff[i].terms;
        for (std::size_t t = 0; t < terms.size(); ++t) {
          if (!terms[t].pruned) continue;
          ++pruned_terms;
          if (!exec.reference_term(op.id, static_cast<int>(t), i).empty()) {
            out.pass = false;
            out.detail = std::string(name) + " O" + std::to_string(op.id) + " d" + std::to_string(i) + " seed " +
                         std::to_string(seed);
          }
        }
      }
    }
  }
  for (const auto& name : workload_names()) {
    const Workload& w = find_workload(name);
    for (double pct : {1.0, 10.0, 50.0}) {
      Session with = session_for(w.catalog, w.views, pct, true);
      Session without = session_for(w.catalog, w.views, pct, false);
      Optimizer a(*with.memo), b(*without.memo);
      MaterializationSet views = view_set(with.roots);
      a.set_materialized(views);
      b.set_materialized(views);
      for (int e : with.memo->topo_order()) {
        ++cost_checks;
        bool ok = a.compcost(e).total <= b.compcost(e).total + 1e-9 && a.maint_cost(e).total <= b.maint_cost(e).total + 1e-9;
        for (int i = 1; i <= with.memo->update_count(); ++i) {
          if (!with.memo->node(e).diff[i].null) ok = ok && a.diff_cost(e, i).total <= b.diff_cost(e, i).total + 1e-9;
        }
        if (!ok) {
          out.pass = false;
          out.detail = name + " E" + std::to_string(e) + " costs more with pruning";
        }
      }
      ++cost_checks;
      Optimizer ga(*with.memo), gb(*without.memo);
      if (greedy(with, ga, true, true).total_cost.total > greedy(without, gb, true, true).total_cost.total + 1e-9) {
        out.pass = false;
        out.detail = name + " greedy total costs more with pruning";
      }
    }
  }
  if (pruned_terms == 0) out.pass = false;
  std::ostringstream d;
  d << pruned_terms << " pruned terms evaluated empty over 100 seeds; " << cost_checks << " cost comparisons";
  if (!out.detail.empty()) d << "; failure at " << out.detail;
  out.detail = d.str();
  return out;
}

Outcome buffer_direction() {
  Outcome out;
  std::size_t plans = 0, optima = 0, flipped = 0;
  auto with_buffer = [](Catalog c, double b) {
    c.mutable_params().buffer_blocks = b;
    return c;
  };
  auto check = [&](double big, double small, const std::string& where) {
    if (small + 1e-9 < big) {
      out.pass = false;
      out.detail = where;
    }
  };
  for (const auto& name : workload_names()) {
    const Workload& w = find_workload(name);
    for (double pct : {1.0, 10.0, 50.0}) {
      Session big = session_for(with_buffer(w.catalog, 8000), w.views, pct);
      Session small = session_for(with_buffer(w.catalog, 1000), w.views, pct);
      const Memo& mb = *big.memo;
      const Memo& ms = *small.memo;
      const int last = mb.update_count();
      // same memo shape, so the k-th enumerated plan is the same plan in both
      for (int e : mb.topo_order()) {
        if (mb.leaf_count(e) > 4) continue;
        for (int i = 0; i <= last; ++i) {
          if (i > 0 && mb.node(e).diff[i].null) continue;
          auto a = enumerate_plan_costs(mb, {e, i}), b = enumerate_plan_costs(ms, {e, i});
          if (a.size() != b.size()) {
            out.pass = false;
            out.detail = name + " plan spaces differ";
            continue;
          }
          for (std::size_t k = 0; k < a.size(); ++k) {
            ++plans;
            check(a[k], b[k], name + " E" + std::to_string(e) + " plan " + std::to_string(k));
          }
        }
      }
      // optimal costs over identical plan spaces (nothing materialized)
      Optimizer a(mb), b(ms);
      for (int e : mb.topo_order()) {
        std::string where = name + " E" + std::to_string(e);
        for (int s = 0; s <= last; ++s) check(a.compcost_at(e, s).total, b.compcost_at(e, s).total, where);
        check(a.compcost(e).total, b.compcost(e).total, where);
        check(a.maint_cost(e).total, b.maint_cost(e).total, where);
        for (int i = 1; i <= last; ++i) {
          if (!mb.node(e).diff[i].null) check(a.diff_cost(e, i).total, b.diff_cost(e, i).total, where);
        }
        optima += 3 + last;
      }
      a.set_materialized(view_set(big.roots));
      b.set_materialized(view_set(small.roots));
      for (int e : mb.topo_order()) {
        for (int s = 0; s <= last; ++s) flipped += b.compcost_at(e, s).total + 1e-9 < a.compcost_at(e, s).total ? 1 : 0;
      }
    }
  }
  RunConfig cfg;
  cfg.workload = "join5";
  cfg.update_pct = 5;
  cfg.cost_overrides = {{"buffer_blocks", 8000}};
  Report big = run(cfg);
  cfg.cost_overrides = {{"buffer_blocks", 1000}};
  Report small = run(cfg);
  double ratio_big = big.total_cost / big.nogreedy_cost, ratio_small = small.total_cost / small.nogreedy_cost;
  if (ratio_small > ratio_big + 1e-12) out.pass = false;
  std::ostringstream d;
  d << plans << " enumerated plans and " << optima << " optimal costs never cheaper at 1000 blocks; join5 at 5% greedy:nogreedy "
    << ratio_big << " at 8000 blocks, " << ratio_small << " at 1000 (" << flipped
    << " stored-stage costs fell with views materialized, from views turning incremental)";
  if (!out.detail.empty()) d << "; cost fell at " << out.detail;
  out.detail = d.str();
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "plan optimality against enumeration", plan_optimality},
      {2, "maintenance correctness", maintenance_correctness},
      {3, "incremental cost update equivalence", incremental_equivalence},
      {4, "monotonicity shortcut", monotonicity},
      {5, "never worse and shared join selected", never_worse},
      {6, "temporary/permanent crossover", crossover},
      {7, "foreign key pruning soundness", fk_pruning},
      {8, "buffer size direction", buffer_direction},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
