#include "mvopt/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace mvopt {

namespace {

struct Ranked {
  double key = 0;
  double benefit = 0;
  double size = 1;
  ResultId id;
  std::size_t round = 0;
};

// True when a ranks strictly ahead of b.
bool ahead(const Ranked& a, const Ranked& b) {
  if (a.key != b.key) return a.key > b.key;
  if (a.size != b.size) return a.size < b.size;
  if (a.id.node != b.id.node) return a.id.node < b.id.node;
  return a.id.update_index < b.id.update_index;
}

struct Behind {
  bool operator()(const Ranked& a, const Ranked& b) const { return ahead(b, a); }
};

}  // namespace

MaterializationSet view_set(const std::vector<int>& view_roots) {
  MaterializationSet m;
  for (int v : view_roots) m.insert({v, 0}, MatTag::Permanent);
  return m;
}

std::vector<Candidate> gen_candidates(const Memo& memo, const std::vector<int>& view_roots) {
  std::set<int> views;
  for (int v : view_roots) views.insert(memo.resolve(v));
  std::vector<Candidate> out;
  for (int e : memo.topo_order()) {
    if (memo.is_scan(e)) continue;
    const EquivNode& n = memo.node(e);
    if (!views.count(e)) out.push_back({{e, 0}, 0, true, std::max(1.0, n.props().blocks)});
    for (int i = 1; i <= memo.update_count(); ++i) {
      if (n.diff[i].null || n.diff[i].empty) continue;
      out.push_back({{e, i}, 0, true, std::max(1.0, n.diff[i].delta_props.blocks)});
    }
  }
  return out;
}

double benefit(Optimizer& opt, const ResultId& x, bool incremental, std::size_t* visits) {
  const double before = opt.total_cost().total;
  double after = 0;
  std::size_t v = 0;
  if (incremental) {
    opt.begin_trial();
    v = opt.add(x);
    after = opt.total_cost().total;
    opt.rollback();
  } else {
    auto snap = opt.snapshot();
    opt.insert_raw(x);
    v = opt.recompute_all();
    after = opt.total_cost().total;
    opt.restore(snap);
  }
  if (visits != nullptr) *visits += v;
  return before - after;
}

GreedyResult greedy_select(Optimizer& opt, const std::vector<int>& view_roots, std::vector<Candidate> candidates,
                           const GreedyOptions& opts) {
  GreedyResult result;
  opt.set_materialized(view_set(view_roots));
  result.initial_cost = opt.total_cost();
  GreedyCounters& ctr = result.counters;
  double budget = opts.budget_blocks.value_or(0);
  const bool budgeted = opts.budget_blocks.has_value();

  auto eval = [&](const Candidate& c) {
    ++ctr.benefit_computations;
    return benefit(opt, c.id, opts.incremental, &ctr.node_visits);
  };
  auto rank = [&](const Candidate& c, double b, std::size_t round) {
    Ranked r;
    r.benefit = b;
    r.size = c.size_blocks;
    r.key = budgeted ? b / c.size_blocks : b;
    r.id = c.id;
    r.round = round;
    return r;
  };
  auto fits = [&](double size) { return !budgeted || size <= budget; };
  auto admit = [&](const Ranked& r) {
    if (opts.incremental) {
      ctr.node_visits += opt.add(r.id);
    } else {
      opt.insert_raw(r.id);
      ctr.node_visits += opt.recompute_all();
    }
    if (budgeted) budget -= r.size;
    result.trace.push_back({r.id, r.benefit});
    ++ctr.admissions;
  };

  if (opts.prune_candidates) {
    std::vector<Candidate> kept;
    for (auto& c : candidates) {
      if (eval(c) > 0) kept.push_back(c);
    }
    candidates = std::move(kept);
  }

  if (!opts.monotone) {
    std::vector<Candidate> remaining = candidates;
    while (!remaining.empty()) {
      ++ctr.rounds;
      std::optional<Ranked> best;
      std::size_t best_pos = 0;
      for (std::size_t k = 0; k < remaining.size(); ++k) {
        Candidate& c = remaining[k];
        if (!fits(c.size_blocks)) continue;
        double b = eval(c);
        if (!c.stale && b > c.last_benefit + 1e-9 * std::max(1.0, std::abs(c.last_benefit)))
          ctr.monotonicity_held = false;
        c.last_benefit = b;
        c.stale = false;
        Ranked r = rank(c, b, ctr.rounds);
        if (!best || ahead(r, *best)) {
          best = r;
          best_pos = k;
        }
      }
      if (!best || best->benefit <= 0) break;
      admit(*best);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
  } else {
    std::priority_queue<Ranked, std::vector<Ranked>, Behind> heap;
    std::map<ResultId, Candidate> by_id;
    std::size_t round = 0;
    for (auto& c : candidates) {
      if (!fits(c.size_blocks)) continue;
      double b = eval(c);
      c.last_benefit = b;
      c.stale = false;
      by_id[c.id] = c;
      heap.push(rank(c, b, round));
    }
    ctr.rounds = 1;
    while (!heap.empty()) {
      Ranked top = heap.top();
      heap.pop();
      if (!fits(top.size)) continue;
      if (top.round != round) {
        Candidate& c = by_id[top.id];
        double b = eval(c);
        c.last_benefit = b;
        top = rank(c, b, round);
        if (!heap.empty() && ahead(heap.top(), top)) {
          heap.push(top);
          continue;
        }
      }
      if (top.benefit <= 0) break;
      admit(top);
      ++round;
      ++ctr.rounds;
    }
  }

  result.chosen = opt.materialized();
  classify(result.chosen, opt, view_roots);
  result.total_cost = opt.total_cost();
  return result;
}

void classify(MaterializationSet& x, const Optimizer& opt, const std::vector<int>& view_roots) {
  std::set<int> views;
  for (int v : view_roots) views.insert(opt.memo().resolve(v));
  for (const auto& r : x.results()) {
    MatTag tag = MatTag::Temporary;
    if (r.update_index == 0 && (views.count(r.node) || opt.incremental(r.node))) tag = MatTag::Permanent;
    x.set_tag(r, tag);
  }
}

}  // namespace mvopt
