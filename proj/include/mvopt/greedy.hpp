#pragma once

#include <optional>
#include <vector>

#include "mvopt/dag.hpp"
#include "mvopt/optimizer.hpp"

namespace mvopt {

struct Candidate {
  ResultId id;
  double last_benefit = 0;
  bool stale = true;
  double size_blocks = 1;
};

struct GreedyOptions {
  bool incremental = true;
  bool monotone = true;
  std::optional<double> budget_blocks;
  bool prune_candidates = false;
};

struct GreedyCounters {
  std::size_t benefit_computations = 0;
  std::size_t node_visits = 0;
  std::size_t admissions = 0;
  std::size_t rounds = 0;
  /// Eager runs only: no candidate's benefit ever rose between rounds.
  bool monotonicity_held = true;
};

struct Admission {
  ResultId id;
  double benefit = 0;
};

struct GreedyResult {
  MaterializationSet chosen;
  std::vector<Admission> trace;
  GreedyCounters counters;
  Cost initial_cost;
  Cost total_cost;
};

MaterializationSet view_set(const std::vector<int>& view_roots);

std::vector<Candidate> gen_candidates(const Memo& memo, const std::vector<int>& view_roots);

/// cost(X, X) - cost(X + x, X + x), evaluated on the optimizer's current M = X.
double benefit(Optimizer& opt, const ResultId& x, bool incremental, std::size_t* visits = nullptr);

/// Runs the greedy loop on `opt`, which is left holding the chosen set.
GreedyResult greedy_select(Optimizer& opt, const std::vector<int>& view_roots,
                           std::vector<Candidate> candidates, const GreedyOptions& opts);

/// Differentials and recompute-mode full results are temporary; views and
/// incrementally maintained full results are permanent.
void classify(MaterializationSet& x, const Optimizer& opt, const std::vector<int>& view_roots);

}  // namespace mvopt
