#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvopt/costmodel.hpp"
#include "mvopt/dag.hpp"

namespace mvopt {

/// A full result (update_index 0) or the differential of a node for one update.
struct ResultId {
  int node = 0;
  int update_index = 0;

  auto operator<=>(const ResultId&) const = default;
  bool operator==(const ResultId&) const = default;
};

enum class MatTag { Permanent, Temporary };

std::string to_string(MatTag tag);

class MaterializationSet {
 public:
  bool contains(const ResultId& r) const { return entries_.count(r) > 0; }
  void insert(const ResultId& r, MatTag tag = MatTag::Temporary) { entries_[r] = tag; }
  void erase(const ResultId& r) { entries_.erase(r); }
  MatTag tag(const ResultId& r) const { return entries_.at(r); }
  void set_tag(const ResultId& r, MatTag tag) { entries_.at(r) = tag; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<ResultId, MatTag>& entries() const { return entries_; }
  std::vector<ResultId> results() const;

  bool operator==(const MaterializationSet&) const = default;

 private:
  std::map<ResultId, MatTag> entries_;
};

struct PlanNode {
  enum class Kind { Compute, Reuse, Log, Term, Union, Empty };

  Kind kind = Kind::Compute;
  ResultId result;
  int stage = 0;       // full results only
  bool fresh = false;  // evaluated from base relations at `stage`, no reuse below
  int op = -1;
  int term = -1;
  Cost cost;           // cost of this subplan including its inputs
  std::vector<PlanNode> inputs;  // Compute/Term: op input order; Union: its terms
};

std::string plan_to_text(const PlanNode& plan, const Memo& memo);

class Optimizer {
 public:
  explicit Optimizer(const Memo& memo);

  const Memo& memo() const { return memo_; }
  const MaterializationSet& materialized() const { return m_; }

  /// Replaces M and rebuilds every cache from scratch.
  std::size_t set_materialized(MaterializationSet m);
  std::size_t recompute_all();

  /// Incremental cost update after adding or removing one result; returns node visits.
  std::size_t add(const ResultId& r, MatTag tag = MatTag::Temporary);
  std::size_t remove(const ResultId& r);

  /// Journaled trial: changes after begin_trial are undone by rollback.
  void begin_trial();
  void rollback();
  void commit();

  struct Snapshot;
  Snapshot snapshot() const;
  void restore(const Snapshot& snap);
  /// Changes M without touching caches; pair with recompute_all.
  void insert_raw(const ResultId& r, MatTag tag = MatTag::Temporary) { m_.insert(r, tag); }

  Cost compcost(int e) const;
  /// Cost of the full result after updates 1..stage, using results stored at that point.
  Cost compcost_at(int e, int stage) const;
  /// Cost without any reuse, on base relations after updates 1..stage.
  Cost fresh_cost(int e, int stage) const;
  Cost diff_cost(int e, int i) const;
  Cost total_diff_cost(int e) const;
  Cost merge_cost(int e) const;
  Cost maint_cost(int e) const;
  Cost recompute_cost(int e) const;
  bool incremental(int e) const;

  Cost mat_cost(const ResultId& r) const;
  Cost cost(const ResultId& x) const;
  Cost cost_of_set(const std::vector<ResultId>& s) const;
  Cost total_cost() const;
  const Stats& result_props(const ResultId& r) const;
  bool is_empty_result(const ResultId& r) const;

  PlanNode full_plan(int e, int stage) const;
  PlanNode fresh_plan(int e, int stage) const;
  PlanNode diff_plan(int e, int i) const;

  std::size_t visits() const { return visits_; }
  void reset_visits() { visits_ = 0; }

  struct Slot {
    Cost cost;
    int choice = -1;
    bool operator==(const Slot&) const = default;
  };
  struct NodeState {
    std::vector<Slot> slots;
    Cost maint;
    bool inc = false;
    bool operator==(const NodeState&) const = default;
  };
  struct Snapshot {
    MaterializationSet m;
    std::vector<NodeState> state;
  };
  const std::vector<NodeState>& state() const { return state_; }

 private:
  int slot_count() const { return 1 + 2 * memo_.update_count(); }
  int store_slot(int s) const { return 1 + s; }
  int diff_slot(int i) const { return memo_.update_count() + i; }

  Cost use_final(int y) const;
  Cost use_store(int y, int s) const;
  Cost use_diff(int y, int i) const;
  Cost reuse_cost(const ResultId& r, int stage) const;

  Slot eval_full(int e, int stage, bool store) const;
  Slot eval_diff(int e, int i) const;
  Cost term_cost(const OpNode& op, const DiffTerm& term, int i) const;
  void eval_node(int e, const std::vector<char>* dirty, std::vector<char>* changed_slots, bool* inc_changed);
  std::size_t propagate(int origin, bool full_change, int index);
  void touch(int e);

  PlanNode plan_compute(int e, int stage, bool store) const;
  PlanNode plan_use(int e, int stage) const;
  PlanNode plan_diff_use(int e, int i) const;

  const Memo& memo_;
  MaterializationSet m_;
  std::vector<NodeState> state_;
  std::vector<std::vector<Slot>> fresh_;
  std::vector<Cost> merge_;
  std::size_t visits_ = 0;

  bool trial_ = false;
  MaterializationSet trial_m_;
  std::unordered_map<int, NodeState> journal_;
};

}  // namespace mvopt
