#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvopt/algebra.hpp"
#include "mvopt/catalog.hpp"
#include "mvopt/costmodel.hpp"

namespace mvopt {

/// One differential term of an operation: the diff input joined (or filtered,
/// or grouped) against at most one full input.
struct DiffTerm {
  int diff_input = 0;   // position in OpNode::inputs
  int full_input = -1;  // position, or -1
  int full_stage = 0;
  bool fresh = false;   // full input evaluated from base relations at full_stage
  bool pruned = false;
  bool empty = false;
  Stats props;
  Cost local;
};

struct OpDiff {
  bool null = true;
  bool empty = false;
  std::vector<DiffTerm> terms;
  Cost union_cost;
};

struct OpNode {
  int id = 0;
  OpDesc desc;
  std::vector<int> inputs;
  int output = 0;
  std::string key;
  bool live = true;
  std::vector<Cost> exec;     // per stage 0..2n+1
  std::vector<OpDiff> diff;   // per update index; [0] unused
};

struct DiffEntry {
  int update_index = 0;
  bool null = true;
  bool empty = false;
  Stats delta_props;
  Stats staged_full_props;
};

struct EquivNode {
  int id = 0;
  std::string signature;
  std::vector<int> children;
  std::vector<int> parents;
  int forward = -1;

  bool aggregate = false;
  std::vector<std::string> leaves;               // sorted multiset of leaf units
  std::map<std::string, std::string> alias_rel;  // alias -> relation
  std::map<std::string, int> alias_leaf;         // alias -> leaf equivalence node
  std::vector<JoinPredicate> join_preds;

  std::set<std::size_t> base_deps;
  std::vector<ColumnRef> schema;
  int topo = 0;
  std::vector<Stats> stage_props;  // 0..2n, then the final stage
  std::vector<DiffEntry> diff;     // [0] unused

  bool live() const { return forward < 0; }
  const Stats& props() const { return stage_props.back(); }
};

class Memo {
 public:
  explicit Memo(Catalog catalog, std::size_t node_cap = 200000);

  const Catalog& catalog() const { return catalog_; }
  const CostModel& cost_model() const { return cost_model_; }
  const UpdateSpec& update_spec() const { return spec_; }

  int insert_expression(const ExprPtr& expr);
  void expand();
  void annotate(const UpdateSpec& spec);
  void prune_fk_empty();

  int resolve(int id) const;
  const EquivNode& node(int id) const { return nodes_[resolve(id)]; }
  const OpNode& op(int id) const { return ops_[id]; }
  const std::vector<EquivNode>& raw_nodes() const { return nodes_; }
  const std::vector<OpNode>& raw_ops() const { return ops_; }

  /// Live equivalence nodes, children before parents.
  const std::vector<int>& topo_order() const { return topo_; }
  std::size_t equiv_count() const;
  std::size_t op_count() const;
  bool annotated() const { return annotated_; }

  int update_count() const { return catalog_.update_count(); }
  int final_stage() const { return update_count() + 1; }
  bool is_leaf(int id) const;
  bool is_scan(int id) const;
  std::size_t leaf_count(int id) const { return node(id).leaves.size(); }

  std::string to_text() const;

 private:
  int new_node();
  int add_op(OpDesc desc, std::vector<int> inputs, int output);
  std::string op_key(const OpDesc& desc, const std::vector<int>& inputs) const;
  int lookup_or_create(OpDesc desc, std::vector<int> inputs);
  void init_node_from_op(int node, const OpNode& op);
  int join_nodes(int a, int b, const std::vector<JoinPredicate>& scope);
  bool add_join_op(int target, int a, int b, const std::vector<JoinPredicate>& scope);
  void unify(int a, int b);
  void compute_topo();
  void annotate_node(int id);
  void annotate_op(OpNode& op);
  void compute_empty_flags();
  bool fk_prunes(const OpNode& op, const DiffTerm& term, int index) const;
  Stats leaf_join_stats(const EquivNode& n, int stage) const;
  Stats leaf_join_delta(const EquivNode& n, int index) const;

  Catalog catalog_;
  CostModel cost_model_;
  UpdateSpec spec_;
  std::size_t node_cap_;
  std::vector<EquivNode> nodes_;
  std::vector<OpNode> ops_;
  std::unordered_map<std::string, int> op_index_;
  std::vector<int> topo_;
  bool annotated_ = false;
};

}  // namespace mvopt
