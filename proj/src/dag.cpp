#include "mvopt/dag.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "mvopt/error.hpp"

namespace mvopt {

namespace {

std::string alias_of(const std::string& column) { return column.substr(0, column.find('.')); }

void erase_value(std::vector<int>& v, int value) { v.erase(std::remove(v.begin(), v.end(), value), v.end()); }

std::string join_strings(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

Memo::Memo(Catalog catalog, std::size_t node_cap)
    : catalog_(std::move(catalog)), cost_model_(catalog_.params()), node_cap_(node_cap) {}

int Memo::resolve(int id) const {
  while (nodes_[id].forward >= 0) id = nodes_[id].forward;
  return id;
}

std::size_t Memo::equiv_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const EquivNode& n) { return n.live(); }));
}

std::size_t Memo::op_count() const {
  return static_cast<std::size_t>(std::count_if(ops_.begin(), ops_.end(), [](const OpNode& o) { return o.live; }));
}

bool Memo::is_scan(int id) const {
  const EquivNode& n = node(id);
  return !n.children.empty() && ops_[n.children.front()].desc.kind == OpKind::Scan;
}

bool Memo::is_leaf(int id) const { return is_scan(id); }

int Memo::new_node() {
  if (equiv_count() >= node_cap_)
    throw BudgetExceeded("memo exceeded " + std::to_string(node_cap_) + " equivalence nodes");
  EquivNode n;
  n.id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

std::string Memo::op_key(const OpDesc& desc, const std::vector<int>& inputs) const {
  std::string key = desc.to_string() + "(";
  for (std::size_t i = 0; i < inputs.size(); ++i) key += (i ? "," : "") + std::to_string(inputs[i]);
  return key + ")";
}

int Memo::add_op(OpDesc desc, std::vector<int> inputs, int output) {
  OpNode op;
  op.id = static_cast<int>(ops_.size());
  op.desc = std::move(desc);
  op.inputs = std::move(inputs);
  op.output = output;
  op.key = op_key(op.desc, op.inputs);
  op_index_[op.key] = op.id;
  for (int in : op.inputs) nodes_[in].parents.push_back(op.id);
  nodes_[output].children.push_back(op.id);
  ops_.push_back(std::move(op));
  return ops_.back().id;
}

int Memo::lookup_or_create(OpDesc desc, std::vector<int> inputs) {
  for (auto& in : inputs) in = resolve(in);
  if (desc.kind == OpKind::Join) std::sort(inputs.begin(), inputs.end());
  auto it = op_index_.find(op_key(desc, inputs));
  if (it != op_index_.end()) return resolve(ops_[it->second].output);
  int n = new_node();
  int o = add_op(std::move(desc), std::move(inputs), n);
  init_node_from_op(n, ops_[o]);
  return n;
}

void Memo::init_node_from_op(int id, const OpNode& op) {
  EquivNode& n = nodes_[id];
  switch (op.desc.kind) {
    case OpKind::Scan: {
      std::string leaf = op.desc.relation;
      if (op.desc.alias != op.desc.relation) leaf += " AS " + op.desc.alias;
      n.leaves = {leaf};
      n.alias_rel = {{op.desc.alias, op.desc.relation}};
      n.alias_leaf = {{op.desc.alias, id}};
      n.signature = leaf;
      break;
    }
    case OpKind::Select: {
      const EquivNode& c = nodes_[op.inputs[0]];
      std::vector<std::string> preds;
      for (const auto& p : op.desc.predicates) preds.push_back(p.to_string());
      n.leaves = {c.leaves.front() + "[" + join_strings(preds, " AND ") + "]"};
      n.alias_rel = c.alias_rel;
      n.alias_leaf = {{c.alias_rel.begin()->first, id}};
      n.signature = n.leaves.front();
      break;
    }
    case OpKind::Join: {
      const EquivNode& a = nodes_[op.inputs[0]];
      const EquivNode& b = nodes_[op.inputs[1]];
      n.leaves = a.leaves;
      n.leaves.insert(n.leaves.end(), b.leaves.begin(), b.leaves.end());
      std::sort(n.leaves.begin(), n.leaves.end());
      n.alias_rel = a.alias_rel;
      n.alias_rel.insert(b.alias_rel.begin(), b.alias_rel.end());
      n.alias_leaf = a.alias_leaf;
      n.alias_leaf.insert(b.alias_leaf.begin(), b.alias_leaf.end());
      n.join_preds = a.join_preds;
      n.join_preds.insert(n.join_preds.end(), b.join_preds.begin(), b.join_preds.end());
      n.join_preds.insert(n.join_preds.end(), op.desc.join_predicates.begin(), op.desc.join_predicates.end());
      std::sort(n.join_preds.begin(), n.join_preds.end());
      n.join_preds.erase(std::unique(n.join_preds.begin(), n.join_preds.end()), n.join_preds.end());
      std::vector<std::string> preds;
      for (const auto& p : n.join_preds) preds.push_back(p.to_string());
      n.signature = "{" + join_strings(n.leaves, ",") + "}[" + join_strings(preds, " AND ") + "]";
      break;
    }
    case OpKind::Aggregate: {
      const EquivNode& c = nodes_[op.inputs[0]];
      n.aggregate = true;
      n.leaves = c.leaves;
      n.alias_rel = c.alias_rel;
      n.alias_leaf = c.alias_leaf;
      n.join_preds = c.join_preds;
      n.signature = op.desc.to_string() + "(" + c.signature + ")";
      break;
    }
  }
}

int Memo::insert_expression(const ExprPtr& expr) {
  OpDesc desc;
  std::vector<int> inputs;
  switch (expr->kind) {
    case LogicalExpr::Kind::Scan:
      if (catalog_.find(expr->relation) == nullptr)
        throw UnknownRelation("unknown relation '" + expr->relation + "'");
      desc.kind = OpKind::Scan;
      desc.relation = expr->relation;
      desc.alias = expr->alias;
      break;
    case LogicalExpr::Kind::Select:
      desc.kind = OpKind::Select;
      desc.predicates = expr->predicates;
      std::sort(desc.predicates.begin(), desc.predicates.end());
      inputs.push_back(insert_expression(expr->inputs[0]));
      break;
    case LogicalExpr::Kind::Join:
      desc.kind = OpKind::Join;
      desc.join_predicates = expr->join_predicates;
      std::sort(desc.join_predicates.begin(), desc.join_predicates.end());
      inputs.push_back(insert_expression(expr->inputs[0]));
      inputs.push_back(insert_expression(expr->inputs[1]));
      break;
    case LogicalExpr::Kind::Aggregate:
      desc.kind = OpKind::Aggregate;
      desc.group_columns = expr->group_columns;
      desc.aggregates = expr->aggregates;
      inputs.push_back(insert_expression(expr->inputs[0]));
      break;
  }
  annotated_ = false;
  return lookup_or_create(std::move(desc), std::move(inputs));
}

int Memo::join_nodes(int a, int b, const std::vector<JoinPredicate>& scope) {
  const EquivNode& na = nodes_[a];
  const EquivNode& nb = nodes_[b];
  std::vector<JoinPredicate> crossing;
  for (const auto& p : scope) {
    std::string l = alias_of(p.left), r = alias_of(p.right);
    if ((na.alias_rel.count(l) && nb.alias_rel.count(r)) || (na.alias_rel.count(r) && nb.alias_rel.count(l)))
      crossing.push_back(p);
  }
  if (crossing.empty()) return -1;
  OpDesc desc;
  desc.kind = OpKind::Join;
  desc.join_predicates = std::move(crossing);
  return lookup_or_create(std::move(desc), {a, b});
}

bool Memo::add_join_op(int target, int a, int b, const std::vector<JoinPredicate>& scope) {
  std::vector<JoinPredicate> crossing;
  for (const auto& p : scope) {
    std::string l = alias_of(p.left), r = alias_of(p.right);
    if ((nodes_[a].alias_rel.count(l) && nodes_[b].alias_rel.count(r)) ||
        (nodes_[a].alias_rel.count(r) && nodes_[b].alias_rel.count(l)))
      crossing.push_back(p);
  }
  OpDesc desc;
  desc.kind = OpKind::Join;
  desc.join_predicates = std::move(crossing);
  std::vector<int> inputs{std::min(a, b), std::max(a, b)};
  auto it = op_index_.find(op_key(desc, inputs));
  if (it != op_index_.end()) {
    int out = resolve(ops_[it->second].output);
    if (out == target) return false;
    unify(target, out);
    return true;
  }
  add_op(std::move(desc), std::move(inputs), target);
  return true;
}

void Memo::unify(int a0, int b0) {
  std::vector<std::pair<int, int>> work{{a0, b0}};
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    a = resolve(a);
    b = resolve(b);
    if (a == b) continue;
    int keep = std::min(a, b), gone = std::max(a, b);
    for (int o : nodes_[gone].children) {
      ops_[o].output = keep;
      nodes_[keep].children.push_back(o);
    }
    nodes_[gone].children.clear();
    std::vector<int> parents = std::move(nodes_[gone].parents);
    nodes_[gone].parents.clear();
    nodes_[gone].forward = keep;
    for (int p : parents) {
      OpNode& op = ops_[p];
      if (!op.live) continue;
      op_index_.erase(op.key);
      for (auto& in : op.inputs) in = resolve(in);
      if (op.desc.kind == OpKind::Join) std::sort(op.inputs.begin(), op.inputs.end());
      op.key = op_key(op.desc, op.inputs);
      auto it = op_index_.find(op.key);
      if (it != op_index_.end() && it->second != p) {
        op.live = false;
        int out = resolve(op.output);
        erase_value(nodes_[out].children, p);
        for (int in : op.inputs) erase_value(nodes_[in].parents, p);
        work.emplace_back(resolve(ops_[it->second].output), out);
      } else {
        op_index_[op.key] = p;
        nodes_[keep].parents.push_back(p);
      }
    }
  }
}

void Memo::expand() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      if (!ops_[k].live || ops_[k].desc.kind != OpKind::Join) continue;
      for (int side = 0; side < 2 && ops_[k].live; ++side) {
        int x = resolve(ops_[k].inputs[side]);
        int y = resolve(ops_[k].inputs[1 - side]);
        std::vector<int> xchildren = nodes_[x].children;
        for (int c : xchildren) {
          if (!ops_[c].live || ops_[c].desc.kind != OpKind::Join) continue;
          for (int sub = 0; sub < 2; ++sub) {
            int x1 = resolve(ops_[c].inputs[sub]);
            int x2 = resolve(ops_[c].inputs[1 - sub]);
            int target = resolve(ops_[k].output);
            std::vector<JoinPredicate> scope = nodes_[target].join_preds;
            int inner = join_nodes(x2, resolve(y), scope);
            if (inner < 0) continue;
            if (add_join_op(target, resolve(x1), inner, scope)) changed = true;
          }
        }
      }
    }
  }
  compute_topo();
  annotated_ = false;
}

void Memo::compute_topo() {
  topo_.clear();
  std::vector<char> state(nodes_.size(), 0);
  std::function<void(int)> visit = [&](int id) {
    if (state[id]) return;
    state[id] = 1;
    for (int o : nodes_[id].children) {
      for (int in : ops_[o].inputs) visit(resolve(in));
    }
    nodes_[id].topo = static_cast<int>(topo_.size());
    topo_.push_back(id);
  };
  for (const auto& n : nodes_) {
    if (n.live()) visit(n.id);
  }
  for (auto& n : nodes_) std::sort(n.children.begin(), n.children.end());
  for (auto& n : nodes_) std::sort(n.parents.begin(), n.parents.end());
}

Stats Memo::leaf_join_stats(const EquivNode& n, int stage) const {
  double card = 1, bytes = 0;
  std::map<std::string, double> distinct;
  for (const auto& [alias, leaf] : n.alias_leaf) {
    const Stats& s = nodes_[leaf].stage_props[stage];
    card *= s.cardinality;
    bytes += s.tuple_bytes;
    distinct.insert(s.distinct.begin(), s.distinct.end());
  }
  for (const auto& p : n.join_preds) {
    const Stats& l = nodes_[n.alias_leaf.at(alias_of(p.left))].stage_props[stage];
    const Stats& r = nodes_[n.alias_leaf.at(alias_of(p.right))].stage_props[stage];
    card *= cost_model_.join_selectivity(p, l, r);
  }
  return cost_model_.make_stats(card, bytes, std::move(distinct));
}

Stats Memo::leaf_join_delta(const EquivNode& n, int index) const {
  const std::string& rel = catalog_.relation(decode_update(index).relation).name;
  double total = 0, bytes = 0;
  std::map<std::string, double> distinct;
  for (const auto& [alias, leaf] : n.alias_leaf) {
    const Stats& s = nodes_[leaf].stage_props[index - 1];
    bytes += s.tuple_bytes;
    distinct.insert(s.distinct.begin(), s.distinct.end());
  }
  for (const auto& [alias, leaf] : n.alias_leaf) {
    if (n.alias_rel.at(alias) != rel) continue;
    double term = nodes_[leaf].diff[index].delta_props.cardinality;
    bool seen_self = false;
    for (const auto& [other, other_leaf] : n.alias_leaf) {
      if (other == alias) {
        seen_self = true;
        continue;
      }
      bool updated = n.alias_rel.at(other) == rel && !seen_self;
      term *= nodes_[other_leaf].stage_props[updated ? index : index - 1].cardinality;
    }
    total += term;
  }
  for (const auto& p : n.join_preds) {
    const Stats& l = nodes_[n.alias_leaf.at(alias_of(p.left))].stage_props[index - 1];
    const Stats& r = nodes_[n.alias_leaf.at(alias_of(p.right))].stage_props[index - 1];
    total *= cost_model_.join_selectivity(p, l, r);
  }
  return cost_model_.make_stats(total, bytes, std::move(distinct));
}

void Memo::annotate_node(int id) {
  EquivNode& n = nodes_[id];
  const OpNode& first = ops_[n.children.front()];
  const int last = update_count();
  const int fin = final_stage();
  n.stage_props.assign(fin + 1, Stats{});
  n.diff.assign(last + 1, DiffEntry{});
  n.base_deps.clear();
  n.schema.clear();

  if (first.desc.kind == OpKind::Scan) {
    std::size_t rel = *catalog_.index_of(first.desc.relation);
    n.base_deps = {rel};
    for (const auto& c : catalog_.relation(rel).columns) n.schema.push_back({first.desc.alias + "." + c.name, c.type});
  } else {
    for (int in : first.inputs) {
      const auto& deps = nodes_[resolve(in)].base_deps;
      n.base_deps.insert(deps.begin(), deps.end());
    }
    const EquivNode& c0 = nodes_[resolve(first.inputs[0])];
    if (first.desc.kind == OpKind::Select) {
      n.schema = c0.schema;
    } else if (first.desc.kind == OpKind::Join) {
      n.schema = c0.schema;
      const auto& right = nodes_[resolve(first.inputs[1])].schema;
      n.schema.insert(n.schema.end(), right.begin(), right.end());
      std::sort(n.schema.begin(), n.schema.end(),
                [](const ColumnRef& a, const ColumnRef& b) { return a.name < b.name; });
    } else {
      auto type_of = [&](const std::string& name) {
        for (const auto& c : c0.schema) {
          if (c.name == name) return c.type;
        }
        return ColumnType::Int;
      };
      for (const auto& g : first.desc.group_columns) n.schema.push_back({g, type_of(g)});
      for (const auto& a : first.desc.aggregates) {
        ColumnType t = ColumnType::Int;
        if (a.func == AggFunc::Sum) t = type_of(a.column);
        if (a.func == AggFunc::Avg) t = ColumnType::Decimal;
        n.schema.push_back({a.output_name(), t});
      }
      n.schema.push_back({kCountColumn, ColumnType::Int});
    }
  }

  for (int s = 0; s <= last; ++s) {
    switch (first.desc.kind) {
      case OpKind::Scan: {
        std::size_t rel = *catalog_.index_of(first.desc.relation);
        n.stage_props[s] = cost_model_.relation_stats(
            catalog_.relation(rel), first.desc.alias,
            static_cast<double>(staged_cardinality(catalog_, spec_, rel, s)));
        break;
      }
      case OpKind::Select:
      case OpKind::Aggregate: {
        Stats in[1] = {nodes_[resolve(first.inputs[0])].stage_props[s]};
        n.stage_props[s] = cost_model_.estimate_props(first.desc, in);
        break;
      }
      case OpKind::Join:
        n.stage_props[s] = leaf_join_stats(n, s);
        break;
    }
  }
  n.stage_props[fin] = n.stage_props[last];

  for (int i = 1; i <= last; ++i) {
    DiffEntry& e = n.diff[i];
    e.update_index = i;
    e.staged_full_props = n.stage_props[i - 1];
    e.null = n.base_deps.count(decode_update(i).relation) == 0;
    if (e.null) continue;
    switch (first.desc.kind) {
      case OpKind::Scan: {
        std::size_t rel = *catalog_.index_of(first.desc.relation);
        e.delta_props = cost_model_.delta_relation_stats(catalog_.relation(rel), first.desc.alias,
                                                         delta_stats(catalog_, spec_, i));
        break;
      }
      case OpKind::Select: {
        const EquivNode& c = nodes_[resolve(first.inputs[0])];
        const Stats& d = c.diff[i].delta_props;
        double card = d.cardinality;
        for (const auto& p : first.desc.predicates) card *= cost_model_.selectivity(p, c.stage_props[i - 1]);
        auto distinct = d.distinct;
        for (const auto& p : first.desc.predicates) {
          if (p.op == CompareOp::Eq) distinct[p.column] = 1;
        }
        e.delta_props = cost_model_.make_stats(card, d.tuple_bytes, std::move(distinct));
        break;
      }
      case OpKind::Aggregate: {
        Stats in[1] = {nodes_[resolve(first.inputs[0])].diff[i].delta_props};
        e.delta_props = cost_model_.estimate_props(first.desc, in);
        break;
      }
      case OpKind::Join:
        e.delta_props = leaf_join_delta(n, i);
        break;
    }
  }
}

void Memo::annotate_op(OpNode& op) {
  const int last = update_count();
  const int fin = final_stage();
  const EquivNode& out = nodes_[resolve(op.output)];
  std::vector<int> in;
  for (int x : op.inputs) in.push_back(resolve(x));

  op.exec.assign(fin + 1, Cost{});
  for (int s = 0; s <= fin; ++s) {
    if (op.desc.kind == OpKind::Scan) {
      Stats inputs[1] = {out.stage_props[s]};
      bool pipelined[1] = {false};
      op.exec[s] = cost_model_.exec_cost(op.desc, inputs, pipelined, out.stage_props[s]);
    } else {
      std::vector<Stats> inputs;
      for (int x : in) inputs.push_back(nodes_[x].stage_props[s]);
      bool pipelined[2] = {true, true};
      op.exec[s] = cost_model_.exec_cost(op.desc, inputs, std::span<const bool>(pipelined, in.size()),
                                         out.stage_props[s]);
    }
  }

  op.diff.assign(last + 1, OpDiff{});
  for (int i = 1; i <= last; ++i) {
    OpDiff& od = op.diff[i];
    od.null = out.diff[i].null;
    if (od.null || op.desc.kind == OpKind::Scan) continue;
    std::size_t rel = decode_update(i).relation;
    if (op.desc.kind != OpKind::Join) {
      DiffTerm t;
      t.diff_input = 0;
      Stats inputs[1] = {nodes_[in[0]].diff[i].delta_props};
      bool pipelined[1] = {true};
      t.props = op.desc.kind == OpKind::Select ? out.diff[i].delta_props
                                               : cost_model_.estimate_props(op.desc, inputs);
      t.local = cost_model_.exec_cost(op.desc, inputs, pipelined, t.props);
      od.terms.push_back(std::move(t));
      continue;
    }
    bool dep0 = nodes_[in[0]].base_deps.count(rel) > 0;
    bool dep1 = nodes_[in[1]].base_deps.count(rel) > 0;
    auto make_term = [&](int diff_input, int stage, bool fresh) {
      DiffTerm t;
      t.diff_input = diff_input;
      t.full_input = 1 - diff_input;
      t.full_stage = stage;
      t.fresh = fresh;
      Stats inputs[2];
      inputs[diff_input] = nodes_[in[diff_input]].diff[i].delta_props;
      inputs[1 - diff_input] = nodes_[in[1 - diff_input]].stage_props[stage];
      bool pipelined[2] = {true, true};
      t.props = cost_model_.estimate_props(op.desc, inputs);
      t.local = cost_model_.exec_cost(op.desc, inputs, pipelined, t.props);
      return t;
    };
    if (dep0 && dep1) {
      od.terms.push_back(make_term(0, i - 1, false));
      od.terms.push_back(make_term(1, i, true));
      od.union_cost = cost_model_.union_cost(od.terms[0].props, od.terms[1].props);
    } else {
      od.terms.push_back(make_term(dep0 ? 0 : 1, i - 1, false));
    }
  }
}

void Memo::compute_empty_flags() {
  const int last = update_count();
  for (int id : topo_) {
    EquivNode& n = nodes_[id];
    for (int i = 1; i <= last; ++i) {
      DiffEntry& e = n.diff[i];
      if (e.null) continue;
      if (is_scan(id)) {
        e.empty = e.delta_props.cardinality <= 0;
      } else {
        e.empty = false;
        for (int o : n.children) {
          OpDiff& od = ops_[o].diff[i];
          bool all_empty = true;
          for (auto& t : od.terms) {
            t.empty = t.pruned || nodes_[resolve(ops_[o].inputs[t.diff_input])].diff[i].empty;
            all_empty = all_empty && t.empty;
          }
          od.empty = all_empty;
          e.empty = e.empty || all_empty;
        }
      }
      if (e.empty) e.delta_props = cost_model_.make_stats(0, e.delta_props.tuple_bytes, e.delta_props.distinct);
    }
  }
  for (int id : topo_) {
    for (int o : nodes_[id].children) {
      for (int i = 1; i <= last; ++i) {
        if (nodes_[id].diff[i].empty) ops_[o].diff[i].empty = true;
      }
    }
  }
}

void Memo::annotate(const UpdateSpec& spec) {
  if (static_cast<int>(spec.per_relation.size()) * 2 != update_count())
    throw ValidationError("update specification does not match the catalog");
  spec_ = spec;
  if (topo_.empty() || topo_.size() != equiv_count()) compute_topo();
  for (int id : topo_) annotate_node(id);
  for (auto& op : ops_) {
    if (op.live) annotate_op(op);
  }
  compute_empty_flags();
  annotated_ = true;
}

bool Memo::fk_prunes(const OpNode& op, const DiffTerm& term, int index) const {
  if (term.full_input < 0) return false;
  UpdateRef ref = decode_update(index);
  if (ref.kind != UpdateKind::Insert) return false;
  const std::string& s = catalog_.relation(ref.relation).name;
  const EquivNode& d = node(op.inputs[term.diff_input]);
  const EquivNode& f = node(op.inputs[term.full_input]);
  for (const auto& fk : catalog_.foreign_keys()) {
    if (fk.to_rel != s || fk.from_rel == s) continue;
    std::vector<std::string> sa;
    for (const auto& [alias, rel] : d.alias_rel) {
      if (rel == s) sa.push_back(alias);
    }
    if (sa.size() != 1) continue;
    std::size_t r = *catalog_.index_of(fk.from_rel);
    bool ordered = r > ref.relation ||
                   delta_stats(catalog_, spec_, update_index(r, UpdateKind::Insert)).cardinality == 0;
    if (!ordered) continue;
    for (const auto& [ra, rel] : f.alias_rel) {
      if (rel != fk.from_rel) continue;
      bool all = true;
      for (std::size_t k = 0; k < fk.from_cols.size() && all; ++k) {
        auto p = JoinPredicate::make(ra + "." + fk.from_cols[k], sa[0] + "." + fk.to_cols[k]);
        all = std::find(op.desc.join_predicates.begin(), op.desc.join_predicates.end(), p) !=
              op.desc.join_predicates.end();
      }
      if (all) return true;
    }
  }
  return false;
}

void Memo::prune_fk_empty() {
  if (!annotated_) throw ValidationError("prune_fk_empty requires an annotated memo");
  if (catalog_.foreign_keys().empty()) return;
  for (auto& op : ops_) {
    if (!op.live || op.desc.kind != OpKind::Join) continue;
    for (int i = 1; i <= update_count(); ++i) {
      for (auto& t : op.diff[i].terms) {
        if (fk_prunes(op, t, i)) {
          t.pruned = true;
          t.props = cost_model_.make_stats(0, t.props.tuple_bytes, t.props.distinct);
        }
      }
    }
  }
  compute_empty_flags();
}

std::string Memo::to_text() const {
  std::ostringstream out;
  for (int id : topo_) {
    const EquivNode& n = nodes_[id];
    out << "E" << id << " sig=" << n.signature << " deps={";
    bool first = true;
    for (std::size_t r : n.base_deps) {
      out << (first ? "" : ",") << catalog_.relation(r).name;
      first = false;
    }
    out << "}";
    if (!n.stage_props.empty()) out << " card=" << n.props().cardinality << " blocks=" << n.props().blocks;
    out << "\n";
    for (int o : n.children) {
      const OpNode& op = ops_[o];
      out << "  O" << o << " " << op.desc.to_string() << " (";
      for (std::size_t k = 0; k < op.inputs.size(); ++k) out << (k ? ", " : "") << "E" << resolve(op.inputs[k]);
      out << ")\n";
    }
  }
  return out.str();
}

}  // namespace mvopt
