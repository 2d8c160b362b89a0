#include "mvopt/optimizer.hpp"

#include <algorithm>
#include <sstream>

#include "mvopt/error.hpp"

namespace mvopt {

std::string to_string(MatTag tag) { return tag == MatTag::Permanent ? "permanent" : "temporary"; }

std::vector<ResultId> MaterializationSet::results() const {
  std::vector<ResultId> out;
  out.reserve(entries_.size());
  for (const auto& [r, tag] : entries_) out.push_back(r);
  return out;
}

Optimizer::Optimizer(const Memo& memo) : memo_(memo) {
  if (!memo.annotated()) throw ValidationError("optimizer requires an annotated memo");
  const std::size_t n = memo.raw_nodes().size();
  const int last = memo.update_count();
  state_.assign(n, NodeState{});
  fresh_.assign(n, {});
  merge_.assign(n, Cost{});
  const CostModel& cm = memo.cost_model();
  for (int e : memo.topo_order()) {
    const EquivNode& node = memo.node(e);
    state_[e].slots.assign(slot_count(), Slot{});
    fresh_[e].assign(last + 1, Slot{});
    for (int s = 0; s <= last; ++s) {
      Slot best;
      for (int o : node.children) {
        const OpNode& op = memo.op(o);
        Cost c = op.exec[s];
        for (int in : op.inputs) c += fresh_[memo.resolve(in)][s].cost;
        if (best.choice < 0 || c.total < best.cost.total) best = {c, o};
      }
      fresh_[e][s] = best;
    }
    std::vector<Stats> deltas;
    for (int i = 1; i <= last; ++i) {
      if (!node.diff[i].null && !node.diff[i].empty) deltas.push_back(node.diff[i].delta_props);
    }
    merge_[e] = cm.merge_cost(node.stage_props[0], deltas);
  }
  recompute_all();
  visits_ = 0;
}

Cost Optimizer::reuse_cost(const ResultId& r, int stage) const {
  const EquivNode& n = memo_.node(r.node);
  if (r.update_index == 0) return memo_.cost_model().reuse_cost(n.stage_props[stage]);
  return memo_.cost_model().reuse_cost(n.diff[r.update_index].delta_props);
}

Cost Optimizer::use_final(int y) const {
  const Cost& c = state_[y].slots[0].cost;
  if (m_.contains({y, 0})) {
    Cost r = reuse_cost({y, 0}, memo_.final_stage());
    if (r.total < c.total) return r;
  }
  return c;
}

Cost Optimizer::use_store(int y, int s) const {
  const Cost& c = state_[y].slots[store_slot(s)].cost;
  if (state_[y].inc && m_.contains({y, 0})) {
    Cost r = reuse_cost({y, 0}, s);
    if (r.total < c.total) return r;
  }
  return c;
}

Cost Optimizer::use_diff(int y, int i) const {
  if (memo_.node(y).diff[i].empty) return Cost{};
  const Cost& c = state_[y].slots[diff_slot(i)].cost;
  if (m_.contains({y, i})) {
    Cost r = reuse_cost({y, i}, 0);
    if (r.total < c.total) return r;
  }
  return c;
}

Optimizer::Slot Optimizer::eval_full(int e, int stage, bool store) const {
  Slot best;
  for (int o : memo_.node(e).children) {
    const OpNode& op = memo_.op(o);
    Cost c = op.exec[stage];
    for (int in : op.inputs) c += store ? use_store(memo_.resolve(in), stage) : use_final(memo_.resolve(in));
    if (best.choice < 0 || c.total < best.cost.total) best = {c, o};
  }
  return best;
}

Cost Optimizer::term_cost(const OpNode& op, const DiffTerm& term, int i) const {
  Cost c = term.local;
  c += use_diff(memo_.resolve(op.inputs[term.diff_input]), i);
  if (term.full_input >= 0) {
    int y = memo_.resolve(op.inputs[term.full_input]);
    c += term.fresh ? fresh_[y][term.full_stage].cost : use_store(y, term.full_stage);
  }
  return c;
}

Optimizer::Slot Optimizer::eval_diff(int e, int i) const {
  const EquivNode& n = memo_.node(e);
  if (n.diff[i].null || n.diff[i].empty || memo_.is_scan(e)) return Slot{};
  Slot best;
  for (int o : n.children) {
    const OpNode& op = memo_.op(o);
    const OpDiff& od = op.diff[i];
    if (od.empty) continue;
    Cost total;
    int used = 0;
    for (const auto& t : od.terms) {
      if (t.empty) continue;
      total += term_cost(op, t, i);
      ++used;
    }
    if (used == 2) total += od.union_cost;
    if (best.choice < 0 || total.total < best.cost.total) best = {total, o};
  }
  return best;
}

void Optimizer::eval_node(int e, const std::vector<char>* dirty, std::vector<char>* changed, bool* inc_changed) {
  NodeState& st = state_[e];
  const int last = memo_.update_count();
  const EquivNode& n = memo_.node(e);
  for (int k = 0; k < slot_count(); ++k) {
    if (dirty != nullptr && !(*dirty)[k]) continue;
    Slot s;
    if (k == 0) {
      s = eval_full(e, memo_.final_stage(), false);
    } else if (k <= last) {
      s = eval_full(e, k - 1, true);
    } else {
      s = eval_diff(e, k - last);
    }
    if (!(s == st.slots[k])) {
      if (changed != nullptr) (*changed)[k] = 1;
      st.slots[k] = s;
    }
  }
  Cost maint;
  for (int i = 1; i <= last; ++i) {
    if (!n.diff[i].null) maint += st.slots[diff_slot(i)].cost;
  }
  maint += merge_[e];
  Cost recompute = st.slots[0].cost + mat_cost({e, 0});
  bool inc = maint.total < recompute.total;
  if (inc_changed != nullptr) *inc_changed = inc != st.inc;
  st.maint = maint;
  st.inc = inc;
}

std::size_t Optimizer::recompute_all() {
  for (int e : memo_.topo_order()) {
    if (trial_) touch(e);
    eval_node(e, nullptr, nullptr, nullptr);
  }
  visits_ += memo_.topo_order().size();
  return memo_.topo_order().size();
}

std::size_t Optimizer::set_materialized(MaterializationSet m) {
  m_ = std::move(m);
  return recompute_all();
}

void Optimizer::touch(int e) {
  if (trial_ && journal_.count(e) == 0) journal_.emplace(e, state_[e]);
}

std::size_t Optimizer::propagate(int origin, bool full_change, int index) {
  const int last = memo_.update_count();
  const int slots = slot_count();
  std::map<int, int> queue;
  std::unordered_map<int, std::vector<char>> dirty;
  auto mark_parents = [&](int e, const std::vector<char>& marks) {
    for (int p : memo_.node(e).parents) {
      const OpNode& op = memo_.op(p);
      if (!op.live) continue;
      int out = memo_.resolve(op.output);
      auto& d = dirty[out];
      if (d.empty()) d.assign(slots, 0);
      for (int k = 0; k < slots; ++k) d[k] = d[k] || marks[k];
      queue[memo_.node(out).topo] = out;
    }
  };
  std::vector<char> initial(slots, 0);
  if (full_change) {
    std::fill(initial.begin(), initial.end(), 1);
  } else {
    initial[diff_slot(index)] = 1;
  }
  mark_parents(origin, initial);

  std::size_t visited = 0;
  while (!queue.empty()) {
    int e = queue.begin()->second;
    queue.erase(queue.begin());
    ++visited;
    touch(e);
    std::vector<char> changed(slots, 0);
    bool inc_changed = false;
    eval_node(e, &dirty[e], &changed, &inc_changed);
    dirty.erase(e);
    std::vector<char> marks(slots, 0);
    bool any = false;
    if (changed[0]) marks[0] = any = true;
    for (int s = 0; s < last; ++s) {
      if (changed[store_slot(s)]) marks[store_slot(s)] = marks[diff_slot(s + 1)] = any = true;
    }
    for (int i = 1; i <= last; ++i) {
      if (changed[diff_slot(i)]) marks[diff_slot(i)] = any = true;
    }
    if (inc_changed && m_.contains({e, 0})) {
      for (int k = 1; k < slots; ++k) marks[k] = 1;
      any = true;
    }
    if (any) mark_parents(e, marks);
  }
  visits_ += visited;
  return visited;
}

std::size_t Optimizer::add(const ResultId& r, MatTag tag) {
  if (m_.contains(r)) {
    m_.set_tag(r, tag);
    return 0;
  }
  m_.insert(r, tag);
  return propagate(r.node, r.update_index == 0, r.update_index);
}

std::size_t Optimizer::remove(const ResultId& r) {
  if (!m_.contains(r)) return 0;
  m_.erase(r);
  return propagate(r.node, r.update_index == 0, r.update_index);
}

void Optimizer::begin_trial() {
  trial_ = true;
  trial_m_ = m_;
  journal_.clear();
}

void Optimizer::rollback() {
  for (auto& [e, st] : journal_) state_[e] = std::move(st);
  journal_.clear();
  m_ = trial_m_;
  trial_ = false;
}

void Optimizer::commit() {
  journal_.clear();
  trial_ = false;
}

Optimizer::Snapshot Optimizer::snapshot() const { return {m_, state_}; }

void Optimizer::restore(const Snapshot& snap) {
  m_ = snap.m;
  state_ = snap.state;
}

Cost Optimizer::compcost(int e) const { return state_[memo_.resolve(e)].slots[0].cost; }

Cost Optimizer::compcost_at(int e, int stage) const {
  e = memo_.resolve(e);
  if (stage >= memo_.update_count()) return state_[e].slots[0].cost;
  return state_[e].slots[store_slot(stage)].cost;
}

Cost Optimizer::fresh_cost(int e, int stage) const {
  return fresh_[memo_.resolve(e)][std::min(stage, memo_.update_count())].cost;
}

Cost Optimizer::diff_cost(int e, int i) const {
  e = memo_.resolve(e);
  if (i < 1 || i > memo_.update_count() || memo_.node(e).diff[i].null)
    throw NullDifferential("differential " + std::to_string(i) + " of E" + std::to_string(e) + " is null");
  return state_[e].slots[diff_slot(i)].cost;
}

Cost Optimizer::total_diff_cost(int e) const {
  e = memo_.resolve(e);
  Cost total;
  for (int i = 1; i <= memo_.update_count(); ++i) {
    if (!memo_.node(e).diff[i].null) total += state_[e].slots[diff_slot(i)].cost;
  }
  return total;
}

Cost Optimizer::merge_cost(int e) const { return merge_[memo_.resolve(e)]; }

Cost Optimizer::maint_cost(int e) const { return state_[memo_.resolve(e)].maint; }

Cost Optimizer::recompute_cost(int e) const { return compcost(e) + mat_cost({memo_.resolve(e), 0}); }

bool Optimizer::incremental(int e) const { return state_[memo_.resolve(e)].inc; }

const Stats& Optimizer::result_props(const ResultId& r) const {
  const EquivNode& n = memo_.node(r.node);
  return r.update_index == 0 ? n.props() : n.diff[r.update_index].delta_props;
}

bool Optimizer::is_empty_result(const ResultId& r) const {
  if (r.update_index == 0) return false;
  const DiffEntry& d = memo_.node(r.node).diff[r.update_index];
  return d.null || d.empty;
}

Cost Optimizer::mat_cost(const ResultId& r) const { return memo_.cost_model().mat_cost(result_props(r)); }

Cost Optimizer::cost(const ResultId& x) const {
  if (x.update_index == 0) return incremental(x.node) ? maint_cost(x.node) : recompute_cost(x.node);
  return diff_cost(x.node, x.update_index) + mat_cost(x);
}

Cost Optimizer::cost_of_set(const std::vector<ResultId>& s) const {
  Cost total;
  for (const auto& x : s) total += cost(x);
  return total;
}

Cost Optimizer::total_cost() const { return cost_of_set(m_.results()); }

PlanNode Optimizer::plan_compute(int e, int stage, bool store) const {
  const Slot& slot = store ? state_[e].slots[store_slot(stage)] : state_[e].slots[0];
  PlanNode p;
  p.kind = PlanNode::Kind::Compute;
  p.result = {e, 0};
  p.stage = stage;
  p.op = slot.choice;
  p.cost = slot.cost;
  for (int in : memo_.op(slot.choice).inputs) p.inputs.push_back(plan_use(memo_.resolve(in), stage));
  return p;
}

PlanNode Optimizer::plan_use(int y, int stage) const {
  const bool final = stage == memo_.final_stage();
  const Cost& slot = final ? state_[y].slots[0].cost : state_[y].slots[store_slot(stage)].cost;
  if (m_.contains({y, 0}) && (final || state_[y].inc)) {
    Cost r = reuse_cost({y, 0}, stage);
    if (r.total < slot.total) {
      PlanNode p;
      p.kind = PlanNode::Kind::Reuse;
      p.result = {y, 0};
      p.stage = stage;
      p.cost = r;
      return p;
    }
  }
  return plan_compute(y, stage, !final);
}

PlanNode Optimizer::full_plan(int e, int stage) const {
  e = memo_.resolve(e);
  if (stage >= memo_.update_count()) return plan_compute(e, memo_.final_stage(), false);
  return plan_compute(e, stage, true);
}

PlanNode Optimizer::fresh_plan(int e, int stage) const {
  e = memo_.resolve(e);
  stage = std::min(stage, memo_.update_count());
  const Slot& slot = fresh_[e][stage];
  PlanNode p;
  p.kind = PlanNode::Kind::Compute;
  p.result = {e, 0};
  p.stage = stage;
  p.fresh = true;
  p.op = slot.choice;
  p.cost = slot.cost;
  for (int in : memo_.op(slot.choice).inputs) p.inputs.push_back(fresh_plan(in, stage));
  return p;
}

PlanNode Optimizer::diff_plan(int e, int i) const {
  e = memo_.resolve(e);
  const EquivNode& n = memo_.node(e);
  if (i < 1 || i > memo_.update_count() || n.diff[i].null)
    throw NullDifferential("differential " + std::to_string(i) + " of E" + std::to_string(e) + " is null");
  PlanNode p;
  p.result = {e, i};
  if (n.diff[i].empty) {
    p.kind = PlanNode::Kind::Empty;
    return p;
  }
  if (memo_.is_scan(e)) {
    p.kind = PlanNode::Kind::Log;
    return p;
  }
  const Slot& slot = state_[e].slots[diff_slot(i)];
  const OpNode& op = memo_.op(slot.choice);
  const OpDiff& od = op.diff[i];
  std::vector<PlanNode> terms;
  for (std::size_t k = 0; k < od.terms.size(); ++k) {
    const DiffTerm& t = od.terms[k];
    if (t.empty) continue;
    PlanNode term;
    term.kind = PlanNode::Kind::Term;
    term.result = {e, i};
    term.op = op.id;
    term.term = static_cast<int>(k);
    term.cost = term_cost(op, t, i);
    term.inputs.resize(op.inputs.size());
    term.inputs[t.diff_input] = plan_diff_use(memo_.resolve(op.inputs[t.diff_input]), i);
    if (t.full_input >= 0) {
      int y = memo_.resolve(op.inputs[t.full_input]);
      term.inputs[t.full_input] = t.fresh ? fresh_plan(y, t.full_stage) : plan_use(y, t.full_stage);
    }
    terms.push_back(std::move(term));
  }
  if (terms.size() == 1) return std::move(terms.front());
  p.kind = PlanNode::Kind::Union;
  p.op = op.id;
  p.cost = slot.cost;
  p.inputs = std::move(terms);
  return p;
}

PlanNode Optimizer::plan_diff_use(int y, int i) const {
  const EquivNode& n = memo_.node(y);
  if (!n.diff[i].empty && m_.contains({y, i})) {
    Cost r = reuse_cost({y, i}, 0);
    if (r.total < state_[y].slots[diff_slot(i)].cost.total) {
      PlanNode p;
      p.kind = PlanNode::Kind::Reuse;
      p.result = {y, i};
      p.cost = r;
      return p;
    }
  }
  return diff_plan(y, i);
}

namespace {

void plan_text_rec(const PlanNode& p, const Memo& memo, int depth, std::ostringstream& out) {
  std::string pad(2 * depth, ' ');
  auto stage = [&](int s) { return s == memo.final_stage() ? std::string("F") : std::to_string(s); };
  auto label = [&](const ResultId& r) {
    std::string s = "E" + std::to_string(r.node);
    if (r.update_index > 0) s += " d" + std::to_string(r.update_index);
    return s;
  };
  out << pad;
  switch (p.kind) {
    case PlanNode::Kind::Compute:
      out << "COMPUTE " << label(p.result) << " " << memo.op(p.op).desc.to_string() << " @" << stage(p.stage)
          << (p.fresh ? " fresh" : "");
      break;
    case PlanNode::Kind::Reuse:
      out << "REUSE " << label(p.result);
      if (p.result.update_index == 0) out << " @" << stage(p.stage);
      break;
    case PlanNode::Kind::Log:
      out << "DELTA-LOG " << label(p.result) << " " << memo.node(p.result.node).signature;
      break;
    case PlanNode::Kind::Term:
      out << "TERM " << label(p.result) << " " << memo.op(p.op).desc.to_string();
      break;
    case PlanNode::Kind::Union:
      out << "UNION " << label(p.result);
      break;
    case PlanNode::Kind::Empty:
      out << "EMPTY " << label(p.result);
      break;
  }
  out << " cost=" << p.cost.total << "\n";
  for (const auto& c : p.inputs) plan_text_rec(c, memo, depth + 1, out);
}

}  // namespace

std::string plan_to_text(const PlanNode& plan, const Memo& memo) {
  std::ostringstream out;
  plan_text_rec(plan, memo, 0, out);
  return out.str();
}

}  // namespace mvopt
