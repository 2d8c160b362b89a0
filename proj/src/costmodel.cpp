#include "mvopt/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mvopt {

double Stats::distinct_of(const std::string& column) const {
  auto it = distinct.find(column);
  if (it != distinct.end()) return it->second;
  return cardinality;
}

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Scan:
      return "scan";
    case OpKind::Select:
      return "select";
    case OpKind::Join:
      return "join";
    case OpKind::Aggregate:
      return "aggregate";
  }
  return "scan";
}

std::string OpDesc::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case OpKind::Scan:
      out << "SCAN " << relation;
      if (alias != relation) out << " AS " << alias;
      break;
    case OpKind::Select:
      out << "SELECT[";
      for (std::size_t i = 0; i < predicates.size(); ++i) out << (i ? " AND " : "") << predicates[i].to_string();
      out << "]";
      break;
    case OpKind::Join:
      out << "JOIN[";
      for (std::size_t i = 0; i < join_predicates.size(); ++i)
        out << (i ? " AND " : "") << join_predicates[i].to_string();
      out << "]";
      break;
    case OpKind::Aggregate:
      out << "GROUPBY[";
      for (std::size_t i = 0; i < group_columns.size(); ++i) out << (i ? "," : "") << group_columns[i];
      out << ";";
      for (std::size_t i = 0; i < aggregates.size(); ++i) out << (i ? "," : "") << aggregates[i].to_string();
      out << "]";
      break;
  }
  return out.str();
}

Stats CostModel::make_stats(double cardinality, double tuple_bytes,
                            std::map<std::string, double> distinct) const {
  Stats s;
  s.cardinality = std::max(0.0, cardinality);
  s.tuple_bytes = tuple_bytes;
  s.blocks = std::ceil(s.cardinality * tuple_bytes / params_.block_bytes);
  for (auto& [col, d] : distinct) d = std::min(d, s.cardinality);
  s.distinct = std::move(distinct);
  return s;
}

Stats CostModel::relation_stats(const RelationInfo& rel, const std::string& alias, double cardinality) const {
  std::map<std::string, double> distinct;
  for (const auto& c : rel.columns) {
    double d = rel.is_primary_key_column(c.name) && rel.primary_key.size() == 1 ? cardinality
                                                                              : rel.distinct_of(c.name);
    distinct[alias + "." + c.name] = d;
  }
  return make_stats(cardinality, rel.tuple_bytes, std::move(distinct));
}

Stats CostModel::delta_relation_stats(const RelationInfo& rel, const std::string& alias,
                                      const DeltaStats& delta) const {
  std::map<std::string, double> distinct;
  for (const auto& [col, d] : delta.distinct) distinct[alias + "." + col] = d;
  return make_stats(static_cast<double>(delta.cardinality), rel.tuple_bytes, std::move(distinct));
}

Cost CostModel::make_cost(double seeks, double blocks_read, double blocks_written, double cpu_tuples) const {
  Cost c;
  c.seeks = seeks;
  c.blocks_read = blocks_read;
  c.blocks_written = blocks_written;
  c.cpu_tuples = cpu_tuples;
  c.total = seeks * params_.w_seek + blocks_read * params_.w_read + blocks_written * params_.w_write +
            cpu_tuples * params_.w_cpu;
  return c;
}

double CostModel::selectivity(const ColumnPredicate& pred, const Stats& input) const {
  if (pred.op == CompareOp::Eq) return 1.0 / std::max(1.0, input.distinct_of(pred.column));
  return 1.0 / 3.0;
}

double CostModel::join_selectivity(const JoinPredicate& pred, const Stats& left, const Stats& right) const {
  auto side = [&](const std::string& col) {
    return left.distinct.count(col) ? left.distinct_of(col) : right.distinct_of(col);
  };
  return 1.0 / std::max({1.0, side(pred.left), side(pred.right)});
}

Stats CostModel::estimate_props(const OpDesc& op, std::span<const Stats> inputs) const {
  switch (op.kind) {
    case OpKind::Scan:
      return inputs[0];
    case OpKind::Select: {
      const Stats& in = inputs[0];
      double card = in.cardinality;
      for (const auto& p : op.predicates) card *= selectivity(p, in);
      auto distinct = in.distinct;
      for (const auto& p : op.predicates) {
        if (p.op == CompareOp::Eq) distinct[p.column] = 1;
      }
      return make_stats(card, in.tuple_bytes, std::move(distinct));
    }
    case OpKind::Join: {
      const Stats& l = inputs[0];
      const Stats& r = inputs[1];
      double card = l.cardinality * r.cardinality;
      for (const auto& p : op.join_predicates) card *= join_selectivity(p, l, r);
      auto distinct = l.distinct;
      distinct.insert(r.distinct.begin(), r.distinct.end());
      return make_stats(card, l.tuple_bytes + r.tuple_bytes, std::move(distinct));
    }
    case OpKind::Aggregate: {
      const Stats& in = inputs[0];
      double groups = 0;
      if (in.cardinality > 0) {
        groups = 1;
        for (const auto& g : op.group_columns) groups *= std::max(1.0, in.distinct_of(g));
        groups = std::min(groups, in.cardinality);
      }
      std::map<std::string, double> distinct;
      for (const auto& g : op.group_columns) distinct[g] = in.distinct_of(g);
      for (const auto& a : op.aggregates) distinct[a.output_name()] = groups;
      distinct[kCountColumn] = groups;
      double bytes = 8.0 * static_cast<double>(op.group_columns.size() + op.aggregates.size() + 1);
      return make_stats(groups, bytes, std::move(distinct));
    }
  }
  return {};
}

Cost CostModel::input_reads(std::span<const Stats> inputs, std::span<const bool> pipelined) const {
  Cost c;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (i < pipelined.size() && pipelined[i]) continue;
    c += make_cost(1, inputs[i].blocks, 0, 0);
  }
  return c;
}

Cost CostModel::join_cost(std::span<const Stats> in, std::span<const bool> pipelined, const Stats& out) const {
  const double buffer = std::max(2.0, params_.buffer_blocks);
  const Stats& l = in[0];
  const Stats& r = in[1];
  Cost reads = input_reads(in, pipelined);

  // Hash join, building on the smaller input.
  const double build = std::min(l.blocks, r.blocks);
  Cost hash;
  if (build <= buffer) {
    hash = reads + make_cost(0, 0, 0, l.cardinality + r.cardinality + out.cardinality);
  } else {
    double partitions = std::ceil(build / buffer);
    double volume = l.blocks + r.blocks;
    hash = reads + make_cost(4 * partitions, volume, volume,
                             2 * (l.cardinality + r.cardinality) + out.cardinality);
  }

  // Block nested loops, either side as the inner.
  Cost best = hash;
  for (int inner_side = 0; inner_side < 2; ++inner_side) {
    const Stats& inner = in[inner_side];
    const Stats& outer = in[1 - inner_side];
    bool inner_pipelined = static_cast<std::size_t>(inner_side) < pipelined.size() && pipelined[inner_side];
    Cost bnl = reads + make_cost(0, 0, 0, l.cardinality * r.cardinality + out.cardinality);
    if (inner.blocks > buffer - 1) {
      double passes = std::max(1.0, std::ceil(outer.blocks / (buffer - 1)));
      if (inner_pipelined) {
        bnl += make_cost(1 + passes, passes * inner.blocks, inner.blocks, 0);
      } else {
        bnl += make_cost(passes - 1, (passes - 1) * inner.blocks, 0, 0);
      }
    }
    if (bnl.total < best.total) best = bnl;
  }
  return best;
}

Cost CostModel::aggregate_cost(const Stats& in, bool pipelined, const Stats& out) const {
  const double buffer = std::max(2.0, params_.buffer_blocks);
  Stats ins[1] = {in};
  bool pl[1] = {pipelined};
  Cost c = input_reads(ins, pl);
  if (out.blocks <= buffer) return c + make_cost(0, 0, 0, in.cardinality + out.cardinality);
  double runs = std::ceil(in.blocks / buffer);
  return c + make_cost(2 * runs, in.blocks, in.blocks, 2 * in.cardinality + out.cardinality);
}

Cost CostModel::exec_cost(const OpDesc& op, std::span<const Stats> inputs, std::span<const bool> pipelined,
                          const Stats& output) const {
  switch (op.kind) {
    case OpKind::Scan:
      return input_reads(inputs, pipelined) + make_cost(0, 0, 0, inputs[0].cardinality);
    case OpKind::Select:
      return input_reads(inputs, pipelined) + make_cost(0, 0, 0, inputs[0].cardinality);
    case OpKind::Join:
      return join_cost(inputs, pipelined, output);
    case OpKind::Aggregate:
      return aggregate_cost(inputs[0], !pipelined.empty() && pipelined[0], output);
  }
  return {};
}

Cost CostModel::exec_cost(const OpDesc& op, std::span<const Stats> inputs, std::span<const bool> pipelined) const {
  return exec_cost(op, inputs, pipelined, estimate_props(op, inputs));
}

Cost CostModel::reuse_cost(const Stats& props) const { return make_cost(1, props.blocks, 0, 0); }

Cost CostModel::mat_cost(const Stats& props) const { return make_cost(1, 0, props.blocks, 0); }

Cost CostModel::merge_cost(const Stats& node_props, std::span<const Stats> deltas) const {
  Cost c;
  for (const auto& d : deltas) {
    if (d.cardinality <= 0) continue;
    double stored = std::max(node_props.blocks, d.blocks);
    double touched = std::min(stored, std::ceil(d.cardinality));
    c += make_cost(1, d.blocks, touched, d.cardinality);
  }
  return c;
}

Cost CostModel::union_cost(const Stats& a, const Stats& b) const {
  return make_cost(0, 0, 0, a.cardinality + b.cardinality);
}

}  // namespace mvopt
