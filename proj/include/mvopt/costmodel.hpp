#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mvopt/algebra.hpp"
#include "mvopt/catalog.hpp"

namespace mvopt {

/// Logical properties of a (full or differential) result.
struct Stats {
  double cardinality = 0;
  double tuple_bytes = 0;
  double blocks = 0;
  std::map<std::string, double> distinct;

  double distinct_of(const std::string& column) const;
};

struct Cost {
  double seeks = 0;
  double blocks_read = 0;
  double blocks_written = 0;
  double cpu_tuples = 0;
  double total = 0;

  Cost& operator+=(const Cost& o) {
    seeks += o.seeks;
    blocks_read += o.blocks_read;
    blocks_written += o.blocks_written;
    cpu_tuples += o.cpu_tuples;
    total += o.total;
    return *this;
  }
  friend Cost operator+(Cost a, const Cost& b) { return a += b; }
  bool operator==(const Cost&) const = default;
};

enum class OpKind { Scan, Select, Join, Aggregate };

std::string to_string(OpKind kind);

/// Operator payload shared by memo operation nodes and the cost model.
struct OpDesc {
  OpKind kind = OpKind::Scan;
  std::string relation;
  std::string alias;
  std::vector<ColumnPredicate> predicates;
  std::vector<JoinPredicate> join_predicates;
  std::vector<std::string> group_columns;
  std::vector<AggregateSpec> aggregates;

  std::string to_string() const;
};

class CostModel {
 public:
  explicit CostModel(CostParams params = {}) : params_(params) {}

  const CostParams& params() const { return params_; }

  Stats make_stats(double cardinality, double tuple_bytes, std::map<std::string, double> distinct) const;
  /// Stored-relation statistics at a given cardinality, columns qualified by alias.
  Stats relation_stats(const RelationInfo& rel, const std::string& alias, double cardinality) const;
  Stats delta_relation_stats(const RelationInfo& rel, const std::string& alias, const DeltaStats& delta) const;

  Cost make_cost(double seeks, double blocks_read, double blocks_written, double cpu_tuples) const;

  /// Selectivity of one selection predicate against an input.
  double selectivity(const ColumnPredicate& pred, const Stats& input) const;
  /// Selectivity of one equi-join predicate between two inputs.
  double join_selectivity(const JoinPredicate& pred, const Stats& left, const Stats& right) const;

  /// Scan takes the stored relation as its single input.
  Stats estimate_props(const OpDesc& op, std::span<const Stats> inputs) const;

  Cost exec_cost(const OpDesc& op, std::span<const Stats> inputs, std::span<const bool> pipelined,
                 const Stats& output) const;
  Cost exec_cost(const OpDesc& op, std::span<const Stats> inputs, std::span<const bool> pipelined) const;

  Cost reuse_cost(const Stats& props) const;
  Cost mat_cost(const Stats& props) const;
  Cost merge_cost(const Stats& node_props, std::span<const Stats> deltas) const;
  Cost union_cost(const Stats& a, const Stats& b) const;

 private:
  Cost join_cost(std::span<const Stats> in, std::span<const bool> pipelined, const Stats& out) const;
  Cost aggregate_cost(const Stats& in, bool pipelined, const Stats& out) const;
  Cost input_reads(std::span<const Stats> inputs, std::span<const bool> pipelined) const;

  CostParams params_;
};

}  // namespace mvopt
