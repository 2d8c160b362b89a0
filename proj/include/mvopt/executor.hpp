#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mvopt/algebra.hpp"
#include "mvopt/catalog.hpp"
#include "mvopt/dag.hpp"
#include "mvopt/optimizer.hpp"

namespace mvopt {

using Value = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Value>;

std::string value_to_string(const Value& v);

class MultisetTable {
 public:
  MultisetTable() = default;
  explicit MultisetTable(std::vector<ColumnRef> schema) : schema_(std::move(schema)) {}

  const std::vector<ColumnRef>& schema() const { return schema_; }
  const std::map<Row, std::int64_t>& rows() const { return rows_; }

  /// Adds `mult` copies (negative removes, flooring at zero).
  void add(const Row& row, std::int64_t mult = 1);
  std::int64_t multiplicity(const Row& row) const;
  std::int64_t size() const;
  bool empty() const { return rows_.empty(); }
  int column_index(const std::string& name) const;

  /// Same columns in name order; for comparisons that ignore column order.
  MultisetTable canonical() const;
  std::string to_text() const;

  bool operator==(const MultisetTable& other) const;

 private:
  std::vector<ColumnRef> schema_;
  std::map<Row, std::int64_t> rows_;
};

MultisetTable multiset_union(const MultisetTable& a, const MultisetTable& b);
/// Multiset difference with multiplicities floored at zero.
MultisetTable monus(const MultisetTable& a, const MultisetTable& b);

struct DeltaPair {
  MultisetTable plus;
  MultisetTable minus;
};

MultisetTable apply_delta(const MultisetTable& t, const DeltaPair& d);

/// Base relations keyed by name, columns unqualified.
using Database = std::map<std::string, MultisetTable>;

MultisetTable eval(const LogicalExpr& expr, const Database& db, const Catalog& catalog);

/// Adds group rows of a grouped delta into (insert) or out of (delete) an
/// aggregate state; a group whose __count reaches zero is removed.
MultisetTable merge_aggregate(const MultisetTable& state, const MultisetTable& delta, UpdateKind kind,
                              std::size_t group_columns);
/// Replaces stored avg sums by averages for display.
MultisetTable finalize_aggregate(const MultisetTable& state, const std::vector<AggregateSpec>& aggregates,
                                 std::size_t group_columns);

/// Database snapshots after updates 0..2n, plus the per-update base deltas.
struct StagedDatabase {
  std::vector<Database> stages;
  std::vector<MultisetTable> deltas;  // [0] unused
};

StagedDatabase stage_database(const Catalog& catalog, const Database& base, const std::vector<DeltaPair>& per_relation);

struct GeneratedData {
  Database base;
  std::vector<DeltaPair> deltas;  // per relation
};

/// Random FK-consistent database of catalog cardinalities with deltas matching the update spec.
GeneratedData generate_database(const Catalog& catalog, const UpdateSpec& spec, std::uint64_t seed);
/// Caps cardinalities (and distinct counts) at max_rows.
Catalog scale_catalog(const Catalog& catalog, std::int64_t max_rows);

nlohmann::json database_to_json(const Catalog& catalog, const GeneratedData& data);
GeneratedData database_from_json(const Catalog& catalog, const nlohmann::json& doc);

/// Evaluates plans from one optimizer against a staged database.
class PlanExecutor {
 public:
  PlanExecutor(const Optimizer& opt, const StagedDatabase& db);

  MultisetTable eval_plan(const PlanNode& plan);

  /// Runs one maintenance cycle and returns final contents of every full result in M.
  std::map<int, MultisetTable> propagate();

  /// Full result of a node after updates 1..stage, evaluated without reuse.
  MultisetTable fresh(int node, int stage);
  /// A differential term evaluated from reference deltas, ignoring empty flags and pruning.
  MultisetTable reference_term(int op, int term, int update_index);

  /// Differentials evaluated in the last propagate, keyed by (node, update).
  const std::map<ResultId, MultisetTable>& deltas() const { return delta_cache_; }

 private:
  const MultisetTable& delta(const ResultId& r);
  MultisetTable apply_op(const OpNode& op, const std::vector<MultisetTable>& inputs) const;
  MultisetTable scan(const OpNode& op, const Database& db) const;
  const Database& stage_db(int stage) const;

  const Optimizer& opt_;
  const Memo& memo_;
  const StagedDatabase& db_;
  int current_ = 0;
  std::map<int, MultisetTable> store_;
  std::map<int, MultisetTable> final_;
  std::map<ResultId, MultisetTable> delta_cache_;
};

struct Enumeration {
  double min_cost = 0;
  std::size_t count = 0;
};

/// Exhaustive plan enumeration with M empty; full results use the final stage.
Enumeration enumerate_plans(const Memo& memo, const ResultId& x, std::size_t cap = 1000000);
/// Cost of every enumerated plan, in an order fixed by the memo structure.
std::vector<double> enumerate_plan_costs(const Memo& memo, const ResultId& x, std::size_t cap = 1000000);

}  // namespace mvopt
