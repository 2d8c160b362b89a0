#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mvopt/catalog.hpp"

namespace mvopt {

enum class CompareOp { Eq, Lt, Le, Gt, Ge };

using Literal = std::variant<std::int64_t, double, std::string>;

std::string to_string(CompareOp op);
std::string literal_to_string(const Literal& value);

/// `column op constant`, column qualified as alias.name.
struct ColumnPredicate {
  std::string column;
  CompareOp op = CompareOp::Eq;
  Literal value;

  std::string to_string() const;
  auto operator<=>(const ColumnPredicate&) const = default;
  bool operator==(const ColumnPredicate&) const = default;
};

/// Equi-join predicate; stored with left < right so equal predicates compare equal.
struct JoinPredicate {
  std::string left;
  std::string right;

  static JoinPredicate make(std::string a, std::string b);
  std::string to_string() const;
  auto operator<=>(const JoinPredicate&) const = default;
  bool operator==(const JoinPredicate&) const = default;
};

enum class AggFunc { Count, Sum, Avg };

struct AggregateSpec {
  AggFunc func = AggFunc::Count;
  std::string column;

  /// Output column name, e.g. sum_sal.
  std::string output_name() const;
  std::string to_string() const;
  auto operator<=>(const AggregateSpec&) const = default;
  bool operator==(const AggregateSpec&) const = default;
};

inline constexpr const char* kCountColumn = "__count";

struct ColumnRef {
  std::string name;
  ColumnType type = ColumnType::Int;

  bool operator==(const ColumnRef&) const = default;
};

struct LogicalExpr;
using ExprPtr = std::shared_ptr<const LogicalExpr>;

struct LogicalExpr {
  enum class Kind { Scan, Select, Join, Aggregate };

  Kind kind = Kind::Scan;
  std::string relation;  // Scan
  std::string alias;     // Scan
  std::vector<ColumnPredicate> predicates;    // Select
  std::vector<JoinPredicate> join_predicates;  // Join
  std::vector<std::string> group_columns;     // Aggregate
  std::vector<AggregateSpec> aggregates;      // Aggregate
  std::vector<ExprPtr> inputs;

  static ExprPtr scan(std::string relation, std::string alias = {});
  static ExprPtr select(std::vector<ColumnPredicate> predicates, ExprPtr input);
  static ExprPtr join(std::vector<JoinPredicate> predicates, ExprPtr left, ExprPtr right);
  static ExprPtr aggregate(std::vector<std::string> group_columns,
                           std::vector<AggregateSpec> aggregates, ExprPtr input);

  std::string to_string() const;
  bool operator==(const LogicalExpr& other) const;
};

struct ViewDef {
  std::string name;
  ExprPtr body;
  bool materialized = true;
};

/// Pushes every selection down onto the scan that owns its columns and merges
/// stacked selections; the result has Select nodes only directly above Scans.
ExprPtr normalize(const ExprPtr& expr);

/// Output schema: scans emit alias.column, joins concatenate, aggregates emit
/// group columns, then aggregate columns, then the hidden __count column.
std::vector<ColumnRef> schema_of(const LogicalExpr& expr, const Catalog& catalog);

/// Parses and validates `NAME = expr`; the body is returned normalized.
ViewDef parse_view(const std::string& source, const Catalog& catalog);
/// One view per line; blank lines and lines starting with '#' are skipped.
std::vector<ViewDef> parse_views(const std::string& text, const Catalog& catalog);

/// Checks column resolution, types, the root-only aggregate rule and alias uniqueness.
void validate(const LogicalExpr& expr, const Catalog& catalog);

}  // namespace mvopt
