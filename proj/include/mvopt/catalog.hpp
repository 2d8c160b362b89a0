#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mvopt {

enum class ColumnType { Int, String, Decimal };

std::string to_string(ColumnType type);
ColumnType column_type_from_string(const std::string& name);

struct Column {
  std::string name;
  ColumnType type = ColumnType::Int;

  bool operator==(const Column&) const = default;
};

struct RelationInfo {
  std::string name;
  std::vector<Column> columns;
  std::int64_t cardinality = 0;
  double tuple_bytes = 1;
  std::map<std::string, double> distinct;
  std::vector<std::string> primary_key;

  const Column* find_column(const std::string& column) const;
  /// Distinct-value count of a column; undeclared columns are treated as unique.
  double distinct_of(const std::string& column) const;
  bool is_primary_key_column(const std::string& column) const;

  bool operator==(const RelationInfo&) const = default;
};

struct ForeignKey {
  std::string from_rel;
  std::vector<std::string> from_cols;
  std::string to_rel;
  std::vector<std::string> to_cols;

  bool operator==(const ForeignKey&) const = default;
};

/// Storage and cost-weight parameters shared by the cost model.
struct CostParams {
  double block_bytes = 4096;
  double buffer_blocks = 8000;
  double w_seek = 10;
  double w_read = 1;
  double w_write = 1;
  double w_cpu = 0.01;

  bool operator==(const CostParams&) const = default;
};

class Catalog {
 public:
  Catalog() = default;
  Catalog(std::vector<RelationInfo> relations, std::vector<ForeignKey> foreign_keys,
          CostParams params = {});

  const std::vector<RelationInfo>& relations() const { return relations_; }
  const std::vector<ForeignKey>& foreign_keys() const { return foreign_keys_; }
  const CostParams& params() const { return params_; }
  CostParams& mutable_params() { return params_; }

  std::size_t relation_count() const { return relations_.size(); }
  /// Number of update indices, 2n.
  int update_count() const { return 2 * static_cast<int>(relations_.size()); }

  const RelationInfo& relation(std::size_t index) const { return relations_.at(index); }
  const RelationInfo* find(const std::string& name) const;
  std::optional<std::size_t> index_of(const std::string& name) const;

  std::int64_t blocks(const std::string& name) const;

  bool operator==(const Catalog& other) const {
    return relations_ == other.relations_ && foreign_keys_ == other.foreign_keys_ &&
           params_ == other.params_;
  }

 private:
  void validate() const;

  std::vector<RelationInfo> relations_;
  std::vector<ForeignKey> foreign_keys_;
  CostParams params_;
};

Catalog load_catalog(const std::filesystem::path& path);
Catalog catalog_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Catalog& catalog);

enum class UpdateKind { Insert, Delete };

/// Decoded update index: inserts to relation r (0-based) are 2r+1, deletes 2r+2.
struct UpdateRef {
  std::size_t relation = 0;
  UpdateKind kind = UpdateKind::Insert;
};

inline int update_index(std::size_t relation, UpdateKind kind) {
  return 2 * static_cast<int>(relation) + (kind == UpdateKind::Insert ? 1 : 2);
}

inline UpdateRef decode_update(int index) {
  return {static_cast<std::size_t>((index - 1) / 2),
          (index % 2 == 1) ? UpdateKind::Insert : UpdateKind::Delete};
}

struct RelationUpdate {
  double insert_fraction = 0;
  double delete_fraction = 0;
};

struct UpdateSpec {
  std::vector<RelationUpdate> per_relation;

  int update_count() const { return 2 * static_cast<int>(per_relation.size()); }
  double fraction(int index) const;
};

struct DeltaStats {
  std::string relation;
  UpdateKind kind = UpdateKind::Insert;
  std::int64_t cardinality = 0;
  std::map<std::string, double> distinct;
};

UpdateSpec make_update_spec(const Catalog& catalog, double update_pct);
/// Applies per-relation overrides of the form {"R": {"insert": f, "delete": f}}.
UpdateSpec apply_update_overrides(const Catalog& catalog, UpdateSpec spec,
                                  const nlohmann::json& overrides);
DeltaStats delta_stats(const Catalog& catalog, const UpdateSpec& spec, int index);

/// Cardinality of a relation after updates 1..stage have been applied.
std::int64_t staged_cardinality(const Catalog& catalog, const UpdateSpec& spec,
                                std::size_t relation, int stage);

}  // namespace mvopt
