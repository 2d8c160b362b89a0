#include "mvopt/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mvopt/error.hpp"

namespace mvopt {

using nlohmann::json;

std::string to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Int:
      return "int";
    case ColumnType::String:
      return "string";
    case ColumnType::Decimal:
      return "decimal";
  }
  return "int";
}

ColumnType column_type_from_string(const std::string& name) {
  if (name == "int") return ColumnType::Int;
  if (name == "string") return ColumnType::String;
  if (name == "decimal") return ColumnType::Decimal;
  throw ParseError("unknown column type '" + name + "'");
}

const Column* RelationInfo::find_column(const std::string& column) const {
  for (const auto& c : columns) {
    if (c.name == column) return &c;
  }
  return nullptr;
}

double RelationInfo::distinct_of(const std::string& column) const {
  auto it = distinct.find(column);
  if (it != distinct.end()) return it->second;
  return std::max<double>(1.0, static_cast<double>(cardinality));
}

bool RelationInfo::is_primary_key_column(const std::string& column) const {
  return std::find(primary_key.begin(), primary_key.end(), column) != primary_key.end();
}

Catalog::Catalog(std::vector<RelationInfo> relations, std::vector<ForeignKey> foreign_keys,
                 CostParams params)
    : relations_(std::move(relations)),
      foreign_keys_(std::move(foreign_keys)),
      params_(params) {
  validate();
}

const RelationInfo* Catalog::find(const std::string& name) const {
  for (const auto& r : relations_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::optional<std::size_t> Catalog::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (relations_[i].name == name) return i;
  }
  return std::nullopt;
}

std::int64_t Catalog::blocks(const std::string& name) const {
  const RelationInfo* rel = find(name);
  if (rel == nullptr) throw UnknownRelation("unknown relation '" + name + "'");
  return static_cast<std::int64_t>(
      std::ceil(static_cast<double>(rel->cardinality) * rel->tuple_bytes / params_.block_bytes));
}

void Catalog::validate() const {
  std::set<std::string> names;
  for (const auto& r : relations_) {
    if (r.name.empty()) throw ValidationError("relation with empty name");
    if (!names.insert(r.name).second) throw ValidationError("duplicate relation '" + r.name + "'");
    if (r.cardinality < 0) throw ValidationError("negative cardinality for '" + r.name + "'");
    if (!(r.tuple_bytes > 0)) throw ValidationError("tuple_bytes must be positive for '" + r.name + "'");
    std::set<std::string> cols;
    for (const auto& c : r.columns) {
      if (!cols.insert(c.name).second)
        throw ValidationError("duplicate column '" + c.name + "' in '" + r.name + "'");
    }
    for (const auto& [col, d] : r.distinct) {
      if (r.find_column(col) == nullptr)
        throw ValidationError("distinct count for unknown column '" + r.name + "." + col + "'");
      if (d < 1) throw ValidationError("distinct count below 1 for '" + r.name + "." + col + "'");
      if (r.cardinality > 0 && d > static_cast<double>(r.cardinality))
        throw ValidationError("distinct count exceeds cardinality for '" + r.name + "." + col + "'");
    }
    for (const auto& pk : r.primary_key) {
      if (r.find_column(pk) == nullptr)
        throw ValidationError("primary key column '" + pk + "' missing in '" + r.name + "'");
    }
  }
  for (const auto& fk : foreign_keys_) {
    const RelationInfo* from = find(fk.from_rel);
    const RelationInfo* to = find(fk.to_rel);
    if (from == nullptr || to == nullptr)
      throw ValidationError("foreign key references missing relation " +
                            (from == nullptr ? fk.from_rel : fk.to_rel));
    if (fk.from_cols.size() != fk.to_cols.size() || fk.from_cols.empty())
      throw ValidationError("foreign key column lists differ in length");
    std::vector<std::string> to_sorted = fk.to_cols;
    std::vector<std::string> pk_sorted = to->primary_key;
    std::sort(to_sorted.begin(), to_sorted.end());
    std::sort(pk_sorted.begin(), pk_sorted.end());
    if (to_sorted != pk_sorted)
      throw ValidationError("foreign key target columns are not the primary key of " + fk.to_rel);
    for (std::size_t i = 0; i < fk.from_cols.size(); ++i) {
      const Column* a = from->find_column(fk.from_cols[i]);
      const Column* b = to->find_column(fk.to_cols[i]);
      if (a == nullptr || b == nullptr)
        throw ValidationError("foreign key references unknown column");
      if (a->type != b->type) throw ValidationError("foreign key column types differ");
    }
  }
}

Catalog catalog_from_json(const json& doc) {
  try {
    std::vector<RelationInfo> relations;
    for (const auto& r : doc.at("relations")) {
      RelationInfo info;
      info.name = r.at("name").get<std::string>();
      for (const auto& c : r.at("columns")) {
        info.columns.push_back({c.at(0).get<std::string>(),
                                column_type_from_string(c.at(1).get<std::string>())});
      }
      info.cardinality = r.at("cardinality").get<std::int64_t>();
      info.tuple_bytes = r.at("tuple_bytes").get<double>();
      if (r.contains("distinct")) {
        for (const auto& [col, d] : r.at("distinct").items()) info.distinct[col] = d.get<double>();
      }
      if (r.contains("primary_key")) info.primary_key = r.at("primary_key").get<std::vector<std::string>>();
      relations.push_back(std::move(info));
    }
    std::vector<ForeignKey> fks;
    if (doc.contains("foreign_keys")) {
      for (const auto& f : doc.at("foreign_keys")) {
        fks.push_back({f.at("from_rel").get<std::string>(),
                       f.at("from_cols").get<std::vector<std::string>>(),
                       f.at("to_rel").get<std::string>(),
                       f.at("to_cols").get<std::vector<std::string>>()});
      }
    }
    CostParams params;
    if (doc.contains("config")) {
      const auto& c = doc.at("config");
      params.block_bytes = c.value("block_bytes", params.block_bytes);
      params.buffer_blocks = c.value("buffer_blocks", params.buffer_blocks);
      params.w_seek = c.value("w_seek", params.w_seek);
      params.w_read = c.value("w_read", params.w_read);
      params.w_write = c.value("w_write", params.w_write);
      params.w_cpu = c.value("w_cpu", params.w_cpu);
    }
    return Catalog(std::move(relations), std::move(fks), params);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed catalog: ") + e.what());
  }
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open catalog file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed catalog: ") + e.what());
  }
  return catalog_from_json(doc);
}

json to_json(const Catalog& catalog) {
  json doc;
  doc["relations"] = json::array();
  for (const auto& r : catalog.relations()) {
    json cols = json::array();
    for (const auto& c : r.columns) cols.push_back({c.name, to_string(c.type)});
    json distinct = json::object();
    for (const auto& [col, d] : r.distinct) distinct[col] = d;
    doc["relations"].push_back({{"name", r.name},
                                {"columns", cols},
                                {"cardinality", r.cardinality},
                                {"tuple_bytes", r.tuple_bytes},
                                {"distinct", distinct},
                                {"primary_key", r.primary_key}});
  }
  doc["foreign_keys"] = json::array();
  for (const auto& f : catalog.foreign_keys()) {
    doc["foreign_keys"].push_back({{"from_rel", f.from_rel},
                                   {"from_cols", f.from_cols},
                                   {"to_rel", f.to_rel},
                                   {"to_cols", f.to_cols}});
  }
  const auto& p = catalog.params();
  doc["config"] = {{"block_bytes", p.block_bytes}, {"buffer_blocks", p.buffer_blocks},
                   {"w_seek", p.w_seek},           {"w_read", p.w_read},
                   {"w_write", p.w_write},         {"w_cpu", p.w_cpu}};
  return doc;
}

double UpdateSpec::fraction(int index) const {
  UpdateRef ref = decode_update(index);
  const auto& u = per_relation.at(ref.relation);
  return ref.kind == UpdateKind::Insert ? u.insert_fraction : u.delete_fraction;
}

UpdateSpec make_update_spec(const Catalog& catalog, double update_pct) {
  if (!(update_pct >= 0 && update_pct <= 100))
    throw ValidationError("update percentage must lie in [0, 100]");
  UpdateSpec spec;
  spec.per_relation.assign(catalog.relation_count(),
                           RelationUpdate{update_pct / 100.0, update_pct / 200.0});
  return spec;
}

UpdateSpec apply_update_overrides(const Catalog& catalog, UpdateSpec spec, const json& overrides) {
  if (spec.per_relation.size() != catalog.relation_count())
    spec.per_relation.assign(catalog.relation_count(), RelationUpdate{});
  for (const auto& [name, entry] : overrides.items()) {
    auto idx = catalog.index_of(name);
    if (!idx) throw ValidationError("update override for unknown relation '" + name + "'");
    auto& u = spec.per_relation[*idx];
    u.insert_fraction = entry.value("insert", u.insert_fraction);
    u.delete_fraction = entry.value("delete", u.delete_fraction);
    if (u.insert_fraction < 0 || u.delete_fraction < 0 || u.delete_fraction > 1)
      throw ValidationError("update fractions out of range for '" + name + "'");
  }
  return spec;
}

DeltaStats delta_stats(const Catalog& catalog, const UpdateSpec& spec, int index) {
  UpdateRef ref = decode_update(index);
  const RelationInfo& rel = catalog.relation(ref.relation);
  DeltaStats d;
  d.relation = rel.name;
  d.kind = ref.kind;
  d.cardinality = static_cast<std::int64_t>(
      std::llround(spec.fraction(index) * static_cast<double>(rel.cardinality)));
  if (ref.kind == UpdateKind::Delete) d.cardinality = std::min(d.cardinality, rel.cardinality);
  for (const auto& c : rel.columns) {
    d.distinct[c.name] = std::min(rel.distinct_of(c.name), static_cast<double>(d.cardinality));
  }
  return d;
}

std::int64_t staged_cardinality(const Catalog& catalog, const UpdateSpec& spec,
                                std::size_t relation, int stage) {
  std::int64_t card = catalog.relation(relation).cardinality;
  int ins = update_index(relation, UpdateKind::Insert);
  int del = update_index(relation, UpdateKind::Delete);
  if (stage >= ins) card += delta_stats(catalog, spec, ins).cardinality;
  if (stage >= del) card -= delta_stats(catalog, spec, del).cardinality;
  return card;
}

}  // namespace mvopt
