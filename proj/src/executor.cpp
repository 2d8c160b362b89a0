#include "mvopt/executor.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mvopt/error.hpp"

namespace mvopt {

using nlohmann::json;

std::string value_to_string(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    std::ostringstream out;
    out << *d;
    return out.str();
  }
  return "'" + std::get<std::string>(v) + "'";
}

void MultisetTable::add(const Row& row, std::int64_t mult) {
  if (row.size() != schema_.size())
    throw SchemaMismatch("row arity " + std::to_string(row.size()) + " does not match schema arity " +
                         std::to_string(schema_.size()));
  if (mult == 0) return;
  auto it = rows_.find(row);
  if (it == rows_.end()) {
    if (mult > 0) rows_.emplace(row, mult);
    return;
  }
  it->second += mult;
  if (it->second <= 0) rows_.erase(it);
}

std::int64_t MultisetTable::multiplicity(const Row& row) const {
  auto it = rows_.find(row);
  return it == rows_.end() ? 0 : it->second;
}

std::int64_t MultisetTable::size() const {
  std::int64_t n = 0;
  for (const auto& [row, m] : rows_) n += m;
  return n;
}

int MultisetTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

MultisetTable MultisetTable::canonical() const {
  std::vector<std::size_t> perm(schema_.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return schema_[a].name < schema_[b].name; });
  std::vector<ColumnRef> schema;
  for (auto p : perm) schema.push_back(schema_[p]);
  MultisetTable out(schema);
  for (const auto& [row, m] : rows_) {
    Row r;
    for (auto p : perm) r.push_back(row[p]);
    out.add(r, m);
  }
  return out;
}

std::string MultisetTable::to_text() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < schema_.size(); ++i) out << (i ? " | " : "") << schema_[i].name;
  out << "\n";
  for (const auto& [row, m] : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " | " : "") << value_to_string(row[i]);
    if (m != 1) out << "  x" << m;
    out << "\n";
  }
  return out.str();
}

bool MultisetTable::operator==(const MultisetTable& other) const {
  if (schema_.size() != other.schema_.size()) return false;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name != other.schema_[i].name) return false;
  }
  return rows_ == other.rows_;
}

MultisetTable multiset_union(const MultisetTable& a, const MultisetTable& b) {
  MultisetTable out = a;
  for (const auto& [row, m] : b.rows()) out.add(row, m);
  return out;
}

MultisetTable monus(const MultisetTable& a, const MultisetTable& b) {
  MultisetTable out(a.schema());
  for (const auto& [row, m] : a.rows()) {
    std::int64_t left = m - b.multiplicity(row);
    if (left > 0) out.add(row, left);
  }
  return out;
}

MultisetTable apply_delta(const MultisetTable& t, const DeltaPair& d) { return monus(multiset_union(t, d.plus), d.minus); }

namespace {

bool numeric(const Value& v) { return !std::holds_alternative<std::string>(v); }

double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

Value literal_value(const Literal& lit) {
  if (const auto* i = std::get_if<std::int64_t>(&lit)) return *i;
  if (const auto* d = std::get_if<double>(&lit)) return *d;
  return std::get<std::string>(lit);
}

bool satisfies(const Value& v, CompareOp op, const Literal& lit) {
  Value l = literal_value(lit);
  int cmp = 0;
  if (numeric(v) && numeric(l)) {
    double a = as_double(v), b = as_double(l);
    cmp = a < b ? -1 : (a > b ? 1 : 0);
  } else if (!numeric(v) && !numeric(l)) {
    cmp = std::get<std::string>(v).compare(std::get<std::string>(l));
    cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
  } else {
    return false;
  }
  switch (op) {
    case CompareOp::Eq:
      return cmp == 0;
    case CompareOp::Lt:
      return cmp < 0;
    case CompareOp::Le:
      return cmp <= 0;
    case CompareOp::Gt:
      return cmp > 0;
    case CompareOp::Ge:
      return cmp >= 0;
  }
  return false;
}

Value add_values(const Value& a, const Value& b, int sign) {
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
    return std::get<std::int64_t>(a) + sign * std::get<std::int64_t>(b);
  return as_double(a) + sign * as_double(b);
}

MultisetTable rename_scan(const MultisetTable& base, const RelationInfo& rel, const std::string& alias) {
  std::vector<ColumnRef> schema;
  for (const auto& c : rel.columns) schema.push_back({alias + "." + c.name, c.type});
  if (base.schema().size() != schema.size())
    throw SchemaMismatch("stored relation " + rel.name + " has the wrong arity");
  MultisetTable out(schema);
  for (const auto& [row, m] : base.rows()) out.add(row, m);
  return out;
}

MultisetTable filter(const MultisetTable& in, const std::vector<ColumnPredicate>& preds) {
  std::vector<int> idx;
  for (const auto& p : preds) {
    int k = in.column_index(p.column);
    if (k < 0) throw SchemaMismatch("selection column " + p.column + " missing");
    idx.push_back(k);
  }
  MultisetTable out(in.schema());
  for (const auto& [row, m] : in.rows()) {
    bool keep = true;
    for (std::size_t k = 0; k < preds.size() && keep; ++k) keep = satisfies(row[idx[k]], preds[k].op, preds[k].value);
    if (keep) out.add(row, m);
  }
  return out;
}

MultisetTable join_tables(const MultisetTable& a, const MultisetTable& b, const std::vector<JoinPredicate>& preds) {
  std::vector<int> ka, kb;
  for (const auto& p : preds) {
    int al = a.column_index(p.left), ar = a.column_index(p.right);
    int bl = b.column_index(p.left), br = b.column_index(p.right);
    if (al >= 0 && br >= 0) {
      ka.push_back(al);
      kb.push_back(br);
    } else if (ar >= 0 && bl >= 0) {
      ka.push_back(ar);
      kb.push_back(bl);
    } else {
      throw SchemaMismatch("join predicate " + p.to_string() + " does not span its inputs");
    }
  }
  std::vector<ColumnRef> concat = a.schema();
  concat.insert(concat.end(), b.schema().begin(), b.schema().end());
  std::vector<std::size_t> perm(concat.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) { return concat[x].name < concat[y].name; });
  std::vector<ColumnRef> schema;
  for (auto p : perm) schema.push_back(concat[p]);
  MultisetTable out(schema);

  std::map<Row, std::vector<std::pair<const Row*, std::int64_t>>> index;
  for (const auto& [row, m] : b.rows()) {
    Row key;
    for (int k : kb) key.push_back(row[k]);
    index[key].emplace_back(&row, m);
  }
  for (const auto& [row, m] : a.rows()) {
    Row key;
    for (int k : ka) key.push_back(row[k]);
    auto it = index.find(key);
    if (it == index.end()) continue;
    for (const auto& [other, om] : it->second) {
      Row joined = row;
      joined.insert(joined.end(), other->begin(), other->end());
      Row ordered;
      ordered.reserve(joined.size());
      for (auto p : perm) ordered.push_back(std::move(joined[p]));
      out.add(ordered, m * om);
    }
  }
  return out;
}

MultisetTable aggregate_table(const MultisetTable& in, const std::vector<std::string>& groups,
                              const std::vector<AggregateSpec>& aggs) {
  std::vector<int> gidx, aidx;
  std::vector<ColumnRef> schema;
  for (const auto& g : groups) {
    int k = in.column_index(g);
    if (k < 0) throw SchemaMismatch("group column " + g + " missing");
    gidx.push_back(k);
    schema.push_back(in.schema()[k]);
  }
  for (const auto& a : aggs) {
    int k = in.column_index(a.column);
    if (k < 0) throw SchemaMismatch("aggregate column " + a.column + " missing");
    aidx.push_back(k);
    ColumnType t = ColumnType::Int;
    if (a.func == AggFunc::Sum) t = in.schema()[k].type;
    if (a.func == AggFunc::Avg) t = ColumnType::Decimal;
    schema.push_back({a.output_name(), t});
  }
  schema.push_back({kCountColumn, ColumnType::Int});

  std::map<Row, Row> acc;
  for (const auto& [row, m] : in.rows()) {
    Row key;
    for (int k : gidx) key.push_back(row[k]);
    auto it = acc.find(key);
    if (it == acc.end()) {
      Row init;
      for (std::size_t j = 0; j < aggs.size(); ++j) {
        if (aggs[j].func == AggFunc::Count) {
          init.emplace_back(std::int64_t{0});
        } else if (aggs[j].func == AggFunc::Avg || std::holds_alternative<double>(row[aidx[j]])) {
          init.emplace_back(0.0);
        } else {
          init.emplace_back(std::int64_t{0});
        }
      }
      init.emplace_back(std::int64_t{0});
      it = acc.emplace(key, std::move(init)).first;
    }
    Row& a = it->second;
    for (std::size_t j = 0; j < aggs.size(); ++j) {
      if (aggs[j].func == AggFunc::Count) {
        a[j] = std::get<std::int64_t>(a[j]) + m;
      } else if (std::holds_alternative<double>(a[j])) {
        a[j] = std::get<double>(a[j]) + as_double(row[aidx[j]]) * static_cast<double>(m);
      } else {
        a[j] = std::get<std::int64_t>(a[j]) + std::get<std::int64_t>(row[aidx[j]]) * m;
      }
    }
    a.back() = std::get<std::int64_t>(a.back()) + m;
  }
  MultisetTable out(schema);
  for (auto& [key, a] : acc) {
    Row r = key;
    r.insert(r.end(), a.begin(), a.end());
    out.add(r, 1);
  }
  return out;
}

}  // namespace

MultisetTable merge_aggregate(const MultisetTable& state, const MultisetTable& delta, UpdateKind kind,
                              std::size_t group_columns) {
  std::map<Row, Row> groups;
  for (const auto& [row, m] : state.rows()) {
    Row key(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(group_columns));
    groups[key] = row;
  }
  const int sign = kind == UpdateKind::Insert ? 1 : -1;
  for (const auto& [row, m] : delta.rows()) {
    Row key(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(group_columns));
    auto it = groups.find(key);
    if (it == groups.end()) {
      Row fresh = row;
      if (sign < 0) {
        for (std::size_t j = group_columns; j < fresh.size(); ++j) fresh[j] = add_values(Value{std::int64_t{0}}, row[j], -1);
      }
      groups.emplace(key, std::move(fresh));
      continue;
    }
    for (std::size_t j = group_columns; j < row.size(); ++j) it->second[j] = add_values(it->second[j], row[j], sign);
  }
  MultisetTable out(state.schema().empty() ? delta.schema() : state.schema());
  for (const auto& [key, row] : groups) {
    if (std::get<std::int64_t>(row.back()) == 0) continue;
    out.add(row, 1);
  }
  return out;
}

MultisetTable finalize_aggregate(const MultisetTable& state, const std::vector<AggregateSpec>& aggregates,
                                 std::size_t group_columns) {
  MultisetTable out(state.schema());
  for (const auto& [row, m] : state.rows()) {
    Row r = row;
    double count = static_cast<double>(std::get<std::int64_t>(row.back()));
    for (std::size_t j = 0; j < aggregates.size(); ++j) {
      if (aggregates[j].func == AggFunc::Avg) r[group_columns + j] = as_double(row[group_columns + j]) / count;
    }
    out.add(r, m);
  }
  return out;
}

MultisetTable eval(const LogicalExpr& expr, const Database& db, const Catalog& catalog) {
  switch (expr.kind) {
    case LogicalExpr::Kind::Scan: {
      const RelationInfo* rel = catalog.find(expr.relation);
      if (rel == nullptr) throw UnknownRelation("unknown relation '" + expr.relation + "'");
      auto it = db.find(expr.relation);
      if (it == db.end()) throw SchemaMismatch("database lacks relation " + expr.relation);
      return rename_scan(it->second, *rel, expr.alias);
    }
    case LogicalExpr::Kind::Select:
      return filter(eval(*expr.inputs[0], db, catalog), expr.predicates);
    case LogicalExpr::Kind::Join:
      return join_tables(eval(*expr.inputs[0], db, catalog), eval(*expr.inputs[1], db, catalog), expr.join_predicates);
    case LogicalExpr::Kind::Aggregate:
      return aggregate_table(eval(*expr.inputs[0], db, catalog), expr.group_columns, expr.aggregates);
  }
  return {};
}

StagedDatabase stage_database(const Catalog& catalog, const Database& base, const std::vector<DeltaPair>& per_relation) {
  StagedDatabase out;
  const int last = catalog.update_count();
  out.stages.reserve(last + 1);
  out.stages.push_back(base);
  out.deltas.assign(last + 1, MultisetTable{});
  for (int i = 1; i <= last; ++i) {
    UpdateRef ref = decode_update(i);
    const std::string& name = catalog.relation(ref.relation).name;
    const DeltaPair& d = per_relation.at(ref.relation);
    Database next = out.stages.back();
    MultisetTable& t = next.at(name);
    if (ref.kind == UpdateKind::Insert) {
      t = multiset_union(t, d.plus);
      out.deltas[i] = d.plus;
    } else {
      t = monus(t, d.minus);
      out.deltas[i] = d.minus;
    }
    out.stages.push_back(std::move(next));
  }
  return out;
}

Catalog scale_catalog(const Catalog& catalog, std::int64_t max_rows) {
  std::vector<RelationInfo> rels = catalog.relations();
  for (auto& r : rels) {
    r.cardinality = std::min(r.cardinality, max_rows);
    for (auto& [col, d] : r.distinct) d = std::max(1.0, std::min(d, static_cast<double>(r.cardinality)));
  }
  return Catalog(rels, catalog.foreign_keys(), catalog.params());
}

namespace {

class Generator {
 public:
  Generator(const Catalog& catalog, const UpdateSpec& spec, std::uint64_t seed)
      : cat_(catalog), spec_(spec), rng_(seed) {
    next_key_.assign(catalog.relation_count(), 0);
  }

  GeneratedData run() {
    GeneratedData out;
    const std::size_t n = cat_.relation_count();
    for (std::size_t r = 0; r < n; ++r) out.base[cat_.relation(r).name] = MultisetTable(schema(r));
    std::vector<char> done(n, 0);
    for (std::size_t pass = 0; pass < n; ++pass) {
      for (std::size_t r = 0; r < n; ++r) {
        if (done[r]) continue;
        bool ready = true;
        for (const auto& fk : cat_.foreign_keys()) {
          if (fk.from_rel != cat_.relation(r).name || fk.to_rel == fk.from_rel) continue;
          if (!done[*cat_.index_of(fk.to_rel)]) ready = false;
        }
        if (!ready && pass + 1 < n) continue;
        for (std::int64_t k = 0; k < cat_.relation(r).cardinality; ++k) out.base[cat_.relation(r).name].add(make_row(r, out.base));
        done[r] = 1;
      }
    }
    Database current = out.base;
    out.deltas.assign(n, DeltaPair{});
    for (std::size_t r = 0; r < n; ++r) {
      out.deltas[r].plus = MultisetTable(schema(r));
      out.deltas[r].minus = MultisetTable(schema(r));
    }
    for (int i = 1; i <= cat_.update_count(); ++i) {
      UpdateRef ref = decode_update(i);
      const RelationInfo& rel = cat_.relation(ref.relation);
      std::int64_t count = delta_stats(cat_, spec_, i).cardinality;
      if (ref.kind == UpdateKind::Insert) {
        for (std::int64_t k = 0; k < count; ++k) {
          Row row = make_row(ref.relation, current);
          out.deltas[ref.relation].plus.add(row);
          current[rel.name].add(row);
        }
      } else {
        std::vector<Row> pool = deletable(ref.relation, current);
        std::shuffle(pool.begin(), pool.end(), rng_);
        if (static_cast<std::int64_t>(pool.size()) > count) pool.resize(static_cast<std::size_t>(count));
        for (const auto& row : pool) {
          out.deltas[ref.relation].minus.add(row);
          current[rel.name].add(row, -1);
        }
      }
    }
    return out;
  }

 private:
  std::vector<ColumnRef> schema(std::size_t r) const {
    std::vector<ColumnRef> s;
    for (const auto& c : cat_.relation(r).columns) s.push_back({c.name, c.type});
    return s;
  }

  Value typed(ColumnType t, std::int64_t k, bool key) {
    switch (t) {
      case ColumnType::Int:
        return k;
      case ColumnType::Decimal:
        return static_cast<double>(k) * 0.25;
      case ColumnType::String:
        return std::string(key ? "k" : "v") + std::to_string(k);
    }
    return k;
  }

  Row make_row(std::size_t r, const Database& db) {
    const RelationInfo& rel = cat_.relation(r);
    Row row(rel.columns.size());
    std::vector<char> set(rel.columns.size(), 0);
    for (const auto& fk : cat_.foreign_keys()) {
      if (fk.from_rel != rel.name) continue;
      const MultisetTable& target = db.at(fk.to_rel);
      if (target.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, target.rows().size() - 1);
      auto it = target.rows().begin();
      std::advance(it, static_cast<std::ptrdiff_t>(pick(rng_)));
      const RelationInfo& to = *cat_.find(fk.to_rel);
      for (std::size_t k = 0; k < fk.from_cols.size(); ++k) {
        std::size_t from_idx = col_index(rel, fk.from_cols[k]);
        std::size_t to_idx = col_index(to, fk.to_cols[k]);
        row[from_idx] = it->first[to_idx];
        set[from_idx] = 1;
      }
    }
    const std::int64_t key = next_key_[r]++;
    for (std::size_t c = 0; c < rel.columns.size(); ++c) {
      if (set[c]) continue;
      const Column& col = rel.columns[c];
      bool first_pk = !rel.primary_key.empty() && rel.primary_key.front() == col.name;
      if (first_pk) {
        row[c] = typed(col.type, key, true);
        continue;
      }
      std::int64_t domain = std::max<std::int64_t>(1, static_cast<std::int64_t>(rel.distinct_of(col.name)));
      std::uniform_int_distribution<std::int64_t> pick(0, domain - 1);
      row[c] = typed(col.type, pick(rng_), false);
    }
    return row;
  }

  static std::size_t col_index(const RelationInfo& rel, const std::string& name) {
    for (std::size_t i = 0; i < rel.columns.size(); ++i) {
      if (rel.columns[i].name == name) return i;
    }
    throw SchemaMismatch("unknown column " + name);
  }

  std::vector<Row> deletable(std::size_t r, const Database& db) {
    const RelationInfo& rel = cat_.relation(r);
    std::set<Row> referenced;
    std::vector<std::vector<std::size_t>> key_cols;
    for (const auto& fk : cat_.foreign_keys()) {
      if (fk.to_rel != rel.name) continue;
      const RelationInfo& from = *cat_.find(fk.from_rel);
      std::vector<std::size_t> to_idx;
      for (const auto& c : fk.to_cols) to_idx.push_back(col_index(rel, c));
      key_cols.push_back(to_idx);
      for (const auto& [row, m] : db.at(fk.from_rel).rows()) {
        Row key;
        for (const auto& c : fk.from_cols) key.push_back(row[col_index(from, c)]);
        referenced.insert(key);
      }
    }
    std::vector<Row> pool;
    for (const auto& [row, m] : db.at(rel.name).rows()) {
      bool blocked = false;
      for (const auto& idx : key_cols) {
        Row key;
        for (auto k : idx) key.push_back(row[k]);
        if (referenced.count(key)) blocked = true;
      }
      if (blocked) continue;
      for (std::int64_t k = 0; k < m; ++k) pool.push_back(row);
    }
    return pool;
  }

  const Catalog& cat_;
  const UpdateSpec& spec_;
  std::mt19937_64 rng_;
  std::vector<std::int64_t> next_key_;
};

json row_to_json(const Row& row) {
  json out = json::array();
  for (const auto& v : row) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      out.push_back(*i);
    } else if (const auto* d = std::get_if<double>(&v)) {
      out.push_back(*d);
    } else {
      out.push_back(std::get<std::string>(v));
    }
  }
  return out;
}

json table_to_json(const MultisetTable& t) {
  json out = json::array();
  for (const auto& [row, m] : t.rows()) {
    for (std::int64_t k = 0; k < m; ++k) out.push_back(row_to_json(row));
  }
  return out;
}

MultisetTable table_from_json(const RelationInfo& rel, const json& rows) {
  std::vector<ColumnRef> schema;
  for (const auto& c : rel.columns) schema.push_back({c.name, c.type});
  MultisetTable t(schema);
  for (const auto& r : rows) {
    if (r.size() != rel.columns.size()) throw SchemaMismatch("row arity mismatch in data for " + rel.name);
    Row row;
    for (std::size_t k = 0; k < rel.columns.size(); ++k) {
      switch (rel.columns[k].type) {
        case ColumnType::Int:
          row.emplace_back(r[k].get<std::int64_t>());
          break;
        case ColumnType::Decimal:
          row.emplace_back(r[k].get<double>());
          break;
        case ColumnType::String:
          row.emplace_back(r[k].get<std::string>());
          break;
      }
    }
    t.add(row);
  }
  return t;
}

}  // namespace

GeneratedData generate_database(const Catalog& catalog, const UpdateSpec& spec, std::uint64_t seed) {
  return Generator(catalog, spec, seed).run();
}

json database_to_json(const Catalog& catalog, const GeneratedData& data) {
  json doc;
  for (std::size_t r = 0; r < catalog.relation_count(); ++r) {
    const std::string& name = catalog.relation(r).name;
    doc["relations"][name] = table_to_json(data.base.at(name));
    doc["deltas"][name] = {{"insert", table_to_json(data.deltas[r].plus)},
                           {"delete", table_to_json(data.deltas[r].minus)}};
  }
  return doc;
}

GeneratedData database_from_json(const Catalog& catalog, const json& doc) {
  try {
    GeneratedData out;
    out.deltas.assign(catalog.relation_count(), DeltaPair{});
    for (std::size_t r = 0; r < catalog.relation_count(); ++r) {
      const RelationInfo& rel = catalog.relation(r);
      out.base[rel.name] = table_from_json(rel, doc.at("relations").value(rel.name, json::array()));
      json d = doc.contains("deltas") ? doc.at("deltas").value(rel.name, json::object()) : json::object();
      out.deltas[r].plus = table_from_json(rel, d.value("insert", json::array()));
      out.deltas[r].minus = table_from_json(rel, d.value("delete", json::array()));
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed data file: ") + e.what());
  }
}

PlanExecutor::PlanExecutor(const Optimizer& opt, const StagedDatabase& db) : opt_(opt), memo_(opt.memo()), db_(db) {}

const Database& PlanExecutor::stage_db(int stage) const {
  if (stage >= memo_.update_count()) return db_.stages.back();
  return db_.stages.at(stage);
}

MultisetTable PlanExecutor::scan(const OpNode& op, const Database& db) const {
  auto it = db.find(op.desc.relation);
  if (it == db.end()) throw SchemaMismatch("database lacks relation " + op.desc.relation);
  return rename_scan(it->second, *memo_.catalog().find(op.desc.relation), op.desc.alias);
}

MultisetTable PlanExecutor::apply_op(const OpNode& op, const std::vector<MultisetTable>& inputs) const {
  switch (op.desc.kind) {
    case OpKind::Select:
      return filter(inputs[0], op.desc.predicates);
    case OpKind::Join:
      return join_tables(inputs[0], inputs[1], op.desc.join_predicates);
    case OpKind::Aggregate:
      return aggregate_table(inputs[0], op.desc.group_columns, op.desc.aggregates);
    case OpKind::Scan:
      break;
  }
  throw PlanInconsistent("scan operations take no inputs");
}

MultisetTable PlanExecutor::eval_plan(const PlanNode& p) {
  switch (p.kind) {
    case PlanNode::Kind::Compute: {
      const OpNode& op = memo_.op(p.op);
      if (op.desc.kind == OpKind::Scan) return scan(op, stage_db(p.stage));
      std::vector<MultisetTable> inputs;
      for (const auto& c : p.inputs) inputs.push_back(eval_plan(c));
      return apply_op(op, inputs);
    }
    case PlanNode::Kind::Reuse: {
      if (!opt_.materialized().contains(p.result))
        throw PlanInconsistent("plan reuses E" + std::to_string(p.result.node) + " which is not materialized");
      if (p.result.update_index > 0) return delta(p.result);
      if (p.stage == memo_.final_stage()) {
        auto it = final_.find(p.result.node);
        if (it == final_.end()) throw PlanInconsistent("final contents of E" + std::to_string(p.result.node) + " not ready");
        return it->second;
      }
      if (!opt_.incremental(p.result.node))
        throw PlanInconsistent("stored E" + std::to_string(p.result.node) + " is not maintained incrementally");
      return store_.at(p.result.node);
    }
    case PlanNode::Kind::Log: {
      const EquivNode& n = memo_.node(p.result.node);
      const OpNode& op = memo_.op(n.children.front());
      return rename_scan(db_.deltas.at(p.result.update_index), *memo_.catalog().find(op.desc.relation), op.desc.alias);
    }
    case PlanNode::Kind::Term: {
      const OpNode& op = memo_.op(p.op);
      std::vector<MultisetTable> inputs;
      for (const auto& c : p.inputs) inputs.push_back(eval_plan(c));
      return apply_op(op, inputs);
    }
    case PlanNode::Kind::Union: {
      MultisetTable out = eval_plan(p.inputs.front());
      for (std::size_t k = 1; k < p.inputs.size(); ++k) out = multiset_union(out, eval_plan(p.inputs[k]));
      return out;
    }
    case PlanNode::Kind::Empty:
      return MultisetTable(memo_.node(p.result.node).schema);
  }
  return {};
}

const MultisetTable& PlanExecutor::delta(const ResultId& r) {
  auto it = delta_cache_.find(r);
  if (it != delta_cache_.end()) return it->second;
  MultisetTable t = eval_plan(opt_.diff_plan(r.node, r.update_index));
  return delta_cache_.emplace(r, std::move(t)).first->second;
}

MultisetTable PlanExecutor::fresh(int node, int stage) { return eval_plan(opt_.fresh_plan(node, stage)); }

MultisetTable PlanExecutor::reference_term(int op_id, int term, int i) {
  const OpNode& op = memo_.op(op_id);
  const DiffTerm& t = op.diff.at(i).terms.at(term);
  int d = memo_.resolve(op.inputs[t.diff_input]);
  MultisetTable before = fresh(d, i - 1), after = fresh(d, i);
  std::vector<MultisetTable> inputs(op.inputs.size());
  inputs[t.diff_input] = decode_update(i).kind == UpdateKind::Insert ? monus(after, before) : monus(before, after);
  if (t.full_input >= 0) inputs[t.full_input] = fresh(memo_.resolve(op.inputs[t.full_input]), t.full_stage);
  return apply_op(op, inputs);
}

std::map<int, MultisetTable> PlanExecutor::propagate() {
  store_.clear();
  final_.clear();
  delta_cache_.clear();
  const MaterializationSet& m = opt_.materialized();
  std::vector<int> fulls;
  for (int e : memo_.topo_order()) {
    if (m.contains({e, 0})) fulls.push_back(e);
  }
  for (int y : fulls) store_[y] = eval_plan(opt_.fresh_plan(y, 0));

  for (int i = 1; i <= memo_.update_count(); ++i) {
    current_ = i;
    std::vector<int> merging;
    for (int y : fulls) {
      const DiffEntry& d = memo_.node(y).diff[i];
      if (!opt_.incremental(y) || d.null || d.empty) continue;
      delta({y, i});
      merging.push_back(y);
    }
    for (const auto& r : m.results()) {
      if (r.update_index == i && !opt_.is_empty_result(r)) delta(r);
    }
    const UpdateKind kind = decode_update(i).kind;
    for (int y : merging) {
      const MultisetTable& d = delta_cache_.at({y, i});
      const EquivNode& n = memo_.node(y);
      if (n.aggregate) {
        const OpNode& agg = memo_.op(n.children.front());
        store_[y] = merge_aggregate(store_[y], d, kind, agg.desc.group_columns.size());
      } else {
        store_[y] = kind == UpdateKind::Insert ? multiset_union(store_[y], d) : monus(store_[y], d);
      }
    }
  }
  current_ = memo_.final_stage();
  for (int y : fulls) {
    if (opt_.incremental(y)) final_[y] = store_[y];
  }
  for (int y : fulls) {
    if (!opt_.incremental(y)) final_[y] = eval_plan(opt_.full_plan(y, memo_.final_stage()));
  }
  return final_;
}

namespace {

class Enumerator {
 public:
  Enumerator(const Memo& memo, std::size_t cap) : memo_(memo), cm_(memo.cost_model()), cap_(cap) {}

  const std::vector<double>& full(int e, int stage) {
    auto key = std::make_pair(e, stage);
    auto it = full_.find(key);
    if (it != full_.end()) return it->second;
    const EquivNode& n = memo_.node(e);
    std::vector<double> all;
    for (int o : n.children) {
      const OpNode& op = memo_.op(o);
      std::vector<Stats> inputs;
      std::vector<char> flags;
      if (op.desc.kind == OpKind::Scan) {
        inputs.push_back(n.stage_props[stage]);
        flags.push_back(0);
      } else {
        for (int in : op.inputs) {
          inputs.push_back(memo_.node(in).stage_props[stage]);
          flags.push_back(1);
        }
      }
      bool pipelined[2] = {flags.size() > 0 && flags[0], flags.size() > 1 && flags[1]};
      double exec = cm_.exec_cost(op.desc, inputs, std::span<const bool>(pipelined, flags.size()), n.stage_props[stage]).total;
      std::vector<double> acc{exec};
      for (int in : op.inputs) acc = product(acc, full(memo_.resolve(in), stage), 0);
      all.insert(all.end(), acc.begin(), acc.end());
      check(all.size());
    }
    return full_.emplace(key, std::move(all)).first->second;
  }

  const std::vector<double>& diff(int e, int i) {
    auto key = std::make_pair(e, i);
    auto it = diff_.find(key);
    if (it != diff_.end()) return it->second;
    const EquivNode& n = memo_.node(e);
    if (n.diff[i].null) throw NullDifferential("differential " + std::to_string(i) + " is null");
    std::vector<double> all;
    if (n.diff[i].empty || memo_.is_scan(e)) {
      all.push_back(0);
    } else {
      for (int o : n.children) {
        const OpNode& op = memo_.op(o);
        const OpDiff& od = op.diff[i];
        if (od.empty) continue;
        std::vector<std::vector<double>> lists;
        for (const auto& t : od.terms) {
          if (t.empty) continue;
          std::vector<Stats> inputs(op.inputs.size());
          inputs[t.diff_input] = memo_.node(op.inputs[t.diff_input]).diff[i].delta_props;
          if (t.full_input >= 0) inputs[t.full_input] = memo_.node(op.inputs[t.full_input]).stage_props[t.full_stage];
          bool pipelined[2] = {true, true};
          double local = cm_.exec_cost(op.desc, inputs, std::span<const bool>(pipelined, inputs.size()), t.props).total;
          std::vector<double> acc{local};
          acc = product(acc, diff(memo_.resolve(op.inputs[t.diff_input]), i), 0);
          if (t.full_input >= 0) acc = product(acc, full(memo_.resolve(op.inputs[t.full_input]), t.full_stage), 0);
          lists.push_back(std::move(acc));
        }
        if (lists.size() == 1) {
          all.insert(all.end(), lists[0].begin(), lists[0].end());
        } else {
          auto both = product(lists[0], lists[1], od.union_cost.total);
          all.insert(all.end(), both.begin(), both.end());
        }
        check(all.size());
      }
    }
    return diff_.emplace(key, std::move(all)).first->second;
  }

 private:
  std::vector<double> product(const std::vector<double>& a, const std::vector<double>& b, double extra) {
    check(a.size() * b.size());
    std::vector<double> out;
    out.reserve(a.size() * b.size());
    for (double x : a) {
      for (double y : b) {
        double v = x;
        v += y;
        if (extra != 0) v += extra;
        out.push_back(v);
      }
    }
    return out;
  }

  void check(std::size_t n) const {
    if (n > cap_) throw TooLarge("plan space exceeds " + std::to_string(cap_) + " plans");
  }

  const Memo& memo_;
  const CostModel& cm_;
  std::size_t cap_;
  std::map<std::pair<int, int>, std::vector<double>> full_;
  std::map<std::pair<int, int>, std::vector<double>> diff_;
};

}  // namespace

std::vector<double> enumerate_plan_costs(const Memo& memo, const ResultId& x, std::size_t cap) {
  if (!memo.annotated()) throw ValidationError("enumeration requires an annotated memo");
  if (memo.leaf_count(x.node) > 4) throw TooLarge("enumeration is limited to four base relations");
  Enumerator en(memo, cap);
  return x.update_index == 0 ? en.full(memo.resolve(x.node), memo.final_stage())
                             : en.diff(memo.resolve(x.node), x.update_index);
}

Enumeration enumerate_plans(const Memo& memo, const ResultId& x, std::size_t cap) {
  std::vector<double> costs = enumerate_plan_costs(memo, x, cap);
  Enumeration out;
  out.count = costs.size();
  out.min_cost = costs.empty() ? 0 : *std::min_element(costs.begin(), costs.end());
  return out;
}

}  // namespace mvopt
