#pragma once

#include <string>
#include <vector>

#include "mvopt/algebra.hpp"
#include "mvopt/catalog.hpp"
#include "mvopt/driver.hpp"

namespace mvopt::testing {

struct IntCol {
  std::string name;
  double distinct = 0;  // 0 = unique
};

inline RelationInfo int_relation(const std::string& name, std::int64_t card, double bytes, std::vector<IntCol> cols,
                                 std::vector<std::string> pk = {}) {
  RelationInfo r;
  r.name = name;
  r.cardinality = card;
  r.tuple_bytes = bytes;
  r.primary_key = std::move(pk);
  for (const auto& c : cols) {
    r.columns.push_back({c.name, ColumnType::Int});
    if (c.distinct > 0) r.distinct[c.name] = c.distinct;
  }
  return r;
}

inline Session session_of(const Catalog& catalog, const std::string& views, double pct, bool fk_prune = true) {
  return make_session(catalog, parse_views(views, catalog), make_update_spec(catalog, pct), fk_prune);
}

inline Session session_of(const Catalog& catalog, const std::string& views, const UpdateSpec& spec,
                          bool fk_prune = true) {
  return make_session(catalog, parse_views(views, catalog), spec, fk_prune);
}

/// Live node whose leaf units are exactly the given aliases' scans, or -1.
inline int node_with_aliases(const Memo& memo, std::vector<std::string> aliases) {
  std::sort(aliases.begin(), aliases.end());
  for (int e : memo.topo_order()) {
    const EquivNode& n = memo.node(e);
    if (n.aggregate) continue;
    std::vector<std::string> have;
    for (const auto& [alias, leaf] : n.alias_leaf) have.push_back(alias);
    if (have == aliases && !memo.is_scan(e)) return e;
    if (have == aliases && aliases.size() == 1) return e;
  }
  return -1;
}

}  // namespace mvopt::testing
