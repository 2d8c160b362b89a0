#include "mvopt/workloads.hpp"

#include "mvopt/error.hpp"

namespace mvopt {

namespace {

struct Col {
  const char* name;
  ColumnType type;
  double distinct;  // 0 = unique
};

RelationInfo relation(const std::string& name, std::int64_t card, double bytes, std::vector<Col> cols,
                      std::vector<std::string> pk) {
  RelationInfo r;
  r.name = name;
  r.cardinality = card;
  r.tuple_bytes = bytes;
  r.primary_key = std::move(pk);
  for (const auto& c : cols) {
    r.columns.push_back({c.name, c.type});
    if (c.distinct > 0) r.distinct[c.name] = c.distinct;
  }
  return r;
}

ForeignKey fk(std::string from, std::string from_col, std::string to, std::string to_col) {
  return {std::move(from), {std::move(from_col)}, std::move(to), {std::move(to_col)}};
}

constexpr auto I = ColumnType::Int;
constexpr auto D = ColumnType::Decimal;
constexpr auto S = ColumnType::String;

const char* kJoin5 =
    "Q3 = SELECT c_mktsegment = 'v1' (customer) JOIN orders ON c_custkey = o_custkey"
    " JOIN lineitem ON o_orderkey = l_orderkey\n"
    "Q5 = customer JOIN orders ON c_custkey = o_custkey JOIN lineitem ON o_orderkey = l_orderkey"
    " JOIN supplier ON l_suppkey = s_suppkey JOIN nation ON s_nationkey = n_nationkey\n"
    "Q10 = customer JOIN orders ON c_custkey = o_custkey JOIN lineitem ON o_orderkey = l_orderkey"
    " JOIN nation ON c_nationkey = n_nationkey\n"
    "Q9 = part JOIN partsupp ON p_partkey = ps_partkey JOIN supplier ON ps_suppkey = s_suppkey"
    " JOIN nation ON s_nationkey = n_nationkey\n"
    "Q14 = SELECT p_size < 10 (part) JOIN lineitem ON p_partkey = l_partkey"
    " JOIN orders ON l_orderkey = o_orderkey\n";

const char* kAgg5 =
    "A3 = GROUPBY(o_orderkey, o_orderdate; sum(l_extendedprice))(SELECT c_mktsegment = 'v1' (customer)"
    " JOIN orders ON c_custkey = o_custkey JOIN lineitem ON o_orderkey = l_orderkey)\n"
    "A5 = GROUPBY(n_name; sum(l_extendedprice))(customer JOIN orders ON c_custkey = o_custkey"
    " JOIN lineitem ON o_orderkey = l_orderkey JOIN supplier ON l_suppkey = s_suppkey"
    " JOIN nation ON s_nationkey = n_nationkey)\n"
    "A10 = GROUPBY(c_custkey, n_name; sum(l_extendedprice), count(*))(customer JOIN orders ON c_custkey = o_custkey"
    " JOIN lineitem ON o_orderkey = l_orderkey JOIN nation ON c_nationkey = n_nationkey)\n"
    "A9 = GROUPBY(n_name; sum(ps_supplycost), avg(ps_availqty))(part JOIN partsupp ON p_partkey = ps_partkey"
    " JOIN supplier ON ps_suppkey = s_suppkey JOIN nation ON s_nationkey = n_nationkey)\n"
    "A14 = GROUPBY(p_type; sum(l_extendedprice), avg(l_quantity))(SELECT p_size < 10 (part)"
    " JOIN lineitem ON p_partkey = l_partkey JOIN orders ON l_orderkey = o_orderkey)\n";

Catalog example31_catalog() {
  std::vector<RelationInfo> rels = {
      relation("R", 200000, 100, {{"rid", I, 0}, {"a", I, 200000}, {"b", I, 1000}}, {"rid"}),
      relation("S", 40, 100, {{"a", I, 0}, {"d", I, 40}}, {"a"}),
      relation("P", 5000, 100, {{"d", I, 0}, {"e", I, 100}}, {"d"}),
      relation("T", 1000, 100, {{"b", I, 0}, {"f", I, 100}}, {"b"}),
  };
  return Catalog(rels, {});
}

Catalog example32_catalog() {
  std::vector<RelationInfo> rels = {
      relation("A", 10000, 80, {{"x", I, 10000}, {"u", I, 100}}, {}),
      relation("B", 10000, 80, {{"x", I, 10000}, {"y", I, 1000}}, {}),
      relation("C", 10000, 80, {{"y", I, 1000}, {"z", I, 10000}}, {}),
      relation("D", 10000, 80, {{"z", I, 10000}, {"w", I, 100}}, {}),
  };
  return Catalog(rels, {});
}

Catalog desk_catalog() {
  std::vector<RelationInfo> rels = {
      relation("dept", 8, 64, {{"dno", I, 0}, {"budget", D, 8}, {"region", S, 3}}, {"dno"}),
      relation("emp", 40, 64, {{"eid", I, 0}, {"dno", I, 8}, {"sal", D, 12}, {"age", I, 10}}, {"eid"}),
      relation("proj", 12, 64, {{"pid", I, 0}, {"dno", I, 8}, {"cost", D, 6}}, {"pid"}),
      relation("task", 50, 64, {{"tid", I, 0}, {"pid", I, 12}, {"eid", I, 40}, {"hours", I, 5}}, {"tid"}),
      relation("site", 20, 64, {{"sid", I, 0}, {"dno", I, 8}, {"size", I, 4}}, {"sid"}),
  };
  std::vector<ForeignKey> fks = {
      fk("emp", "dno", "dept", "dno"),
      fk("proj", "dno", "dept", "dno"),
      fk("task", "pid", "proj", "pid"),
      fk("task", "eid", "emp", "eid"),
  };
  CostParams params;
  params.block_bytes = 256;
  params.buffer_blocks = 4;
  return Catalog(rels, fks, params);
}

}  // namespace

Catalog star_catalog() {
  std::vector<RelationInfo> rels = {
      relation("region", 5, 124, {{"r_regionkey", I, 0}, {"r_name", S, 0}}, {"r_regionkey"}),
      relation("nation", 25, 128, {{"n_nationkey", I, 0}, {"n_name", S, 0}, {"n_regionkey", I, 5}}, {"n_nationkey"}),
      relation("supplier", 1000, 160, {{"s_suppkey", I, 0}, {"s_nationkey", I, 25}, {"s_acctbal", D, 900}},
               {"s_suppkey"}),
      relation("customer", 15000, 180,
               {{"c_custkey", I, 0}, {"c_nationkey", I, 25}, {"c_mktsegment", S, 5}, {"c_acctbal", D, 10000}},
               {"c_custkey"}),
      relation("part", 20000, 156, {{"p_partkey", I, 0}, {"p_type", S, 150}, {"p_size", I, 50}, {"p_retailprice", D, 2000}},
               {"p_partkey"}),
      relation("partsupp", 80000, 144,
               {{"ps_partkey", I, 20000}, {"ps_suppkey", I, 1000}, {"ps_supplycost", D, 10000}, {"ps_availqty", I, 9999}},
               {"ps_partkey", "ps_suppkey"}),
      relation("orders", 150000, 104,
               {{"o_orderkey", I, 0}, {"o_custkey", I, 10000}, {"o_orderdate", I, 2400}, {"o_totalprice", D, 140000},
                {"o_orderpriority", S, 5}},
               {"o_orderkey"}),
      relation("lineitem", 600000, 112,
               {{"l_linekey", I, 0}, {"l_orderkey", I, 150000}, {"l_partkey", I, 20000}, {"l_suppkey", I, 1000},
                {"l_quantity", I, 50}, {"l_extendedprice", D, 100000}, {"l_shipdate", I, 2500}},
               {"l_linekey"}),
  };
  std::vector<ForeignKey> fks = {
      fk("nation", "n_regionkey", "region", "r_regionkey"),
      fk("supplier", "s_nationkey", "nation", "n_nationkey"),
      fk("customer", "c_nationkey", "nation", "n_nationkey"),
      fk("partsupp", "ps_partkey", "part", "p_partkey"),
      fk("partsupp", "ps_suppkey", "supplier", "s_suppkey"),
      fk("orders", "o_custkey", "customer", "c_custkey"),
      fk("lineitem", "l_orderkey", "orders", "o_orderkey"),
      fk("lineitem", "l_partkey", "part", "p_partkey"),
      fk("lineitem", "l_suppkey", "supplier", "s_suppkey"),
  };
  return Catalog(rels, fks);
}

std::vector<Workload> bundled_workloads() {
  const Catalog star = star_catalog();
  std::vector<Workload> out;
  out.push_back({"join4", "one four-relation join view", star,
                 "V = SELECT c_mktsegment = 'v1' (customer) JOIN orders ON c_custkey = o_custkey JOIN lineitem ON o_orderkey = l_orderkey"
                 " JOIN nation ON c_nationkey = n_nationkey\n"});
  out.push_back({"agg4", "aggregate over the four-relation join", star,
                 "VA = GROUPBY(n_name; sum(l_extendedprice), count(*))(SELECT c_mktsegment = 'v1' (customer)"
                 " JOIN orders ON c_custkey = o_custkey JOIN lineitem ON o_orderkey = l_orderkey JOIN nation ON c_nationkey = n_nationkey)\n"});
  out.push_back({"join5", "five overlapping join views", star, kJoin5});
  out.push_back({"agg5", "five overlapping aggregate views", star, kAgg5});
  out.push_back({"views10", "the join and aggregate views together", star, std::string(kJoin5) + kAgg5});
  out.push_back({"example31", "two queries that can share R JOIN S", example31_catalog(),
                 "Q1 = R JOIN S ON R.a = S.a JOIN P ON S.d = P.d\n"
                 "Q2 = R JOIN T ON R.b = T.b JOIN S ON R.a = S.a\n"});
  out.push_back({"example32", "a four-way chain join", example32_catalog(),
                 "V = A JOIN B ON A.x = B.x JOIN C ON B.y = C.y JOIN SELECT w = 1 (D) ON C.z = D.z\n"});
  return out;
}

std::vector<std::string> workload_names() {
  std::vector<std::string> out;
  for (const auto& w : bundled_workloads()) out.push_back(w.name);
  for (const auto& w : desk_workloads()) out.push_back(w.name);
  return out;
}

const Workload& find_workload(const std::string& name) {
  static const std::vector<Workload> all = [] {
    auto v = bundled_workloads();
    auto d = desk_workloads();
    v.insert(v.end(), d.begin(), d.end());
    return v;
  }();
  for (const auto& w : all) {
    if (w.name == name) return w;
  }
  throw ValidationError("unknown workload '" + name + "'");
}

std::vector<Workload> desk_workloads() {
  const Catalog desk = desk_catalog();
  std::vector<Workload> out;
  out.push_back({"desk_join", "join views over a small FK schema", desk,
                 "J1 = emp JOIN dept ON emp.dno = dept.dno\n"
                 "J2 = task JOIN proj ON task.pid = proj.pid JOIN emp ON task.eid = emp.eid\n"
                 "J3 = SELECT age < 5 (emp) JOIN dept ON emp.dno = dept.dno JOIN proj ON dept.dno = proj.dno\n"});
  out.push_back({"desk_self", "self-join through aliases", desk,
                 "S1 = emp AS e1 JOIN emp AS e2 ON e1.dno = e2.dno\n"
                 "S2 = emp AS e1 JOIN emp AS e2 ON e1.dno = e2.dno JOIN dept ON e2.dno = dept.dno\n"});
  out.push_back({"desk_agg", "count, sum and avg views", desk,
                 "G1 = GROUPBY(dept.dno; count(*), sum(sal), avg(age))(emp JOIN dept ON emp.dno = dept.dno)\n"
                 "G2 = GROUPBY(proj.dno; sum(hours), avg(cost))(task JOIN proj ON task.pid = proj.pid)\n"
                 "G3 = GROUPBY(region; count(*), sum(size))(site JOIN dept ON site.dno = dept.dno)\n"
                 "G4 = GROUPBY(age; count(*))(emp)\n"});
  Catalog chain({relation("A", 40, 64, {{"x", I, 10}, {"u", I, 4}}, {}),
                 relation("B", 30, 64, {{"x", I, 10}, {"y", I, 8}}, {}),
                 relation("C", 30, 64, {{"y", I, 8}, {"z", I, 6}}, {}),
                 relation("D", 20, 64, {{"z", I, 6}, {"w", I, 5}}, {})},
                {}, desk.params());
  out.push_back({"desk_chain", "the four-way chain join at desk scale", chain,
                 "V = A JOIN B ON A.x = B.x JOIN C ON B.y = C.y JOIN D ON C.z = D.z\n"
                 "W = GROUPBY(A.u; sum(D.w), count(*))(A JOIN B ON A.x = B.x JOIN C ON B.y = C.y JOIN D ON C.z = D.z)\n"});
  return out;
}

}  // namespace mvopt
