#include "mvopt/driver.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mvopt/error.hpp"
#include "mvopt/workloads.hpp"

namespace mvopt {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void apply_cost_overrides(CostParams& p, const json& doc) {
  if (doc.is_null()) return;
  if (!doc.is_object()) throw ParseError("cost settings must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number()) throw ParseError("cost setting " + key + " must be a number");
    double v = value.get<double>();
    if (key == "block_bytes") {
      p.block_bytes = v;
    } else if (key == "buffer_blocks") {
      p.buffer_blocks = v;
    } else if (key == "w_seek") {
      p.w_seek = v;
    } else if (key == "w_read") {
      p.w_read = v;
    } else if (key == "w_write") {
      p.w_write = v;
    } else if (key == "w_cpu") {
      p.w_cpu = v;
    } else {
      throw ParseError("unknown cost setting " + key);
    }
  }
  if (p.block_bytes <= 0 || p.buffer_blocks < 2) throw ValidationError("block_bytes must be positive and buffer_blocks at least 2");
}

}  // namespace

void RunConfig::validate() const {
  if (mode != "greedy" && mode != "nogreedy") throw ValidationError("mode must be greedy or nogreedy");
  if (update_pct < 0 || update_pct > 100) throw ValidationError("update_pct must lie in [0, 100]");
  if (format != "text" && format != "json") throw ValidationError("format must be text or json");
  if (budget_blocks && *budget_blocks < 0) throw ValidationError("budget must be non-negative");
}

RunConfig config_from_json(const json& doc, RunConfig base) {
  try {
    if (doc.contains("workload")) base.workload = doc.at("workload").get<std::string>();
    if (doc.contains("catalog")) base.catalog_path = doc.at("catalog").get<std::string>();
    if (doc.contains("views")) base.views_path = doc.at("views").get<std::string>();
    if (doc.contains("data")) base.data_path = doc.at("data").get<std::string>();
    if (doc.contains("update_pct")) base.update_pct = doc.at("update_pct").get<double>();
    if (doc.contains("updates")) base.update_overrides = doc.at("updates");
    if (doc.contains("mode")) base.mode = doc.at("mode").get<std::string>();
    if (doc.contains("budget_blocks")) base.budget_blocks = doc.at("budget_blocks").get<double>();
    if (doc.contains("cost")) base.cost_overrides = doc.at("cost");
    if (doc.contains("monotone")) base.monotone = doc.at("monotone").get<bool>();
    if (doc.contains("incremental")) base.incremental = doc.at("incremental").get<bool>();
    if (doc.contains("fk_prune")) base.fk_prune = doc.at("fk_prune").get<bool>();
    if (doc.contains("format")) base.format = doc.at("format").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  return base;
}

Session make_session(const Catalog& catalog, std::vector<ViewDef> views, const UpdateSpec& spec, bool fk_prune) {
  Session s;
  s.catalog = catalog;
  s.spec = spec;
  s.views = std::move(views);
  s.memo = std::make_unique<Memo>(catalog);
  std::vector<int> raw;
  for (const auto& v : s.views) raw.push_back(s.memo->insert_expression(v.body));
  s.memo->expand();
  s.memo->annotate(spec);
  if (fk_prune) s.memo->prune_fk_empty();
  for (int r : raw) s.roots.push_back(s.memo->resolve(r));
  return s;
}

Catalog config_catalog(const RunConfig& config) {
  Catalog catalog;
  if (!config.catalog_path.empty()) {
    catalog = load_catalog(config.catalog_path);
  } else if (!config.workload.empty()) {
    catalog = find_workload(config.workload).catalog;
  } else {
    throw ValidationError("no catalog: pass --catalog or --workload");
  }
  apply_cost_overrides(catalog.mutable_params(), config.cost_overrides);
  return catalog;
}

Session load_session(const RunConfig& config) {
  config.validate();
  Catalog catalog = config_catalog(config);
  std::string text;
  if (!config.views_path.empty()) {
    text = read_file(config.views_path);
  } else if (!config.workload.empty()) {
    text = find_workload(config.workload).views;
  } else {
    throw ValidationError("no views: pass --views or --workload");
  }
  std::vector<ViewDef> views = parse_views(text, catalog);
  std::set<std::string> names;
  for (const auto& v : views) {
    if (!names.insert(v.name).second) throw ValidationError("duplicate view name '" + v.name + "'");
  }
  UpdateSpec spec = make_update_spec(catalog, config.update_pct);
  if (!config.update_overrides.is_null()) spec = apply_update_overrides(catalog, spec, config.update_overrides);
  return make_session(catalog, std::move(views), spec, config.fk_prune);
}

Report optimize(Session& session, Optimizer& opt, const RunConfig& config) {
  Report report;
  report.mode = config.mode;
  report.update_pct = config.update_pct;
  report.equiv_nodes = session.memo->equiv_count();
  report.op_nodes = session.memo->op_count();
  if (session.views.empty()) return report;

  MaterializationSet chosen;
  if (config.mode == "greedy") {
    GreedyOptions opts;
    opts.incremental = config.incremental;
    opts.monotone = config.monotone;
    opts.budget_blocks = config.budget_blocks;
    auto candidates = gen_candidates(*session.memo, session.roots);
    report.candidates = candidates.size();
    GreedyResult g = greedy_select(opt, session.roots, std::move(candidates), opts);
    report.counters = g.counters;
    report.nogreedy_cost = g.initial_cost.total;
    chosen = g.chosen;
  } else {
    opt.set_materialized(view_set(session.roots));
    report.nogreedy_cost = opt.total_cost().total;
    chosen = opt.materialized();
    classify(chosen, opt, session.roots);
  }
  report.total_cost = opt.total_cost().total;

  for (std::size_t k = 0; k < session.views.size(); ++k) {
    int root = session.roots[k];
    report.views.push_back(
        {session.views[k].name, opt.incremental(root) ? "incremental" : "recompute", opt.cost({root, 0}).total});
  }
  std::set<int> views(session.roots.begin(), session.roots.end());
  for (const auto& [r, tag] : chosen.entries()) {
    MaterializedReport m;
    m.signature = session.memo->node(r.node).signature;
    m.update_index = r.update_index;
    m.tag = to_string(tag);
    m.size_blocks = opt.result_props(r).blocks;
    m.view = r.update_index == 0 && views.count(r.node) > 0;
    report.materialized.push_back(m);
  }
  return report;
}

Report run(const RunConfig& config) {
  Session session = load_session(config);
  Optimizer opt(*session.memo);
  return optimize(session, opt, config);
}

json to_json(const Report& report) {
  json doc;
  doc["mode"] = report.mode;
  doc["update_pct"] = report.update_pct;
  doc["views"] = json::array();
  for (const auto& v : report.views) doc["views"].push_back({{"name", v.name}, {"strategy", v.strategy}, {"cost", v.cost}});
  doc["materialized"] = json::array();
  for (const auto& m : report.materialized) {
    doc["materialized"].push_back({{"signature", m.signature},
                                   {"update_index", m.update_index},
                                   {"tag", m.tag},
                                   {"size_blocks", m.size_blocks},
                                   {"view", m.view}});
  }
  doc["total_cost"] = report.total_cost;
  doc["nogreedy_cost"] = report.nogreedy_cost;
  const GreedyCounters& c = report.counters;
  doc["counters"] = {{"benefit_computations", c.benefit_computations},
                     {"node_visits", c.node_visits},
                     {"admissions", c.admissions},
                     {"rounds", c.rounds},
                     {"candidates", report.candidates},
                     {"equiv_nodes", report.equiv_nodes},
                     {"op_nodes", report.op_nodes}};
  return doc;
}

std::string to_text(const Report& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "mode " << report.mode << ", updates " << report.update_pct << "%\n";
  out << "views:\n";
  for (const auto& v : report.views) out << "  " << v.name << "  " << v.strategy << "  cost " << v.cost << "\n";
  out << "materialized:\n";
  for (const auto& m : report.materialized) {
    out << "  " << (m.update_index == 0 ? "full" : "delta " + std::to_string(m.update_index)) << "  " << m.tag << "  "
        << m.size_blocks << " blocks  " << m.signature << (m.view ? "  (view)" : "") << "\n";
  }
  out << "total cost " << report.total_cost << " (nogreedy " << report.nogreedy_cost << ")\n";
  out << "benefit computations " << report.counters.benefit_computations << ", node visits "
      << report.counters.node_visits << ", admissions " << report.counters.admissions << "\n";
  out << "memo " << report.equiv_nodes << " equivalence nodes, " << report.op_nodes << " operations\n";
  return out.str();
}

std::vector<ViewCheck> check_maintenance(const Session& session, const Optimizer& opt, const GeneratedData& data) {
  StagedDatabase staged = stage_database(session.catalog, data.base, data.deltas);
  PlanExecutor exec(opt, staged);
  std::map<int, MultisetTable> maintained = exec.propagate();
  std::vector<ViewCheck> out;
  for (std::size_t k = 0; k < session.views.size(); ++k) {
    MultisetTable expected = eval(*session.views[k].body, staged.stages.back(), session.catalog);
    auto it = maintained.find(session.roots[k]);
    ViewCheck c;
    c.name = session.views[k].name;
    c.pass = it != maintained.end() && it->second.canonical() == expected.canonical();
    c.rows = expected.size();
    out.push_back(c);
  }
  return out;
}

std::vector<double> default_sweep_points() { return {1, 2, 5, 10, 20, 30, 40, 50, 60, 70, 80}; }

std::vector<SweepPoint> sweep(const RunConfig& config, const std::vector<double>& points) {
  std::vector<SweepPoint> out;
  for (double pct : points) {
    RunConfig c = config;
    c.update_pct = pct;
    c.mode = "greedy";
    Report r = run(c);
    SweepPoint p;
    p.update_pct = pct;
    p.greedy_cost = r.total_cost;
    p.nogreedy_cost = r.nogreedy_cost;
    for (const auto& m : r.materialized) {
      if (m.view) continue;
      if (m.update_index > 0) {
        ++p.differentials;
      } else if (m.tag == "permanent") {
        ++p.permanent_full;
      } else {
        ++p.temporary_full;
      }
    }
    out.push_back(p);
  }
  return out;
}

json sweep_to_json(const std::vector<SweepPoint>& points) {
  json doc = json::array();
  for (const auto& p : points) {
    doc.push_back({{"update_pct", p.update_pct},
                   {"greedy_cost", p.greedy_cost},
                   {"nogreedy_cost", p.nogreedy_cost},
                   {"permanent_full", p.permanent_full},
                   {"temporary_full", p.temporary_full},
                   {"differentials", p.differentials}});
  }
  return doc;
}

std::string sweep_to_text(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "update_pct\tgreedy\tnogreedy\tperm_full\ttemp_full\tdeltas\n";
  for (const auto& p : points) {
    out << p.update_pct << "\t" << p.greedy_cost << "\t" << p.nogreedy_cost << "\t" << p.permanent_full << "\t"
        << p.temporary_full << "\t" << p.differentials << "\n";
  }
  return out.str();
}

}  // namespace mvopt
