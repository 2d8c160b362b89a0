#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvopt/algebra.hpp"
#include "mvopt/catalog.hpp"
#include "mvopt/dag.hpp"
#include "mvopt/executor.hpp"
#include "mvopt/greedy.hpp"
#include "mvopt/optimizer.hpp"

namespace mvopt {

struct RunConfig {
  std::string workload;  // bundled workload; overridden by explicit paths
  std::string catalog_path;
  std::string views_path;
  std::string data_path;
  double update_pct = 10;
  nlohmann::json update_overrides;  // {"R": {"insert": f, "delete": f}}
  std::string mode = "greedy";      // greedy | nogreedy
  std::optional<double> budget_blocks;
  nlohmann::json cost_overrides;  // CostParams fields by name
  bool monotone = true;
  bool incremental = true;
  bool fk_prune = true;
  std::string format = "text";  // text | json

  void validate() const;
};

/// Reads a config file whose keys mirror RunConfig fields.
RunConfig config_from_json(const nlohmann::json& doc, RunConfig base = {});

/// A memo built for one catalog, view set and update specification.
struct Session {
  Catalog catalog;
  UpdateSpec spec;
  std::vector<ViewDef> views;
  std::unique_ptr<Memo> memo;
  std::vector<int> roots;  // resolved, one per view
};

Session make_session(const Catalog& catalog, std::vector<ViewDef> views, const UpdateSpec& spec,
                     bool fk_prune = true);
/// Loads catalog and views named by the config and applies its update and cost settings.
Session load_session(const RunConfig& config);
Catalog config_catalog(const RunConfig& config);

struct ViewReport {
  std::string name;
  std::string strategy;  // incremental | recompute
  double cost = 0;
};

struct MaterializedReport {
  std::string signature;
  int update_index = 0;
  std::string tag;
  double size_blocks = 0;
  bool view = false;
};

struct Report {
  std::string mode;
  double update_pct = 0;
  std::vector<ViewReport> views;
  std::vector<MaterializedReport> materialized;
  double total_cost = 0;
  double nogreedy_cost = 0;
  GreedyCounters counters;
  std::size_t candidates = 0;
  std::size_t equiv_nodes = 0;
  std::size_t op_nodes = 0;
};

/// Optimizes the session; `opt` is left holding the selected set.
Report optimize(Session& session, Optimizer& opt, const RunConfig& config);
Report run(const RunConfig& config);

nlohmann::json to_json(const Report& report);
std::string to_text(const Report& report);

struct SweepPoint {
  double update_pct = 0;
  double greedy_cost = 0;
  double nogreedy_cost = 0;
  std::size_t permanent_full = 0;  // extra full results kept across runs
  std::size_t temporary_full = 0;
  std::size_t differentials = 0;
};

struct ViewCheck {
  std::string name;
  bool pass = false;
  std::int64_t rows = 0;
};

/// Runs one maintenance cycle with the optimizer's current plans and compares
/// every view against recomputation on the updated database.
std::vector<ViewCheck> check_maintenance(const Session& session, const Optimizer& opt, const GeneratedData& data);

std::vector<double> default_sweep_points();
std::vector<SweepPoint> sweep(const RunConfig& config, const std::vector<double>& points);
nlohmann::json sweep_to_json(const std::vector<SweepPoint>& points);
std::string sweep_to_text(const std::vector<SweepPoint>& points);

}  // namespace mvopt
