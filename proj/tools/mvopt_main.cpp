#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvopt/driver.hpp"
#include "mvopt/error.hpp"
#include "mvopt/executor.hpp"
#include "mvopt/workloads.hpp"

using namespace mvopt;
using nlohmann::json;

namespace {

json read_json_arg(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg.front() != '{' && arg.front() != '[') {
    std::ifstream in(arg);
    if (!in) throw ParseError("cannot open " + arg);
    std::ostringstream out;
    out << in.rdbuf();
    text = out.str();
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

struct Flags {
  std::string config_path;
  std::string updates;
  std::optional<double> w_seek, w_read, w_write, w_cpu, buffer_blocks, block_bytes, budget;
  bool no_monotone = false;
  bool no_incremental = false;
  bool no_fk_prune = false;
};

void add_common(CLI::App* cmd, RunConfig& cfg, Flags& f) {
  cmd->add_option("--workload", cfg.workload, "bundled workload name");
  cmd->add_option("--catalog", cfg.catalog_path, "catalog JSON file");
  cmd->add_option("--views", cfg.views_path, "view definition file");
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--update-pct", cfg.update_pct, "update percentage")->check(CLI::Range(0.0, 100.0));
  cmd->add_option("--updates", f.updates, "per-relation update fractions (JSON text or file)");
  cmd->add_option("--mode", cfg.mode, "greedy or nogreedy")->check(CLI::IsMember({"greedy", "nogreedy"}));
  cmd->add_option("--budget-blocks", f.budget, "space budget for extra results");
  cmd->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--w-seek", f.w_seek, "seek weight");
  cmd->add_option("--w-read", f.w_read, "block read weight");
  cmd->add_option("--w-write", f.w_write, "block write weight");
  cmd->add_option("--w-cpu", f.w_cpu, "per-tuple CPU weight");
  cmd->add_option("--buffer-blocks", f.buffer_blocks, "buffer size in blocks");
  cmd->add_option("--block-bytes", f.block_bytes, "block size in bytes");
  cmd->add_flag("--no-monotone", f.no_monotone, "recompute every benefit each round");
  cmd->add_flag("--no-incremental", f.no_incremental, "recompute all costs after each change");
  cmd->add_flag("--no-fk-prune", f.no_fk_prune, "keep differential terms that foreign keys make empty");
}

RunConfig finish(RunConfig cfg, const Flags& f, CLI::App* cmd) {
  if (!f.config_path.empty()) {
    RunConfig from_file = config_from_json(read_json_arg(f.config_path), RunConfig{});
    // command-line values win over the file
    if (cmd->count("--workload") == 0 && !from_file.workload.empty()) cfg.workload = from_file.workload;
    if (cmd->count("--catalog") == 0 && !from_file.catalog_path.empty()) cfg.catalog_path = from_file.catalog_path;
    if (cmd->count("--views") == 0 && !from_file.views_path.empty()) cfg.views_path = from_file.views_path;
    if (cmd->count("--update-pct") == 0) cfg.update_pct = from_file.update_pct;
    if (cmd->count("--mode") == 0) cfg.mode = from_file.mode;
    if (cmd->count("--format") == 0) cfg.format = from_file.format;
    if (cmd->count("--budget-blocks") == 0) cfg.budget_blocks = from_file.budget_blocks;
    cfg.update_overrides = from_file.update_overrides;
    cfg.cost_overrides = from_file.cost_overrides;
    cfg.monotone = from_file.monotone;
    cfg.incremental = from_file.incremental;
    cfg.fk_prune = from_file.fk_prune;
    if (!from_file.data_path.empty()) cfg.data_path = from_file.data_path;
  }
  if (!f.updates.empty()) cfg.update_overrides = read_json_arg(f.updates);
  if (cfg.cost_overrides.is_null()) cfg.cost_overrides = json::object();
  if (f.w_seek) cfg.cost_overrides["w_seek"] = *f.w_seek;
  if (f.w_read) cfg.cost_overrides["w_read"] = *f.w_read;
  if (f.w_write) cfg.cost_overrides["w_write"] = *f.w_write;
  if (f.w_cpu) cfg.cost_overrides["w_cpu"] = *f.w_cpu;
  if (f.buffer_blocks) cfg.cost_overrides["buffer_blocks"] = *f.buffer_blocks;
  if (f.block_bytes) cfg.cost_overrides["block_bytes"] = *f.block_bytes;
  if (f.budget) cfg.budget_blocks = f.budget;
  if (f.no_monotone) cfg.monotone = false;
  if (f.no_incremental) cfg.incremental = false;
  if (f.no_fk_prune) cfg.fk_prune = false;
  if (cfg.workload.empty() && cfg.catalog_path.empty()) cfg.workload = "join5";
  cfg.validate();
  return cfg;
}

int find_view(const Session& s, const std::string& name) {
  for (std::size_t k = 0; k < s.views.size(); ++k) {
    if (s.views[k].name == name) return s.roots[k];
  }
  throw ValidationError("unknown view '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Materialized view maintenance plan optimizer"};
  app.require_subcommand(1);

  RunConfig opt_cfg, explain_cfg, sim_cfg, sweep_cfg;
  Flags opt_flags, explain_flags, sim_flags, sweep_flags;

  auto* optimize_cmd = app.add_subcommand("optimize", "choose maintenance plans and extra materializations");
  add_common(optimize_cmd, opt_cfg, opt_flags);

  auto* explain_cmd = app.add_subcommand("explain", "print the memo or a chosen plan");
  add_common(explain_cmd, explain_cfg, explain_flags);
  bool show_dag = false;
  std::string plan_view;
  int plan_update = 0;
  explain_cmd->add_flag("--dag", show_dag, "print the expanded memo");
  explain_cmd->add_option("--plan", plan_view, "view whose plan to print");
  explain_cmd->add_option("--update", plan_update, "update index of the differential plan (0 = full)");

  auto* simulate_cmd = app.add_subcommand("simulate", "run one maintenance cycle on generated data and check it");
  add_common(simulate_cmd, sim_cfg, sim_flags);
  std::uint64_t seed = 1;
  std::int64_t rows = 50;
  std::string write_data;
  simulate_cmd->add_option("--seed", seed, "random seed");
  simulate_cmd->add_option("--rows", rows, "maximum rows per relation")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--data", sim_cfg.data_path, "JSON data file to use instead of generated data");
  simulate_cmd->add_option("--write-data", write_data, "write the generated data to this file");

  auto* sweep_cmd = app.add_subcommand("sweep", "greedy and nogreedy cost across update percentages");
  add_common(sweep_cmd, sweep_cfg, sweep_flags);
  std::vector<double> points;
  sweep_cmd->add_option("--points", points, "update percentages")->delimiter(',');

  auto* list_cmd = app.add_subcommand("workloads", "list bundled workloads");
  std::string export_name, export_dir;
  list_cmd->add_option("--export", export_name, "write this workload's catalog.json and views.txt");
  list_cmd->add_option("--out", export_dir, "directory for --export")->default_val(".");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd && !export_name.empty()) {
      const Workload& w = find_workload(export_name);
      std::ofstream(export_dir + "/catalog.json") << to_json(w.catalog).dump(2) << "\n";
      std::ofstream(export_dir + "/views.txt") << w.views;
      return 0;
    }
    if (*list_cmd) {
      for (const auto& name : workload_names()) std::cout << name << "  " << find_workload(name).description << "\n";
      return 0;
    }
    if (*optimize_cmd) {
      RunConfig cfg = finish(opt_cfg, opt_flags, optimize_cmd);
      Report r = run(cfg);
      if (cfg.format == "json") {
        std::cout << to_json(r).dump(2) << "\n";
      } else {
        std::cout << to_text(r);
      }
      return 0;
    }
    if (*explain_cmd) {
      RunConfig cfg = finish(explain_cfg, explain_flags, explain_cmd);
      Session s = load_session(cfg);
      if (show_dag || plan_view.empty()) {
        std::cout << s.memo->to_text();
        if (plan_view.empty()) return 0;
      }
      Optimizer opt(*s.memo);
      optimize(s, opt, cfg);
      int root = find_view(s, plan_view);
      if (plan_update < 0 || plan_update > s.memo->update_count())
        throw ValidationError("update index out of range");
      PlanNode plan = plan_update == 0 ? opt.full_plan(root, s.memo->final_stage()) : opt.diff_plan(root, plan_update);
      std::cout << plan_view << (opt.incremental(root) ? " (incremental)" : " (recompute)") << "\n";
      std::cout << plan_to_text(plan, *s.memo);
      return 0;
    }
    if (*simulate_cmd) {
      RunConfig cfg = finish(sim_cfg, sim_flags, simulate_cmd);
      Catalog scaled = scale_catalog(config_catalog(cfg), rows);
      UpdateSpec spec = make_update_spec(scaled, cfg.update_pct);
      if (!cfg.update_overrides.is_null()) spec = apply_update_overrides(scaled, spec, cfg.update_overrides);
      Session s = make_session(scaled, load_session(cfg).views, spec, cfg.fk_prune);
      Optimizer opt(*s.memo);
      optimize(s, opt, cfg);
      GeneratedData data = cfg.data_path.empty() ? generate_database(scaled, s.spec, seed)
                                                 : database_from_json(scaled, read_json_arg(cfg.data_path));
      if (!write_data.empty()) {
        std::ofstream out(write_data);
        out << database_to_json(scaled, data).dump(1) << "\n";
      }
      bool all = true;
      for (const auto& c : check_maintenance(s, opt, data)) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.rows << " rows)\n";
        all = all && c.pass;
      }
      return all ? 0 : 1;
    }
    if (*sweep_cmd) {
      RunConfig cfg = finish(sweep_cfg, sweep_flags, sweep_cmd);
      if (points.empty()) points = default_sweep_points();
      auto result = sweep(cfg, points);
      if (cfg.format == "json") {
        std::cout << sweep_to_json(result).dump(2) << "\n";
      } else {
        std::cout << sweep_to_text(result);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
