#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lineup/lineup.hpp"

namespace lineup::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageOrIo = 1,
  kInfeasible = 2,
  kLineupsDiffer = 3,
};

enum class SolverKind { exact, exhaustive, anneal };
enum class OutputFormat { table, json };

struct RunConfig {
  std::string roster_path;
  std::string formation = "4-3-3";
  SolverKind solver = SolverKind::exact;
  std::string lambda = "90.5";
  ConflictMode conflicts = ConflictMode::auto_detect;
  AnnealParams anneal;
  OutputFormat format = OutputFormat::table;
  std::string lineup_out;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << data;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline FormationSpec load_formation(const std::string& name_or_path) {
  if (auto builtin = builtin_formation(name_or_path)) return *builtin;
  return parse_formation(read_file(name_or_path));
}

inline std::string signed_decimal(Decimal d) {
  return d > Decimal{} ? "+" + d.to_string() : d.to_string();
}

/// Everything the pipeline produces before the solver runs.
struct Problem {
  RatingTable table;
  FormationSpec spec;
  VariableIndex index;
  std::vector<Decimal> objective;
  std::vector<LinearConstraint> equalities;
  std::vector<LinearConstraint> inequalities;
  CompiledModel model;
};

inline Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.table = parse_roster(read_file(cfg.roster_path));
  p.spec = load_formation(cfg.formation);
  p.index = build_variable_index(p.table);
  p.objective = objective_coefficients(p.index, p.table);
  p.equalities = formation_constraints(p.spec, p.index);
  p.inequalities = conflict_constraints(p.index, cfg.conflicts);
  const PenaltyWeight lambda(Decimal::parse(cfg.lambda));
  p.model = assemble(p.objective, p.equalities, p.inequalities, lambda,
                     cfg.conflicts);
  return p;
}

inline const char* solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::exact: return "exact";
    case SolverKind::exhaustive: return "exhaustive";
    case SolverKind::anneal: return "anneal";
  }
  return "?";
}

inline void print_report_table(std::ostream& out, const FeasibilityReport& r) {
  const auto bad = r.violations();
  if (r.overall)
    out << "Feasibility: all " << r.checks.size() << " constraints satisfied\n";
  else
    out << "Feasibility: " << bad.size() << " of " << r.checks.size()
        << " constraints violated\n";
  for (const auto& c : r.checks)
    out << "  [" << (c.satisfied ? "ok" : "FAIL") << "] " << c.label << ": "
        << c.lhs << ' ' << to_string(c.comparator) << ' ' << c.rhs << '\n';
}

inline nlohmann::json report_json(const FeasibilityReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"label", c.label},
                      {"satisfied", c.satisfied},
                      {"comparator", std::string(to_string(c.comparator))},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs}});
  return {{"overall", r.overall}, {"constraints", checks}};
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  Problem p;
  try {
    p = build_problem(cfg);
  } catch (const InfeasibleError& e) {
    FeasibilityReport r;
    r.overall = false;
    r.checks.push_back({e.label(), Comparator::equal, false, 0, 0});
    if (cfg.format == OutputFormat::json) {
      out << nlohmann::json{{"feasible", false},
                            {"infeasible_constraint", e.label()},
                            {"message", e.what()}}
                 .dump(2)
          << '\n';
    } else {
      out << "Infeasible: " << e.what() << '\n';
      out << "Feasibility: constraint '" << e.label()
          << "' cannot be satisfied\n";
    }
    return kInfeasible;
  }

  const std::size_t n = p.index.size();
  Bits decision;
  Decimal bqm_energy;
  try {
    switch (cfg.solver) {
      case SolverKind::exact: {
        const auto best = exact_lineup(p.table, p.spec, p.inequalities);
        decision = best.to_bits(n);
        bqm_energy = energy(p.model.bqm,
                            fill_slack(decision, p.model.slack, p.inequalities));
        break;
      }
      case SolverKind::exhaustive: {
        const auto s = exhaustive_minimize(p.model.bqm);
        decision.assign(s.bits.begin(), s.bits.begin() + n);
        bqm_energy = s.energy;
        break;
      }
      case SolverKind::anneal: {
        const auto samples = simulated_anneal(p.model.bqm, cfg.anneal);
        decision.assign(samples.front().bits.begin(),
                        samples.front().bits.begin() + n);
        bqm_energy = samples.front().energy;
        break;
      }
    }
  } catch (const InfeasibleError& e) {
    out << "Infeasible: " << e.what() << '\n';
    out << "Feasibility: constraint '" << e.label() << "' cannot be satisfied\n";
    return kInfeasible;
  }

  const auto lineup = decode_lineup(decision, p.index, p.table);
  const auto report = check_feasibility(decision, p.equalities, p.inequalities);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.lineup_out.empty()) write_file(cfg.lineup_out, format_lineup(lineup));

  const auto lambda = Decimal::parse(cfg.lambda);
  if (cfg.format == OutputFormat::json) {
    nlohmann::json picks = nlohmann::json::array();
    for (const auto& pk : lineup.picks)
      picks.push_back({{"variable", pk.variable},
                       {"player", pk.player},
                       {"position", std::string(to_string(pk.position))},
                       {"rating", pk.rating.to_double()}});
    nlohmann::json j = {{"formation", p.spec.name},
                        {"solver", solver_name(cfg.solver)},
                        {"conflicts", std::string(to_string(cfg.conflicts))},
                        {"lambda", lambda.to_double()},
                        {"num_vars", p.model.bqm.num_vars()},
                        {"picks", picks},
                        {"total_rating", lineup.total_rating.to_double()},
                        {"energy", bqm_energy.to_double()},
                        {"feasibility", report_json(report)},
                        {"wall_clock_s", seconds}};
    out << j.dump(2) << '\n';
  } else {
    out << "Formation " << p.spec.name << " | solver " << solver_name(cfg.solver)
        << " | conflicts " << to_string(cfg.conflicts) << " | lambda " << lambda
        << " | " << p.model.bqm.num_vars() << " variables\n";
    out << std::left << std::setw(17) << "Binary variable" << std::setw(14)
        << "Player Name" << std::setw(10) << "Position" << "Rating\n";
    for (const auto& pk : lineup.picks) {
      // setw counts bytes; pad by code points so accented names line up.
      const auto name_width =
          std::count_if(pk.player.begin(), pk.player.end(),
                        [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
      out << std::setw(17) << ("x_" + std::to_string(pk.variable)) << pk.player
          << std::string(name_width < 14 ? 14 - name_width : 1, ' ')
          << std::setw(10) << to_string(pk.position) << pk.rating << '\n';
    }
    out << std::right;
    out << "Max H_Z " << lineup.total_rating << '\n';
    out << "Energy " << bqm_energy << '\n';
    print_report_table(out, report);
    out << "Wall-clock " << std::fixed << std::setprecision(3) << seconds
        << " s\n";
  }
  (void)err;
  return report.overall ? kOk : kInfeasible;
}

inline int cmd_export_bqm(const RunConfig& cfg, const std::string& out_path) {
  const auto p = build_problem(cfg);
  write_file(out_path, format_bqm(p.model.bqm));
  return kOk;
}

inline int cmd_compare(const std::string& found_path,
                       const std::string& reference_path, std::ostream& out) {
  const auto found = parse_lineup(read_file(found_path));
  const auto reference = parse_lineup(read_file(reference_path));
  const auto diff = compare(found, reference);
  auto line = [&](char sign, const Pick& pk) {
    out << "  " << sign << " x_" << pk.variable << ' ' << pk.player << ' '
        << to_string(pk.position) << ' ' << pk.rating << '\n';
  };
  out << "Only in found: " << diff.only_in_found.size() << '\n';
  for (const auto& pk : diff.only_in_found) line('+', pk);
  out << "Only in reference: " << diff.only_in_reference.size() << '\n';
  for (const auto& pk : diff.only_in_reference) line('-', pk);
  out << "Total found " << found.total_rating << " | reference "
      << reference.total_rating << " | delta " << signed_decimal(diff.delta)
      << '\n';
  return diff.identical() ? kOk : kLineupsDiffer;
}

/// Parses `args` (without the program name) and dispatches.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Starting line-up optimisation via penalty-encoded BQMs", "lineup"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string solver = "exact";
  std::string conflicts = "auto";
  std::string format = "table";
  std::string out_path;
  std::string found_path;
  std::string reference_path;

  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--roster", cfg.roster_path, "Roster CSV (player,position,rating)")
        ->required();
    sub->add_option("--formation", cfg.formation,
                    "Built-in name (4-3-3, 4-2-3-1) or formation JSON path")
        ->capture_default_str();
    sub->add_option("--lambda", cfg.lambda, "Penalty weight")->capture_default_str();
    sub->add_option("--conflicts", conflicts, "auto | paper")
        ->check(CLI::IsMember({"auto", "paper", "paper-exact"}))
        ->capture_default_str();
  };

  auto* solve = app.add_subcommand("solve", "Optimise a line-up");
  add_model_flags(solve);
  solve->add_option("--solver", solver, "exact | exhaustive | anneal")
      ->check(CLI::IsMember({"exact", "exhaustive", "anneal"}))
      ->capture_default_str();
  solve->add_option("--reads", cfg.anneal.num_reads)->capture_default_str();
  solve->add_option("--sweeps", cfg.anneal.sweeps_per_read)->capture_default_str();
  solve->add_option("--beta-hot", cfg.anneal.beta_hot)->capture_default_str();
  solve->add_option("--beta-cold", cfg.anneal.beta_cold)->capture_default_str();
  solve->add_option("--seed", cfg.anneal.seed)->capture_default_str();
  solve->add_option("--threads", cfg.anneal.threads, "Annealer threads (0 = all cores)")
      ->capture_default_str();
  bool no_polish = false;
  solve->add_flag("--no-polish", no_polish,
                  "Skip the swap local search after annealing");
  solve->add_option("--format", format, "table | json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  solve->add_option("--lineup-out", cfg.lineup_out,
                    "Also write the line-up as variable,player,position,rating CSV");

  auto* export_bqm = app.add_subcommand("export-bqm", "Write the compiled BQM");
  add_model_flags(export_bqm);
  export_bqm->add_option("--out", out_path, "Output path")->required();

  auto* cmp = app.add_subcommand("compare", "Diff two line-up CSV files");
  cmp->add_option("found", found_path)->required();
  cmp->add_option("reference", reference_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  }

  cfg.solver = solver == "exhaustive" ? SolverKind::exhaustive
               : solver == "anneal"   ? SolverKind::anneal
                                      : SolverKind::exact;
  cfg.conflicts = *parse_conflict_mode(conflicts);
  cfg.anneal.polish = !no_polish;
  cfg.format = format == "json" ? OutputFormat::json : OutputFormat::table;

  try {
    if (*solve) return cmd_solve(cfg, out, err);
    if (*export_bqm) return cmd_export_bqm(cfg, out_path);
    if (*cmp) return cmd_compare(found_path, reference_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  }
  return kUsageOrIo;
}

}  // namespace lineup::cli
