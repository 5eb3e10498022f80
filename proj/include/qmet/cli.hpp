// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmet/io.hpp"
#include "qmet/scenarios.hpp"

namespace qmet::cli {

// Exit codes: 0 success, 1 domain failure (invalid inputs, infeasible,
// residuals above tolerance), 2 usage error, 3 certified bound violated.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBoundViolation = 3;

namespace detail {

using io::json;

// "0.1:0.9:0.1" (inclusive, half-step slop on the endpoint) or "0.1,0.25,0.7".
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, s = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &s) != 3 || s <= 0.0)
      throw OutOfRange("grid must be start:stop:step with step > 0");
    for (double v = a; v <= b + s / 2; v += s) out.push_back(v);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      out.push_back(std::stod(item));
    }
  }
  if (out.empty()) throw OutOfRange("empty eps grid");
  return out;
}

struct OutputOptions {
  std::string out_path;       // report JSON file; empty: stdout (json format only)
  std::string format = "json";  // stdout payload: "json" (the report) or "csv"
};

inline void add_output_flags(CLI::App* cmd, OutputOptions& oo, bool tabular) {
  cmd->add_option("--out", oo.out_path, "write the experiment report JSON to this file");
  if (tabular)
    cmd->add_option("--format", oo.format, "stdout payload: json (default) or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

inline void emit(const OutputOptions& oo, const io::ExperimentReport& rep,
                 const std::string* csv) {
  const std::string text = io::report_to_json(rep).dump(2);
  if (!oo.out_path.empty()) io::write_file(oo.out_path, text);
  if (oo.format == "csv" && csv != nullptr) {
    std::cout << *csv;
    if (oo.out_path.empty())
      std::cerr << "note: report JSON not persisted (csv on stdout; pass --out FILE)\n";
  } else if (oo.out_path.empty()) {
    std::cout << text << '\n';
  }
}

// Flags shared by every command that needs a constraint.
struct ConstraintFlags {
  std::string file;
  std::string kind;
  std::vector<int> indices{1, 2};
  std::vector<double> eps;
  std::string rho_file, chi_file;
  int n = 0;  // 0: take it from the file or from --n
};

inline void add_constraint_flags(CLI::App* cmd, ConstraintFlags& cf) {
  cmd->add_option("--constraint-file", cf.file, "constraint JSON file");
  cmd->add_option("--kind", cf.kind,
                  "constraint kind: diag-ideal|diag-nonideal|nondiag-ideal|"
                  "nondiag-nonideal|realpart-ideal|two-state-diag")
      ->check(CLI::IsMember({"diag-ideal", "diag-nonideal", "nondiag-ideal", "nondiag-nonideal",
                             "realpart-ideal", "two-state-diag"}));
  cmd->add_option("--indices", cf.indices, "element indices (1-based)")->delimiter(',');
  cmd->add_option("--eps", cf.eps, "damping parameter(s) in (0,1)")->delimiter(',');
  cmd->add_option("--rho-file", cf.rho_file, "first state JSON (two-state kind)");
  cmd->add_option("--chi-file", cf.chi_file, "second state JSON (two-state kind)");
}

inline TransferConstraint build_constraint(const ConstraintFlags& cf,
                                           std::map<std::string, std::string>& digests) {
  if (!cf.file.empty()) {
    const std::string text = io::read_file(cf.file);
    digests[cf.file] = io::fnv1a_digest(text);
    const TransferConstraint tc = io::constraint_from_json(io::parse_json_text(text, cf.file));
    if (cf.n != 0 && cf.n != tc.n)
      throw DimensionMismatch("--n disagrees with the constraint file");
    return tc;
  }
  if (cf.kind.empty()) throw OutOfRange("need --constraint-file or --kind");
  const int n = cf.n != 0 ? cf.n : (cf.kind == "two-state-diag" ? 2 : 3);
  const auto need = [&](std::size_t k, const char* what) {
    if (cf.indices.size() < k) throw OutOfRange(std::string("--indices needs ") + what);
  };
  if (cf.kind == "diag-ideal") {
    need(1, "one index");
    return make_constraint(n, DiagonalIdeal{cf.indices[0]});
  }
  if (cf.kind == "diag-nonideal") {
    if (cf.eps.size() != cf.indices.size() || cf.eps.empty())
      throw OutOfRange("--eps must list one value per index in --indices");
    DiagonalNonIdeal k;
    for (std::size_t i = 0; i < cf.eps.size(); ++i) k.pairs.emplace_back(cf.indices[i], cf.eps[i]);
    return make_constraint(n, std::move(k));
  }
  if (cf.kind == "nondiag-ideal") {
    need(2, "two indices");
    return make_constraint(n, NondiagonalIdeal{cf.indices[0], cf.indices[1]});
  }
  if (cf.kind == "nondiag-nonideal") {
    need(2, "two indices");
    if (cf.eps.size() != 1) throw OutOfRange("--eps must have exactly one value");
    return make_constraint(n, NondiagonalNonIdeal{cf.indices[0], cf.indices[1], cf.eps[0]});
  }
  if (cf.kind == "realpart-ideal") {
    need(2, "two indices");
    return make_constraint(n, RealPartIdeal{cf.indices[0], cf.indices[1]});
  }
  // two-state-diag
  DensityMatrix rho, chi;
  if (!cf.rho_file.empty() || !cf.chi_file.empty()) {
    if (cf.rho_file.empty() || cf.chi_file.empty())
      throw OutOfRange("two-state kind needs both --rho-file and --chi-file");
    const std::string rt = io::read_file(cf.rho_file), ct = io::read_file(cf.chi_file);
    digests[cf.rho_file] = io::fnv1a_digest(rt);
    digests[cf.chi_file] = io::fnv1a_digest(ct);
    rho = validate_density(io::matrix_from_json(io::parse_json_text(rt, cf.rho_file)));
    chi = validate_density(io::matrix_from_json(io::parse_json_text(ct, cf.chi_file)));
  } else {
    const TwoStateSetup s = default_two_state_setup();
    rho = s.rho;
    chi = s.chi;
  }
  return make_constraint(n, TwoStateDiagonal{rho, chi, cf.indices.empty() ? 1 : cf.indices[0]});
}

inline json isometry_to_json(const IsometryReport& rep) {
  return json{{"max_offdiag", rep.max_offdiag},
              {"max_diag_dev", rep.max_diag_dev},
              {"residual", rep.residual()},
              {"ok", rep.ok()}};
}

inline json zero_report_to_json(const StructuralZeroReport& rep) {
  json blocks = json::array();
  for (const auto& b : rep.blocks)
    blocks.push_back(json{
        {"family", b.family}, {"u", b.u}, {"other", b.other}, {"k", b.k}, {"norm", b.norm}});
  return json{{"max_norm", rep.max_norm()}, {"blocks", std::move(blocks)}};
}

inline json trace_to_json(const std::vector<RestartTrace>& trace) {
  json rows = json::array();
  for (const auto& t : trace)
    rows.push_back(json{{"restart", t.index},
                        {"warm_start", t.warm_start},
                        {"achieved", t.achieved},
                        {"constraint_residual", t.constraint_residual},
                        {"isometry_residual", t.isometry_residual},
                        {"admissible", t.admissible}});
  return rows;
}

inline json opt_result_to_json(const OptResult& res, bool with_trace = true) {
  json out{{"achieved", res.achieved},
           {"constraint_residual", res.constraint_residual},
           {"isometry_residual", res.isometry_residual},
           {"best_restart", res.best_restart}};
  if (res.bound) {
    out["bound"] = *res.bound;
    out["slack"] = *res.bound - res.achieved;
  }
  if (with_trace) out["trace"] = trace_to_json(res.trace);
  return out;
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args) {
  using detail::json;
  CLI::App app{"transfer channels for density-matrix elements: construction, "
               "verification, bounds and optimization"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // --- check -------------------------------------------------------------------
  auto* cmd_check = app.add_subcommand("check", "validate a channel file (and optionally a constraint)");
  std::string check_channel_path;
  double check_tol = kIsometryTol;
  detail::ConstraintFlags check_cf;
  detail::OutputOptions check_out;
  cmd_check->add_option("channel", check_channel_path, "channel JSON file")->required();
  cmd_check->add_option("--tol", check_tol, "isometry acceptance tolerance");
  cmd_check->add_option("--n", check_cf.n, "expected source dimension");
  detail::add_constraint_flags(cmd_check, check_cf);
  detail::add_output_flags(cmd_check, check_out, false);

  // --- memory ------------------------------------------------------------------
  auto* cmd_memory = app.add_subcommand("memory", "memory table of a channel");
  std::string memory_channel_path;
  detail::OutputOptions memory_out;
  cmd_memory->add_option("channel", memory_channel_path, "channel JSON file")->required();
  detail::add_output_flags(cmd_memory, memory_out, true);

  // --- bounds ------------------------------------------------------------------
  auto* cmd_bounds = app.add_subcommand(
      "bounds", "trade-off table over an eps grid, with saturating channels");
  std::string bounds_kind = "diag";
  std::string bounds_grid = "0.1:0.9:0.1";
  int bounds_n = 0;
  detail::OutputOptions bounds_out;
  cmd_bounds->add_option("--kind", bounds_kind, "diag (n>=3) or nondiag (n>=2)")
      ->check(CLI::IsMember({"diag", "nondiag"}));
  cmd_bounds->add_option("--grid", bounds_grid, "eps grid: start:stop:step or comma list");
  cmd_bounds->add_option("--n", bounds_n, "source dimension (default 3 diag / 2 nondiag)");
  detail::add_output_flags(cmd_bounds, bounds_out, true);

  // --- sample ------------------------------------------------------------------
  auto* cmd_sample = app.add_subcommand("sample", "random channel satisfying a constraint");
  detail::ConstraintFlags sample_cf;
  detail::OutputOptions sample_out;
  int sample_dc = 1, sample_restarts = 16;
  std::uint64_t sample_seed = 0;
  double sample_tol = kIsometryTol;
  std::string sample_channel_out;
  cmd_sample->add_option("--n", sample_cf.n, "source dimension");
  cmd_sample->add_option("--dc", sample_dc, "ancilla dimension");
  cmd_sample->add_option("--seed", sample_seed, "rng seed (default 0)");
  cmd_sample->add_option("--tol", sample_tol, "admission tolerance");
  cmd_sample->add_option("--restarts", sample_restarts, "solver restarts");
  cmd_sample->add_option("--channel-out", sample_channel_out, "write the channel JSON here");
  detail::add_constraint_flags(cmd_sample, sample_cf);
  detail::add_output_flags(cmd_sample, sample_out, false);

  // --- optimize ----------------------------------------------------------------
  auto* cmd_opt = app.add_subcommand("optimize", "maximize a memory entry under a constraint");
  detail::ConstraintFlags opt_cf;
  detail::OutputOptions opt_out;
  std::vector<int> opt_pair{1, 2};
  int opt_dc = 1;
  OptimizerConfig opt_cfg;
  std::string opt_channel_out;
  cmd_opt->add_option("--n", opt_cf.n, "source dimension");
  cmd_opt->add_option("--dc", opt_dc, "ancilla dimension");
  cmd_opt->add_option("--pair", opt_pair, "memory pair a,c (1-based)")->delimiter(',');
  cmd_opt->add_option("--seed", opt_cfg.seed, "rng seed (default 0)");
  cmd_opt->add_option("--restarts", opt_cfg.restarts, "restart count");
  cmd_opt->add_option("--max-iters", opt_cfg.max_iters, "inner iterations per penalty stage");
  cmd_opt->add_option("--stages", opt_cfg.penalty_stages, "penalty stages");
  cmd_opt->add_option("--channel-out", opt_channel_out, "write the best channel JSON here");
  detail::add_constraint_flags(cmd_opt, opt_cf);
  detail::add_output_flags(cmd_opt, opt_out, false);

  // --- sweep -------------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "optimize over an eps grid");
  std::string sweep_kind = "diag";
  std::string sweep_grid = "0.1:0.9:0.1";
  std::vector<int> sweep_pair{1, 2};
  int sweep_n = 0, sweep_dc = 1;
  OptimizerConfig sweep_cfg;
  detail::OutputOptions sweep_out;
  cmd_sweep->add_option("--kind", sweep_kind, "diag (n>=3) or nondiag (n>=2)")
      ->check(CLI::IsMember({"diag", "nondiag"}));
  cmd_sweep->add_option("--grid", sweep_grid, "eps grid: start:stop:step or comma list");
  cmd_sweep->add_option("--pair", sweep_pair, "constraint and memory pair a,b")->delimiter(',');
  cmd_sweep->add_option("--n", sweep_n, "source dimension (default 3 diag / 2 nondiag)");
  cmd_sweep->add_option("--dc", sweep_dc, "ancilla dimension");
  cmd_sweep->add_option("--seed", sweep_cfg.seed, "rng seed (default 0)");
  cmd_sweep->add_option("--restarts", sweep_cfg.restarts, "restart count");
  cmd_sweep->add_option("--max-iters", sweep_cfg.max_iters, "inner iterations per penalty stage");
  detail::add_output_flags(cmd_sweep, sweep_out, true);

  // --- scenario ----------------------------------------------------------------
  auto* cmd_scenario = app.add_subcommand("scenario", "end-to-end studies");
  cmd_scenario->require_subcommand(1);
  auto* cmd_two_state = cmd_scenario->add_subcommand(
      "two-state", "diagonal transfer of two tied states: elimination check and "
                   "non-diagonal counterexample search");
  std::string ts_rho_file, ts_chi_file, ts_channel_out;
  std::vector<int> ts_dc_list{1, 2};
  int ts_count = 30;
  std::uint64_t ts_seed = 0;
  bool ts_no_search = false;
  OptimizerConfig ts_cfg;
  detail::OutputOptions ts_out;
  cmd_two_state->add_option("--rho-file", ts_rho_file, "first state JSON");
  cmd_two_state->add_option("--chi-file", ts_chi_file, "second state JSON");
  cmd_two_state->add_option("--dc-list", ts_dc_list, "ancilla dimensions to test")->delimiter(',');
  cmd_two_state->add_option("--count", ts_count, "sampled channels per ancilla dimension");
  cmd_two_state->add_option("--seed", ts_seed, "rng seed (default 0)");
  cmd_two_state->add_flag("--no-search", ts_no_search, "skip the counterexample search");
  cmd_two_state->add_option("--restarts", ts_cfg.restarts, "search restart count");
  cmd_two_state->add_option("--channel-out", ts_channel_out, "write the counterexample channel here");
  detail::add_output_flags(cmd_two_state, ts_out, false);

  // --- parse -------------------------------------------------------------------
  std::vector<std::string> argv_storage;
  argv_storage.push_back("qmet");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](io::ExperimentReport& rep) {
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  try {
    if (app.got_subcommand(cmd_check)) {
      io::ExperimentReport rep;
      rep.command = "check";
      const io::LoadedChannel lc = io::load_channel(check_channel_path);
      rep.input_digests[check_channel_path] = lc.digest;
      rep.config = json{{"channel", check_channel_path}, {"tol", check_tol}};
      rep.results["n"] = lc.channel.n;
      rep.results["dc"] = lc.channel.dc;
      rep.results["isometry"] = detail::isometry_to_json(lc.isometry);
      bool ok = lc.isometry.ok(check_tol);
      if (check_cf.n > 0 && check_cf.n != lc.channel.n) {
        rep.results["expected_n"] = check_cf.n;
        ok = false;
      }
      if (!check_cf.file.empty() || !check_cf.kind.empty()) {
        const TransferConstraint tc = detail::build_constraint(check_cf, rep.input_digests);
        rep.config["constraint"] = io::constraint_to_json(tc);
        const double con = check_constraint(lc.channel, tc);
        rep.results["constraint_residual"] = con;
        rep.results["structural_zeros"] =
            detail::zero_report_to_json(structural_zero_report(lc.channel, tc));
        const bool admissible = ok && con <= check_tol;
        rep.results["admissible"] = admissible;
        if (admissible) {
          assert_no_bound_violation(lc.channel, tc);  // exit 3 on violation
          rep.results["bounds"] = io::bound_reports_to_json(bound_reports(lc.channel, tc));
        }
        ok = admissible;
      }
      finish(rep);
      detail::emit(check_out, rep, nullptr);
      return ok ? kExitOk : kExitDomain;
    }

    if (app.got_subcommand(cmd_memory)) {
      io::ExperimentReport rep;
      rep.command = "memory";
      const io::LoadedChannel lc = io::load_channel(memory_channel_path);
      rep.input_digests[memory_channel_path] = lc.digest;
      rep.config = json{{"channel", memory_channel_path}};
      const MemoryTable mt = memory_table(io::require_valid(lc));
      rep.results["memory_table"] = io::memory_table_to_json(mt);
      rep.results["max_offdiag"] = mt.max_offdiag();
      finish(rep);
      const std::string csv = io::memory_table_to_csv(mt);
      detail::emit(memory_out, rep, &csv);
      return kExitOk;
    }

    if (app.got_subcommand(cmd_bounds)) {
      io::ExperimentReport rep;
      rep.command = "bounds";
      const bool diag = bounds_kind == "diag";
      const int n = bounds_n != 0 ? bounds_n : (diag ? 3 : 2);
      const std::vector<double> grid = detail::parse_grid(bounds_grid);
      rep.config = json{{"kind", bounds_kind}, {"n", n}, {"grid", grid}};
      json rows = json::array();
      std::ostringstream csv;
      csv << "eps,a,c,theoretical,achieved,slack\n";
      for (const double eps : grid) {
        const TransferConstraint tc =
            diag ? make_constraint(n, DiagonalNonIdeal{{{1, eps}, {2, eps}}})
                 : make_constraint(n, NondiagonalNonIdeal{1, 2, eps});
        const ChannelSpec ch =
            diag ? build_saturating_diagonal(n, eps, eps) : build_saturating_nondiagonal(n, eps);
        assert_no_bound_violation(ch, tc);
        for (const BoundReport& row : bound_reports(ch, tc)) {
          rows.push_back(json{{"eps", eps},
                              {"a", row.a},
                              {"c", row.c},
                              {"theoretical", row.theoretical},
                              {"achieved", row.achieved},
                              {"slack", row.slack}});
          csv << io::fmt_double(eps) << ',' << row.a << ',' << row.c << ','
              << io::fmt_double(row.theoretical) << ',' << io::fmt_double(row.achieved) << ','
              << io::fmt_double(row.slack) << '\n';
        }
      }
      rep.results["rows"] = std::move(rows);
      finish(rep);
      const std::string csv_text = csv.str();
      detail::emit(bounds_out, rep, &csv_text);
      return kExitOk;
    }

    if (app.got_subcommand(cmd_sample)) {
      io::ExperimentReport rep;
      rep.command = "sample";
      const TransferConstraint tc = detail::build_constraint(sample_cf, rep.input_digests);
      rep.config = json{{"constraint", io::constraint_to_json(tc)},
                        {"dc", sample_dc},
                        {"seed", sample_seed},
                        {"tol", sample_tol},
                        {"restarts", sample_restarts}};
      const ChannelSpec ch =
          sample_satisfying_channel(tc, tc.n, sample_dc, sample_seed, sample_tol, sample_restarts);
      assert_no_bound_violation(ch, tc);
      rep.results["isometry"] = detail::isometry_to_json(check_isometry(ch));
      rep.results["constraint_residual"] = check_constraint(ch, tc);
      rep.results["structural_zeros"] =
          detail::zero_report_to_json(structural_zero_report(ch, tc));
      rep.results["memory_table"] = io::memory_table_to_json(memory_table(ch));
      rep.results["bounds"] = io::bound_reports_to_json(bound_reports(ch, tc));
      if (!sample_channel_out.empty()) {
        io::write_file(sample_channel_out, io::channel_to_json(ch).dump(2));
        rep.results["channel_file"] = sample_channel_out;
      }
      finish(rep);
      detail::emit(sample_out, rep, nullptr);
      return kExitOk;
    }

    if (app.got_subcommand(cmd_opt)) {
      io::ExperimentReport rep;
      rep.command = "optimize";
      if (opt_pair.size() != 2) throw OutOfRange("--pair needs exactly two indices");
      const TransferConstraint tc = detail::build_constraint(opt_cf, rep.input_digests);
      rep.config = json{{"constraint", io::constraint_to_json(tc)},
                        {"dc", opt_dc},
                        {"pair", opt_pair},
                        {"seed", opt_cfg.seed},
                        {"restarts", opt_cfg.restarts},
                        {"max_iters", opt_cfg.max_iters},
                        {"penalty_initial", opt_cfg.penalty_initial},
                        {"penalty_factor", opt_cfg.penalty_factor},
                        {"penalty_stages", opt_cfg.penalty_stages}};
      const OptResult res = maximize_memory(tc, opt_pair[0], opt_pair[1], opt_dc, opt_cfg);
      rep.results = detail::opt_result_to_json(res);
      rep.results["memory_table"] = io::memory_table_to_json(memory_table(res.channel));
      if (!opt_channel_out.empty()) {
        io::write_file(opt_channel_out, io::channel_to_json(res.channel).dump(2));
        rep.results["channel_file"] = opt_channel_out;
      }
      finish(rep);
      detail::emit(opt_out, rep, nullptr);
      return kExitOk;
    }

    if (app.got_subcommand(cmd_sweep)) {
      io::ExperimentReport rep;
      rep.command = "sweep";
      if (sweep_pair.size() != 2) throw OutOfRange("--pair needs exactly two indices");
      SweepPlan plan;
      plan.kind = sweep_kind == "diag" ? SweepKind::DiagonalPair : SweepKind::NondiagonalPair;
      plan.n = sweep_n != 0 ? sweep_n : (plan.kind == SweepKind::DiagonalPair ? 3 : 2);
      plan.dc = sweep_dc;
      plan.a = sweep_pair[0];
      plan.b = sweep_pair[1];
      plan.grid = detail::parse_grid(sweep_grid);
      rep.config = json{{"kind", sweep_kind},    {"n", plan.n},
                        {"dc", plan.dc},         {"pair", sweep_pair},
                        {"grid", plan.grid},     {"seed", sweep_cfg.seed},
                        {"restarts", sweep_cfg.restarts}, {"max_iters", sweep_cfg.max_iters}};
      const SweepResult sr = sweep(plan, sweep_cfg);
      rep.results = io::sweep_to_json(sr);
      finish(rep);
      const std::string csv = io::sweep_to_csv(sr);
      detail::emit(sweep_out, rep, &csv);
      return kExitOk;
    }

    if (app.got_subcommand(cmd_scenario)) {
      io::ExperimentReport rep;
      rep.command = "scenario two-state";
      TwoStateSetup setup = [&]() {
        if (ts_rho_file.empty() && ts_chi_file.empty()) return default_two_state_setup();
        if (ts_rho_file.empty() || ts_chi_file.empty())
          throw OutOfRange("need both --rho-file and --chi-file (or neither)");
        const std::string rt = io::read_file(ts_rho_file), ct = io::read_file(ts_chi_file);
        rep.input_digests[ts_rho_file] = io::fnv1a_digest(rt);
        rep.input_digests[ts_chi_file] = io::fnv1a_digest(ct);
        return make_two_state_setup(io::matrix_from_json(io::parse_json_text(rt, ts_rho_file)),
                                    io::matrix_from_json(io::parse_json_text(ct, ts_chi_file)));
      }();
      rep.config = json{{"dc_list", ts_dc_list},
                        {"count", ts_count},
                        {"seed", ts_seed},
                        {"search", !ts_no_search},
                        {"restarts", ts_cfg.restarts}};
      rep.results["setup"] = json{{"rho", io::matrix_to_json(setup.rho.mat)},
                                  {"chi", io::matrix_to_json(setup.chi.mat)},
                                  {"cross_residual", setup.cross_residual},
                                  {"commutator_norm", setup.commutator_norm}};
      bool ok = true;
      json per_dc = json::array();
      for (const int dc : ts_dc_list) {
        const auto channels = sample_two_state_diagonal_channels(setup, dc, ts_count, ts_seed);
        const TwoStateDiagonalReport trep = verify_two_state_diagonal_theorem(setup, channels);
        per_dc.push_back(json{{"dc", dc},
                              {"channels", static_cast<int>(trep.rows.size())},
                              {"max_offdiag_memory", trep.max_offdiag_memory},
                              {"max_zero_block", trep.max_zero_block},
                              {"theorem_holds", trep.theorem_holds}});
        ok = ok && trep.theorem_holds;
      }
      rep.results["diagonal_elimination"] = std::move(per_dc);
      if (!ts_no_search) {
        const int dc = ts_dc_list.empty() ? 2 : ts_dc_list.back();
        const CounterexampleResult ce =
            search_two_state_nondiagonal_counterexample(setup, dc, ts_cfg);
        rep.results["counterexample"] =
            json{{"dc", dc},
                 {"witness", ce.witness},
                 {"found", ce.found},
                 {"opt", detail::opt_result_to_json(ce.opt, false)},
                 {"memory_table", io::memory_table_to_json(ce.table)}};
        if (!ts_channel_out.empty()) {
          io::write_file(ts_channel_out, io::channel_to_json(ce.opt.channel).dump(2));
          rep.results["counterexample"]["channel_file"] = ts_channel_out;
        }
        ok = ok && ce.found;
      }
      finish(rep);
      detail::emit(ts_out, rep, nullptr);
      return ok ? kExitOk : kExitDomain;
    }

    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const BoundViolation& e) {
    std::cerr << "bound violation: " << e.what() << '\n';
    return kExitBoundViolation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace qmet::cli
