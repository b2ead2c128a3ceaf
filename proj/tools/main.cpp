// arisjam command line: scenario generation, channel dumps, single inner
// solves, worst-case evaluation, deployment training and search, and sweep
// experiments. Every subcommand is deterministic for a given --seed.

#include <CLI11.hpp>
#include <arisjam/experiment.hpp>
#include <arisjam/io.hpp>
#include <arisjam/rl.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace arisjam;

Placement parse_placement(const std::string& txt) {
  double x = 0.0, y = 0.0;
  char comma = 0;
  std::istringstream is(txt);
  if (!(is >> x >> comma >> y) || comma != ',')
    throw CLI::ValidationError("--placement", "expected X,Y");
  return {x, y};
}

Scenario load_scenario_checked(const std::string& path) {
  Scenario s = load_scenario(path);
  validate(s);
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

int cmd_gen_scenario(std::uint64_t seed, const std::string& scale, const std::string& out) {
  Scenario s = scale == "full" ? default_scenario(seed) : desk_scenario(seed);
  if (out.empty()) {
    save_scenario(s, std::cout);
  } else {
    save_scenario(s, out);
    std::printf("wrote %s (%s scale, seed %llu)\n", out.c_str(), scale.c_str(),
                static_cast<unsigned long long>(seed));
  }
  return 0;
}

int cmd_dump_channels(const std::string& scenario_path, const std::string& placement_txt,
                      std::optional<std::uint64_t> seed, const std::string& out) {
  Scenario s = load_scenario_checked(scenario_path);
  std::uint64_t ch_seed = seed.value_or(s.rng_seed);
  Placement p = placement_txt.empty()
                    ? Placement{0.5 * (s.area_xmin + s.area_xmax), 0.5 * (s.area_ymin + s.area_ymax)}
                    : parse_placement(placement_txt);
  ChannelSet c = make_channels(s, p, ch_seed);
  nlohmann::json j = channels_json(c);
  j["placement"] = {p.x, p.y};
  j["seed"] = ch_seed;
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    save_json_file(out, j);
  return 0;
}

int cmd_solve_inner(const std::string& scenario_path, const std::string& placement_txt,
                    std::optional<std::uint64_t> seed, const std::string& budget,
                    const std::string& out, const std::string& dump_conic) {
  Scenario s = load_scenario_checked(scenario_path);
  std::uint64_t run_seed = seed.value_or(s.rng_seed);
  s.rng_seed = run_seed;
  Placement p = parse_placement(placement_txt);

  InnerOptions opt = budget_by_name(budget);
  std::ofstream conic_file;
  if (!dump_conic.empty()) {
    conic_file = open_out(dump_conic);
    conic_file << "# realified conic programs, one section per assembled stage\n";
    opt.inspect = [&conic_file](const conic::Problem& prob, const std::string& tag) {
      dump_problem(conic_file, prob, tag);
    };
  }

  ChannelSet c = make_channels(s, p, run_seed);
  InnerResult r = bcd_solve(s, c, opt);
  nlohmann::json j = solution_json(pack_solution(s, p, run_seed, r));
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    save_json_file(out, j);
  std::fprintf(stderr, "robust rate %.6f b/s/Hz after %d sweeps (%d solves)%s%s\n",
               r.robust_rate_bits, r.outer_iters, r.solver_calls, r.note.empty() ? "" : ", note: ",
               r.note.c_str());
  return 0;
}

int cmd_eval_worst_case(const std::string& solution_path, int samples, std::uint64_t seed,
                        const std::string& out) {
  SolutionFile f = solution_from_json(load_json_file(solution_path));
  ChannelSet c = make_channels(f.scenario, f.placement, f.seed);

  WorstCaseOptions wc;
  wc.samples = samples;
  wc.seed = seed;
  WorstCaseResult searched = worst_case_rate(f.scenario, c, f.strategy, wc);

  nlohmann::json j = report_json(searched);
  j["certified_bits"] = exact_worst_secrecy_rate(f.scenario, c, f.strategy);
  j["nominal_bits"] = secrecy_rate_bits(f.scenario, c, f.strategy, Csi::kEstimate);
  j["samples"] = samples;
  j["seed"] = seed;
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    save_json_file(out, j);
  return 0;
}

int cmd_train_deploy(const std::string& scenario_path, int episodes, int epochs,
                     std::uint64_t seed, const std::string& out_dir) {
  Scenario s = load_scenario_checked(scenario_path);
  std::filesystem::create_directories(out_dir);
  std::string csv_path = out_dir + "/episodes.csv";
  std::ofstream csv = open_out(csv_path);
  csv << "# arisjam training log v1\n";
  csv << "episode,return,rate_bits,x,y,sigma,solver_failures\n";
  csv.precision(17);

  TrainOptions opt;
  opt.episodes = episodes;
  opt.epochs_per_episode = epochs;
  opt.seed = seed;
  opt.on_episode = [&csv](int ep, const EpisodeLog& lg) {
    csv << ep << "," << lg.ret << "," << lg.final_rate_bits << "," << lg.final_pos.x << ","
        << lg.final_pos.y << "," << lg.sigma << "," << lg.solver_failures << "\n";
    csv.flush();
    std::fprintf(stderr, "episode %d: return %+.3f, final rate %.3f at (%.1f, %.1f)\n", ep, lg.ret,
                 lg.final_rate_bits, lg.final_pos.x, lg.final_pos.y);
  };

  TrainResult r = train_deploy(s, opt);
  std::string ckpt = out_dir + "/policy.ckpt";
  save_checkpoint(ckpt, r.agent);

  nlohmann::json summary = {{"episodes", static_cast<int>(r.episodes.size())},
                            {"updates", r.updates},
                            {"solver_failures", r.solver_failures},
                            {"diverged", r.diverged},
                            {"note", r.note},
                            {"checkpoint", ckpt}};
  save_json_file(out_dir + "/summary.json", summary);
  std::printf("wrote %s and %s\n", csv_path.c_str(), ckpt.c_str());
  if (r.diverged) {
    std::fprintf(stderr, "training diverged: %s\n", r.note.c_str());
    return 1;
  }
  return 0;
}

int cmd_grid_search(const std::string& scenario_path, double step, std::uint64_t seed,
                    const std::string& budget, int workers, const std::string& out) {
  Scenario s = load_scenario_checked(scenario_path);
  GridSearchResult g = grid_search_deploy(s, step, seed, budget_by_name(budget), workers);

  std::ostringstream os;
  os << "# arisjam grid v1\n";
  os << "x,y,rate_bits\n";
  os.precision(17);
  for (const auto& cell : g.cells) os << cell.pos.x << "," << cell.pos.y << "," << cell.rate_bits << "\n";
  if (out.empty()) {
    std::cout << os.str();
  } else {
    open_out(out) << os.str();
  }
  std::fprintf(stderr, "best (%.1f, %.1f) at %.6f b/s/Hz over %zu cells\n", g.best.x, g.best.y,
               g.rate_bits, g.cells.size());
  return 0;
}

int cmd_run_experiment(const std::string& spec_path, const std::string& out_dir,
                       std::optional<std::uint64_t> seed, int workers) {
  ExperimentSpec spec = load_experiment_spec(spec_path);
  if (seed) {
    // shift the whole seed list so one flag reruns the table elsewhere
    std::size_t count = spec.seeds.size();
    spec.seeds.clear();
    for (std::size_t i = 0; i < count; ++i) spec.seeds.push_back(*seed + i);
  }
  if (spec.long_running)
    std::fprintf(stderr, "note: spec is marked long-running, expect hours at full scale\n");

  ExperimentResult res = run_experiment(spec, workers);
  std::filesystem::create_directories(out_dir);
  std::string csv_path = out_dir + "/results.csv";
  {
    std::ofstream f = open_out(csv_path);
    write_results_csv(f, spec, res);
  }
  if (!res.errors.empty()) {
    std::ofstream f = open_out(out_dir + "/errors.txt");
    for (const auto& e : res.errors) f << e << "\n";
    for (const auto& e : res.errors) std::fprintf(stderr, "failed: %s\n", e.c_str());
  }
  int failed = res.attempted - static_cast<int>(res.rows.size());
  std::printf("wrote %s (%zu rows, %d failed of %d)\n", csv_path.c_str(), res.rows.size(), failed,
              res.attempted);
  return failed * 10 > res.attempted ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust secrecy-rate toolkit for an aerial RIS with a colocated jammer"};
  app.require_subcommand(1);

  // gen-scenario
  std::uint64_t gen_seed = 1;
  std::string gen_scale = "desk";
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-scenario", "draw a scenario and write its key/value config");
  gen->add_option("--seed", gen_seed, "seed for eavesdropper positions");
  gen->add_option("--scale", gen_scale, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  gen->add_option("--out", gen_out, "output path, stdout when omitted");

  // dump-channels
  std::string dc_scenario, dc_placement, dc_out;
  std::optional<std::uint64_t> dc_seed;
  auto* dc = app.add_subcommand("dump-channels", "write one channel realization as JSON");
  dc->add_option("--scenario", dc_scenario, "scenario config file")->required();
  dc->add_option("--placement", dc_placement, "aerial platform position X,Y; area center when omitted");
  dc->add_option("--seed", dc_seed, "channel seed, scenario rng_seed when omitted");
  dc->add_option("--out", dc_out, "output path, stdout when omitted");

  // solve-inner
  std::string si_scenario, si_placement = "200,200", si_budget = "full", si_out, si_dump;
  std::optional<std::uint64_t> si_seed;
  auto* si = app.add_subcommand("solve-inner",
                                "run the robust strategy optimization at one placement");
  si->add_option("--scenario", si_scenario, "scenario config file")->required();
  si->add_option("--placement", si_placement, "aerial platform position X,Y");
  si->add_option("--seed", si_seed, "channel and restart seed, scenario rng_seed when omitted");
  si->add_option("--budget", si_budget, "solve effort: training, eval or full")
      ->check(CLI::IsMember({"training", "eval", "full"}));
  si->add_option("--out", si_out, "solution JSON path, stdout when omitted");
  si->add_option("--dump-conic", si_dump,
                 "also write every assembled conic program as sparse text (block i j var value)");

  // eval-worst-case
  std::string ew_solution, ew_out;
  int ew_samples = 2000;
  std::uint64_t ew_seed = 1;
  auto* ew = app.add_subcommand("eval-worst-case",
                                "search the error balls against a saved solution");
  ew->add_option("--solution", ew_solution, "solution JSON from solve-inner")->required();
  ew->add_option("--samples", ew_samples, "boundary samples per eavesdropper");
  ew->add_option("--seed", ew_seed, "search seed");
  ew->add_option("--out", ew_out, "report JSON path, stdout when omitted");

  // train-deploy
  std::string td_scenario, td_out = "train-out";
  int td_episodes = 150, td_epochs = 30;
  std::uint64_t td_seed = 1;
  auto* td = app.add_subcommand("train-deploy", "train the deployment policy on a scenario");
  td->add_option("--scenario", td_scenario, "scenario config file")->required();
  td->add_option("--episodes", td_episodes, "training episodes");
  td->add_option("--epochs", td_epochs, "environment steps per episode");
  td->add_option("--seed", td_seed, "training seed");
  td->add_option("--out", td_out, "output directory for checkpoint and episode log")->required();

  // grid-search
  std::string gs_scenario, gs_budget = "eval", gs_out;
  double gs_step = 100.0;
  std::uint64_t gs_seed = 1;
  int gs_workers = 1;
  auto* gs = app.add_subcommand("grid-search", "robust rate over a placement grid");
  gs->add_option("--scenario", gs_scenario, "scenario config file")->required();
  gs->add_option("--step", gs_step, "grid step in meters")->check(CLI::PositiveNumber);
  gs->add_option("--seed", gs_seed, "channel seed shared by all cells");
  gs->add_option("--budget", gs_budget, "solve effort: training, eval or full")
      ->check(CLI::IsMember({"training", "eval", "full"}));
  gs->add_option("--workers", gs_workers, "parallel cell evaluations")->check(CLI::PositiveNumber);
  gs->add_option("--out", gs_out, "heatmap CSV path, stdout when omitted");

  // run-experiment
  std::string re_spec, re_out = "experiment-out";
  std::optional<std::uint64_t> re_seed;
  int re_workers = 1;
  auto* re = app.add_subcommand("run-experiment", "run a sweep described by a JSON spec");
  re->add_option("--spec", re_spec, "experiment spec JSON")->required();
  re->add_option("--out", re_out, "output directory")->required();
  re->add_option("--seed", re_seed, "rebase the spec's seed list at this value");
  re->add_option("--workers", re_workers, "parallel work units")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_scenario(gen_seed, gen_scale, gen_out);
    if (*dc) return cmd_dump_channels(dc_scenario, dc_placement, dc_seed, dc_out);
    if (*si) return cmd_solve_inner(si_scenario, si_placement, si_seed, si_budget, si_out, si_dump);
    if (*ew) return cmd_eval_worst_case(ew_solution, ew_samples, ew_seed, ew_out);
    if (*td) return cmd_train_deploy(td_scenario, td_episodes, td_epochs, td_seed, td_out);
    if (*gs) return cmd_grid_search(gs_scenario, gs_step, gs_seed, gs_budget, gs_workers, gs_out);
    if (*re) return cmd_run_experiment(re_spec, re_out, re_seed, re_workers);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
