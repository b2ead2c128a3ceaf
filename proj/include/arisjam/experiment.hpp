#pragma once

/**
 * Sweep experiments over scenario families with scheme ablations. One run
 * produces a CSV table with a row per (sweep value, scheme, seed); rows are
 * computed in independent work units so reruns are bit for bit identical
 * for a given spec and seed list, whatever the worker count.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <json.hpp>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "eval.hpp"
#include "inner.hpp"
#include "io.hpp"
#include "rl.hpp"
#include "scenario.hpp"
#include "units.hpp"

namespace arisjam {

enum class Scheme {
  kRobust,      // full design under the declared uncertainty
  kNonrobust,   // designed as if estimates were exact, judged under errors
  kNoJamming,   // jammer transmit power forced to zero
  kNoFixedRis,  // fixed RIS removed
  kNoAris,      // aerial RIS removed, jammer still active
  kPerfectCsi,  // zero uncertainty end to end, an upper reference
};

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kRobust: return "robust";
    case Scheme::kNonrobust: return "nonrobust";
    case Scheme::kNoJamming: return "no-jamming";
    case Scheme::kNoFixedRis: return "no-fixed-ris";
    case Scheme::kNoAris: return "no-aris";
    case Scheme::kPerfectCsi: return "perfect-csi";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::kRobust, Scheme::kNonrobust, Scheme::kNoJamming, Scheme::kNoFixedRis,
                   Scheme::kNoAris, Scheme::kPerfectCsi})
    if (name == to_string(s)) return s;
  throw std::invalid_argument("unknown scheme: " + name);
}

// how the sweep values of each experiment id are interpreted
inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {
      "fig-deploy",        // no sweep, placement study at the base scenario
      "sweep-power",       // source power in dBm
      "sweep-elements",    // elements per surface, both surfaces together
      "sweep-split",       // ARIS share of a fixed total element budget, percent
      "sweep-uncertainty", // CSI error fraction delta
      "sweep-eveloc",      // eavesdropper cluster center, x = y = value
  };
  return ids;
}

struct ExperimentSpec {
  std::string id = "fig-deploy";
  Scenario base = desk_scenario(1);
  std::vector<double> sweep = {0.0};
  std::vector<std::uint64_t> seeds = {1};
  std::vector<Scheme> schemes = {Scheme::kRobust};

  // eavesdropper cluster geometry, redrawn per seed
  double eve_center_x = 300.0, eve_center_y = 300.0, eve_radius = 50.0;
  int total_elements = 16;  // sweep-split budget

  // where the aerial platform goes: a pinned point, a grid search per
  // (sweep value, seed), or a greedy walk of a trained policy
  std::string placement_mode = "fixed";
  Placement placement{160.0, 90.0};
  double grid_step = 200.0;
  std::string checkpoint;
  int rollout_steps = 60;

  InnerOptions inner = deploy_eval_defaults();
  WorstCaseOptions worst;
  bool long_running = false;  // marks full-scale specs, informational
};

inline void validate(const ExperimentSpec& spec) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("experiment: " + msg); };
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), spec.id) == ids.end()) fail("unknown id: " + spec.id);
  if (spec.sweep.empty()) fail("empty sweep");
  if (spec.seeds.empty()) fail("empty seed list");
  if (spec.schemes.empty()) fail("empty scheme list");
  if (spec.placement_mode != "fixed" && spec.placement_mode != "grid" &&
      spec.placement_mode != "policy")
    fail("unknown placement mode: " + spec.placement_mode);
  if (spec.placement_mode == "policy" && spec.checkpoint.empty())
    fail("policy placement needs a checkpoint");
  if (spec.id == "sweep-split") {
    if (spec.total_elements < 1) fail("sweep-split needs a positive element budget");
    for (double v : spec.sweep)
      if (v < 0.0 || v > 100.0) fail("sweep-split values are percentages");
  }
  if (spec.id == "sweep-elements")
    for (double v : spec.sweep)
      if (v < 0.0 || v != std::floor(v)) fail("sweep-elements values must be whole counts");
}

/**
 * The scenario one work unit runs on: sweep value applied, eavesdropper
 * positions redrawn for the seed, channel seed pinned. Scheme ablations
 * are layered on top by apply_scheme.
 */
inline Scenario scenario_at(const ExperimentSpec& spec, double value, std::uint64_t seed) {
  Scenario s = spec.base;
  double cx = spec.eve_center_x, cy = spec.eve_center_y;
  if (spec.id == "sweep-power") {
    s.source_power_w = dbm_to_watt(value);
  } else if (spec.id == "sweep-elements") {
    s.num_aris_elements = static_cast<int>(value);
    s.num_ris_elements = static_cast<int>(value);
  } else if (spec.id == "sweep-split") {
    int na = static_cast<int>(std::lround(spec.total_elements * value / 100.0));
    s.num_aris_elements = na;
    s.num_ris_elements = spec.total_elements - na;
  } else if (spec.id == "sweep-uncertainty") {
    s.delta_csi = value;
  } else if (spec.id == "sweep-eveloc") {
    cx = value;
    cy = value;
  }
  s.rng_seed = seed;
  s.eve_positions = draw_eve_positions(s.num_eves, cx, cy, spec.eve_radius, seed);
  validate(s);
  return s;
}

inline Scenario apply_scheme(const Scenario& base, Scheme scheme) {
  Scenario s = base;
  switch (scheme) {
    case Scheme::kRobust:
    case Scheme::kNonrobust: break;
    case Scheme::kNoJamming: s.jammer_power_w = 0.0; break;
    case Scheme::kNoFixedRis: s.num_ris_elements = 0; break;
    case Scheme::kNoAris: s.num_aris_elements = 0; break;
    case Scheme::kPerfectCsi: s.delta_csi = 0.0; break;
  }
  return s;
}

struct ResultRow {
  double sweep = 0.0;
  Scheme scheme = Scheme::kRobust;
  std::uint64_t seed = 1;
  double nominal_bits = 0.0;      // estimated channels taken at face value
  double robust_bits = 0.0;       // certified worst case over the error balls
  double adversarial_bits = 0.0;  // rate under searched worst-case errors
  Placement pos{0.0, 0.0};
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sweep-major, then seed, then scheme
  std::vector<std::string> errors;
  int attempted = 0;
};

namespace detail {

inline ResultRow run_scheme(const ExperimentSpec& spec, const Scenario& swept, Scheme scheme,
                            const Placement& pos, double value, std::uint64_t seed) {
  Scenario s = apply_scheme(swept, scheme);
  validate(s);
  ChannelSet c = make_channels(s, pos, seed);

  // a nonrobust design believes the estimates; everyone is judged on the
  // queried channels afterwards
  InnerResult design = scheme == Scheme::kNonrobust
                           ? bcd_solve(s, with_zero_radii(c), spec.inner)
                           : bcd_solve(s, c, spec.inner);
  if (!design.note.empty()) throw std::runtime_error("inner solve: " + design.note);

  WorstCaseOptions wc = spec.worst;
  wc.seed = derive_seed(seed, 40 + static_cast<std::uint64_t>(scheme));

  ResultRow row;
  row.sweep = value;
  row.scheme = scheme;
  row.seed = seed;
  row.pos = pos;
  row.nominal_bits = secrecy_rate_bits(s, c, design.strategy, Csi::kEstimate);
  row.robust_bits = exact_worst_secrecy_rate(s, c, design.strategy);
  row.adversarial_bits = worst_case_rate(s, c, design.strategy, wc).rate_bits;
  return row;
}

inline Placement placement_for(const ExperimentSpec& spec, const Scenario& swept,
                               std::uint64_t seed) {
  if (spec.placement_mode == "grid")
    return grid_search_deploy(swept, spec.grid_step, seed, spec.inner).best;
  if (spec.placement_mode == "policy") {
    DdpgAgent agent = load_checkpoint(spec.checkpoint);
    Placement center{0.5 * (swept.area_xmin + swept.area_xmax),
                     0.5 * (swept.area_ymin + swept.area_ymax)};
    return greedy_rollout(agent, swept, center, spec.rollout_steps, seed).pos;
  }
  return clamp_to_area(swept, spec.placement);
}

}  // namespace detail

/**
 * Runs the whole table. Work units are (sweep value, seed) pairs sharing one
 * placement, so scheme columns stay comparable; a unit's schemes run in
 * order and failures are recorded without aborting the rest.
 */
inline ExperimentResult run_experiment(const ExperimentSpec& spec, int workers = 1) {
  validate(spec);

  struct Unit {
    std::size_t vi, si;
  };
  std::vector<Unit> units;
  for (std::size_t vi = 0; vi < spec.sweep.size(); ++vi)
    for (std::size_t si = 0; si < spec.seeds.size(); ++si) units.push_back({vi, si});

  const std::size_t per_unit = spec.schemes.size();
  ExperimentResult out;
  out.attempted = static_cast<int>(units.size() * per_unit);
  out.rows.resize(units.size() * per_unit);
  std::vector<char> ok(out.rows.size(), 0);
  std::vector<std::vector<std::string>> unit_errors(units.size());

  auto run_unit = [&](std::size_t ui) {
    const Unit& u = units[ui];
    double value = spec.sweep[u.vi];
    std::uint64_t seed = spec.seeds[u.si];
    Scenario swept;
    Placement pos;
    try {
      swept = scenario_at(spec, value, seed);
      pos = detail::placement_for(spec, swept, seed);
    } catch (const std::exception& e) {
      unit_errors[ui].push_back("sweep " + std::to_string(value) + " seed " +
                                std::to_string(seed) + ": " + e.what());
      return;
    }
    for (std::size_t ci = 0; ci < per_unit; ++ci) {
      std::size_t slot = ui * per_unit + ci;
      try {
        out.rows[slot] = detail::run_scheme(spec, swept, spec.schemes[ci], pos, value, seed);
        ok[slot] = 1;
      } catch (const std::exception& e) {
        unit_errors[ui].push_back("sweep " + std::to_string(value) + " seed " +
                                  std::to_string(seed) + " scheme " +
                                  to_string(spec.schemes[ci]) + ": " + e.what());
      }
    }
  };

  int nw = std::max(1, workers);
  if (nw == 1) {
    for (std::size_t ui = 0; ui < units.size(); ++ui) run_unit(ui);
  } else {
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
      for (std::size_t ui = cursor.fetch_add(1); ui < units.size(); ui = cursor.fetch_add(1))
        run_unit(ui);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // compact in deterministic order, failures dropped
  std::vector<ResultRow> kept;
  kept.reserve(out.rows.size());
  for (std::size_t i = 0; i < out.rows.size(); ++i)
    if (ok[i]) kept.push_back(out.rows[i]);
  out.rows = std::move(kept);
  for (auto& errs : unit_errors)
    for (auto& e : errs) out.errors.push_back(std::move(e));
  return out;
}

// schema version bumps only when a column changes meaning
inline constexpr const char* kResultsCsvHeader =
    "sweep,scheme,seed,nominal_bits,robust_bits,adversarial_bits,x,y";

inline void write_results_csv(std::ostream& os, const ExperimentSpec& spec,
                              const ExperimentResult& res) {
  os << "# arisjam results v1\n";
  os << "# id=" << spec.id << "\n";
  os << kResultsCsvHeader << "\n";
  os.precision(17);
  for (const auto& r : res.rows) {
    os << r.sweep << "," << to_string(r.scheme) << "," << r.seed << "," << r.nominal_bits << ","
       << r.robust_bits << "," << r.adversarial_bits << "," << r.pos.x << "," << r.pos.y << "\n";
  }
}

inline InnerOptions budget_by_name(const std::string& name) {
  if (name == "training") {
    // the raw per-step profile assumes a warm start; a cold caller still
    // needs the quiet jamming start or it lands on the drowned plateau
    InnerOptions o = training_inner_defaults();
    o.jam_quiet_start = true;
    return o;
  }
  if (name == "eval") return deploy_eval_defaults();
  if (name == "full") return InnerOptions{};
  throw std::invalid_argument("unknown budget: " + name + " (training, eval or full)");
}

/**
 * Parses the JSON experiment description. Unknown keys are rejected so a
 * typo cannot silently fall back to a default. Seeds come either as an
 * explicit list or as seed_base/seed_count.
 */
inline ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "id",          "base",        "scenario",       "sweep",        "seeds",
      "seed_base",   "seed_count",  "schemes",        "eve_center",   "eve_radius",
      "total_elements", "placement_mode", "placement", "grid_step",   "checkpoint",
      "rollout_steps", "budget",    "worst_samples",  "long_running",
  };
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("experiment spec: unknown key: " + key);

  ExperimentSpec spec;
  spec.id = j.at("id").get<std::string>();

  std::string base = j.value("base", "desk");
  if (base == "desk")
    spec.base = desk_scenario(1);
  else if (base == "full")
    spec.base = default_scenario(1);
  else
    throw std::invalid_argument("experiment spec: base must be desk or full");

  if (j.contains("scenario")) {
    static const std::set<std::string> sknown = {
        "num_aris_elements", "num_ris_elements", "num_jammer_antennas", "num_eves",
        "source_power_w",    "source_power_dbm", "jammer_power_w",      "jammer_power_dbm",
        "noise_power_dbm",   "delta_csi",        "aris_altitude",
    };
    const auto& sc = j.at("scenario");
    for (const auto& [key, _] : sc.items())
      if (!sknown.count(key)) throw std::invalid_argument("scenario override: unknown key: " + key);
    Scenario& s = spec.base;
    if (sc.contains("num_aris_elements")) s.num_aris_elements = sc["num_aris_elements"].get<int>();
    if (sc.contains("num_ris_elements")) s.num_ris_elements = sc["num_ris_elements"].get<int>();
    if (sc.contains("num_jammer_antennas"))
      s.num_jammer_antennas = sc["num_jammer_antennas"].get<int>();
    if (sc.contains("num_eves")) s.num_eves = sc["num_eves"].get<int>();
    if (sc.contains("source_power_w")) s.source_power_w = sc["source_power_w"].get<double>();
    if (sc.contains("source_power_dbm"))
      s.source_power_w = dbm_to_watt(sc["source_power_dbm"].get<double>());
    if (sc.contains("jammer_power_w")) s.jammer_power_w = sc["jammer_power_w"].get<double>();
    if (sc.contains("jammer_power_dbm"))
      s.jammer_power_w = dbm_to_watt(sc["jammer_power_dbm"].get<double>());
    if (sc.contains("noise_power_dbm"))
      s.noise_power_w = dbm_to_watt(sc["noise_power_dbm"].get<double>());
    if (sc.contains("delta_csi")) s.delta_csi = sc["delta_csi"].get<double>();
    if (sc.contains("aris_altitude")) s.aris_altitude = sc["aris_altitude"].get<double>();
  }

  if (j.contains("sweep")) spec.sweep = j["sweep"].get<std::vector<double>>();
  if (j.contains("seeds")) {
    spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("seed_base") || j.contains("seed_count"))
      throw std::invalid_argument("experiment spec: give seeds or seed_base/seed_count, not both");
  } else if (j.contains("seed_count")) {
    std::uint64_t base_seed = j.value("seed_base", std::uint64_t{1});
    int count = j["seed_count"].get<int>();
    if (count < 1) throw std::invalid_argument("experiment spec: seed_count must be positive");
    spec.seeds.clear();
    for (int i = 0; i < count; ++i) spec.seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  }
  if (j.contains("schemes")) {
    spec.schemes.clear();
    for (const auto& name : j["schemes"]) spec.schemes.push_back(parse_scheme(name.get<std::string>()));
  }
  if (j.contains("eve_center")) {
    const auto& ec = j["eve_center"];
    if (!ec.is_array() || ec.size() != 2)
      throw std::invalid_argument("experiment spec: eve_center must be [x, y]");
    spec.eve_center_x = ec[0].get<double>();
    spec.eve_center_y = ec[1].get<double>();
  }
  spec.eve_radius = j.value("eve_radius", spec.eve_radius);
  spec.total_elements = j.value("total_elements", spec.total_elements);
  spec.placement_mode = j.value("placement_mode", spec.placement_mode);
  if (j.contains("placement")) {
    const auto& p = j["placement"];
    if (!p.is_array() || p.size() != 2)
      throw std::invalid_argument("experiment spec: placement must be [x, y]");
    spec.placement = {p[0].get<double>(), p[1].get<double>()};
  }
  spec.grid_step = j.value("grid_step", spec.grid_step);
  spec.checkpoint = j.value("checkpoint", spec.checkpoint);
  spec.rollout_steps = j.value("rollout_steps", spec.rollout_steps);
  if (j.contains("budget")) spec.inner = budget_by_name(j["budget"].get<std::string>());
  if (j.contains("worst_samples")) spec.worst.samples = j["worst_samples"].get<int>();
  spec.long_running = j.value("long_running", spec.long_running);

  validate(spec);
  return spec;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
  return parse_experiment_spec(load_json_file(path));
}

}  // namespace arisjam
