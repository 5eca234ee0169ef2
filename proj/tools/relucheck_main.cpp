// relucheck: verification and analysis toolkit for feed-forward ReLU
// classifiers. Subcommands cover single-property verification (exhaustive
// and interval engines, segmented and coarse sampling drivers), noise
// tolerance search, counterexample mining, database analytics, an engine
// benchmark, and transition-system export.
//
// Machine-readable results go to stdout; human summaries go to stderr.
// Exit codes: 0 = UNSAT/NONE_FOUND, 1 = SAT, 2 = TIMEOUT, 3 = usage or
// input error.

#include "relucheck/analysis.hpp"
#include "relucheck/engine.hpp"
#include "relucheck/kripke.hpp"
#include "relucheck/network_io.hpp"
#include "relucheck/property.hpp"
#include "relucheck/segmentation.hpp"
#include "relucheck/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;
using namespace relucheck;

constexpr const char *kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Small parsing helpers
// ---------------------------------------------------------------------------

std::vector<std::string> split_commas(const std::string &text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    out.push_back(text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos)
      break;
    pos = comma + 1;
  }
  if (!out.empty() && out.back().empty())
    out.pop_back(); // tolerate a trailing comma
  return out;
}

std::vector<double> parse_double_list(const std::string &text,
                                      const std::string &what) {
  std::vector<double> vals;
  for (const std::string &tok : split_commas(text)) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size())
        throw std::invalid_argument(tok);
      vals.push_back(v);
    } catch (const std::exception &) {
      throw Error(what + ": \"" + tok + "\" is not a number");
    }
  }
  if (vals.empty())
    throw Error(what + ": expected a comma-separated list of numbers");
  return vals;
}

std::vector<long long> parse_int_list(const std::string &text,
                                      const std::string &what) {
  std::vector<long long> vals;
  for (double v : parse_double_list(text, what)) {
    const long long i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
      throw Error(what + ": expected integers");
    vals.push_back(i);
  }
  return vals;
}

std::vector<bool> parse_mask(const std::string &text) {
  std::vector<bool> mask;
  for (long long v : parse_int_list(text, "--mask")) {
    if (v != 0 && v != 1)
      throw Error("--mask: entries must be 0 or 1");
    mask.push_back(v == 1);
  }
  return mask;
}

int parse_acas_index(const std::string &text) {
  std::string t = text;
  if (!t.empty() && (t[0] == 'P' || t[0] == 'p'))
    t = t.substr(1);
  if (t.size() == 1 && t[0] >= '1' && t[0] <= '4')
    return t[0] - '0';
  throw Error("--acas: expected P1..P4, got \"" + text + "\"");
}

double default_timeout() {
  if (const char *env = std::getenv("RELUCHECK_TIMEOUT")) {
    try {
      std::size_t used = 0;
      const double v = std::stod(env, &used);
      if (used == std::strlen(env) && v >= 0.0)
        return v;
    } catch (const std::exception &) {
    }
    throw Error(std::string("RELUCHECK_TIMEOUT must be a non-negative "
                            "number of seconds, got \"") +
                env + "\"");
  }
  return 60.0;
}

std::string file_hash_hex(const std::string &path) {
  return to_hex(fnv1a64(read_file(path)));
}

Vector load_seed_file(const std::string &path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception &e) {
    throw Error(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_array())
    throw Error(path + ": expected a JSON array of input values");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw Error(path + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

ordered_json vector_json(const Vector &v) {
  ordered_json a = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

// ---------------------------------------------------------------------------
// Shared options
// ---------------------------------------------------------------------------

struct CommonOpts {
  std::string net_path;
  std::string engine = "explicit";
  double timeout = -1.0; // < 0: resolve from RELUCHECK_TIMEOUT or 60
  std::string grid_step; // comma list: one value or one per input node
  double epsilon = 1e-4;
  bool epsilon_absolute = false;
  std::uint64_t rng_seed = 0;
  std::string manifest_path;
  bool normalized_outputs = false;
};

void add_net_option(CLI::App *sub, CommonOpts &o) {
  sub->add_option("--net", o.net_path,
                  "network file (.nnet or .json)")
      ->required();
}

void add_engine_options(CLI::App *sub, CommonOpts &o, bool with_engine = true) {
  if (with_engine)
    sub->add_option("--engine", o.engine,
                    "search engine: explicit (exhaustive grid) or reduced "
                    "(interval branch-and-bound); default explicit");
  sub->add_option("--timeout", o.timeout,
                  "time budget in seconds (default: RELUCHECK_TIMEOUT or 60)");
  sub->add_option("--grid-step", o.grid_step,
                  "explicit engine step: one value for all nodes or one per "
                  "node (default: node width / 20)");
  sub->add_option("--epsilon", o.epsilon,
                  "reduced engine box-width floor, as a fraction of each "
                  "node's width (default 1e-4)");
  sub->add_flag("--epsilon-absolute", o.epsilon_absolute,
                "treat --epsilon as absolute input units");
  sub->add_option("--seed", o.rng_seed,
                  "random seed for segmentation pin sampling (default 0)");
  sub->add_option("--emit-manifest", o.manifest_path,
                  "also write the run manifest to this file");
}

double resolved_timeout(const CommonOpts &o) {
  return o.timeout >= 0.0 ? o.timeout : default_timeout();
}

EngineConfig build_config(const CommonOpts &o, Index input_dim) {
  EngineConfig cfg;
  cfg.timeout_seconds = resolved_timeout(o);
  if (!o.grid_step.empty()) {
    const auto steps = parse_double_list(o.grid_step, "--grid-step");
    if (steps.size() == 1) {
      cfg.grid_step_scalar = steps[0];
    } else if (steps.size() == static_cast<std::size_t>(input_dim)) {
      cfg.grid_step.resize(input_dim);
      for (Index i = 0; i < input_dim; ++i)
        cfg.grid_step(i) = steps[static_cast<std::size_t>(i)];
    } else {
      throw Error("--grid-step: expected 1 value or " +
                  std::to_string(input_dim) + ", got " +
                  std::to_string(steps.size()));
    }
  }
  cfg.epsilon = o.epsilon;
  cfg.epsilon_absolute = o.epsilon_absolute;
  cfg.rng_seed = o.rng_seed;
  cfg.validate();
  return cfg;
}

Network load_net(const CommonOpts &o) {
  Network net = load_network(o.net_path);
  if (o.normalized_outputs) {
    // Evaluate output constraints on the normalized scores instead of the
    // denormalized ones.
    net.output_mean = 0.0;
    net.output_range = 1.0;
  }
  return net;
}

ordered_json config_json(const CommonOpts &o, const EngineConfig &cfg,
                         bool with_engine) {
  ordered_json c;
  if (with_engine)
    c["engine"] = o.engine;
  c["timeout_seconds"] = cfg.timeout_seconds;
  if (cfg.grid_step.size() > 0)
    c["grid_step"] = vector_json(cfg.grid_step);
  else if (cfg.grid_step_scalar > 0.0)
    c["grid_step"] = cfg.grid_step_scalar;
  else
    c["grid_step"] = nullptr; // per-node default width/20
  c["epsilon"] = cfg.epsilon;
  c["epsilon_absolute"] = cfg.epsilon_absolute;
  c["rng_seed"] = cfg.rng_seed;
  c["normalized_outputs"] = o.normalized_outputs;
  return c;
}

ordered_json manifest_base(const std::string &subcommand,
                           const CommonOpts &o) {
  ordered_json m;
  m["tool_version"] = kVersion;
  m["subcommand"] = subcommand;
  m["inputs"] = ordered_json::object();
  if (!o.net_path.empty()) {
    ordered_json f;
    f["path"] = o.net_path;
    f["fnv1a64"] = file_hash_hex(o.net_path);
    m["inputs"]["net"] = f;
  }
  return m;
}

void manifest_add_file(ordered_json &m, const char *key,
                       const std::string &path) {
  ordered_json f;
  f["path"] = path;
  f["fnv1a64"] = file_hash_hex(path);
  m["inputs"][key] = f;
}

void write_manifest(const ordered_json &manifest, const std::string &path) {
  if (!path.empty())
    write_file(path, manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Verdict rendering
// ---------------------------------------------------------------------------

ordered_json verdict_json(const Verdict &v) {
  ordered_json j;
  j["kind"] = to_string(v.kind);
  if (v.witness) {
    const Counterexample &w = *v.witness;
    j["witness"] = vector_json(w.input);
    ordered_json d;
    d["observed_class"] = w.observed_class;
    d["noise"] = w.noise ? vector_json(*w.noise) : ordered_json(nullptr);
    d["scores"] = w.scores ? vector_json(*w.scores) : ordered_json(nullptr);
    d["property_id"] = w.property_id;
    j["witness_detail"] = std::move(d); // timestamps deliberately omitted
  } else {
    j["witness"] = nullptr;
  }
  ordered_json s;
  s["points_evaluated"] = v.stats.points_evaluated;
  s["boxes_split"] = v.stats.boxes_split;
  s["subproblems"] = v.stats.subproblems;
  s["undecided_volume"] = v.stats.undecided_volume;
  s["wall_seconds"] = v.stats.wall_seconds;
  j["stats"] = std::move(s);
  return j;
}

void summarize(const Verdict &v) {
  switch (v.kind) {
  case VerdictKind::Sat:
    std::cerr << "SAT: counterexample found after " << v.stats.points_evaluated
              << " evaluations (" << v.stats.wall_seconds << " s)\n";
    break;
  case VerdictKind::Unsat:
    std::cerr << "UNSAT: property proved over the whole search box ("
              << v.stats.wall_seconds << " s)\n";
    break;
  case VerdictKind::NoneFound:
    std::cerr << "NONE_FOUND: no counterexample found; the search was "
                 "incomplete, so this is not a proof ("
              << v.stats.wall_seconds << " s)\n";
    break;
  case VerdictKind::Timeout:
    std::cerr << "TIMEOUT: budget exhausted after "
              << v.stats.points_evaluated << " evaluations\n";
    break;
  }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
  CommonOpts common;
  std::string property_path;
  std::string acas;
  std::string seed_path;
  double noise = -1.0;
  std::string mask;
  std::string plan_path;
  int samples_per_bin = 0; // 0: keep the plan file's value
  int parallel = 1;
  std::string coarse_steps;
  std::string out_path;
};

int cmd_verify(const VerifyOpts &opt) {
  const Network net = load_net(opt.common);
  ordered_json manifest = manifest_base("verify", opt.common);

  const int sources = (opt.property_path.empty() ? 0 : 1) +
                      (opt.acas.empty() ? 0 : 1) +
                      (opt.seed_path.empty() ? 0 : 1);
  if (sources != 1)
    throw Error("choose exactly one property source: --property, --acas, or "
                "--seed-input");

  Property prop = RobustnessProperty{};
  if (!opt.property_path.empty()) {
    prop = parse_property(read_file(opt.property_path), net);
    manifest_add_file(manifest, "property", opt.property_path);
  } else if (!opt.acas.empty()) {
    if (!net.has_domain())
      throw Error("--acas needs a network with declared input bounds (the "
                  ".nnet header provides them)");
    prop = acas_property(parse_acas_index(opt.acas), net.domain());
  } else {
    const Vector seed = load_seed_file(opt.seed_path);
    manifest_add_file(manifest, "seed_input", opt.seed_path);
    if (opt.noise < 0.0)
      throw Error("--seed-input needs --noise <percent>");
    NoiseSpec spec;
    spec.percent = opt.noise;
    if (!opt.mask.empty())
      spec.noisy_mask = parse_mask(opt.mask);
    prop = RobustnessProperty::around(net, seed, spec);
  }

  const EngineConfig cfg = build_config(opt.common, net.input_size());
  const EngineKind engine = engine_kind_from_string(opt.common.engine);

  ordered_json cj = config_json(opt.common, cfg, true);
  cj["property"] = property_name(prop);
  cj["property_hash"] = property_hash(prop);
  if (!opt.acas.empty())
    cj["acas"] = opt.acas;
  if (opt.noise >= 0.0)
    cj["noise_percent"] = opt.noise;
  if (!opt.mask.empty())
    cj["mask"] = opt.mask;
  cj["parallel"] = opt.parallel;

  Verdict v;
  if (!opt.plan_path.empty() && !opt.coarse_steps.empty())
    throw Error("--plan and --coarse-steps are mutually exclusive");
  if (!opt.plan_path.empty()) {
    const auto *safety = std::get_if<SafetyProperty>(&prop);
    if (!safety)
      throw Error("--plan segments a safety property's input box; it does "
                  "not apply to robustness properties");
    SegmentationPlan plan = parse_plan(read_file(opt.plan_path));
    manifest_add_file(manifest, "plan", opt.plan_path);
    if (opt.common.rng_seed != 0)
      plan.rng_seed = opt.common.rng_seed;
    if (opt.samples_per_bin > 0)
      plan.samples_per_bin = opt.samples_per_bin;
    cj["plan"] = ordered_json::parse(serialize_plan(plan));
    v = ris_verify(net, *safety, plan, engine, cfg, opt.parallel);
  } else if (!opt.coarse_steps.empty()) {
    const auto *safety = std::get_if<SafetyProperty>(&prop);
    if (!safety)
      throw Error("--coarse-steps samples a safety property's input box; it "
                  "does not apply to robustness properties");
    const auto steps = parse_double_list(opt.coarse_steps, "--coarse-steps");
    Vector step_vec(net.input_size());
    if (steps.size() == 1)
      step_vec.setConstant(steps[0]);
    else if (steps.size() == static_cast<std::size_t>(net.input_size()))
      for (Index i = 0; i < net.input_size(); ++i)
        step_vec(i) = steps[static_cast<std::size_t>(i)];
    else
      throw Error("--coarse-steps: expected 1 value or " +
                  std::to_string(net.input_size()));
    cj["coarse_steps"] = vector_json(step_vec);
    v = coarse_grid_verify(net, *safety, step_vec, cfg);
  } else {
    v = verify(net, prop, engine, cfg);
  }

  manifest["config"] = std::move(cj);
  ordered_json out = verdict_json(v);
  out["engine"] = opt.common.engine;
  out["property"] = property_name(prop);
  out["manifest"] = manifest;

  std::cout << out.dump(2) << "\n";
  if (!opt.out_path.empty())
    write_file(opt.out_path, out.dump(2) + "\n");
  write_manifest(manifest, opt.common.manifest_path);
  summarize(v);
  return v.exit_code();
}

// ---------------------------------------------------------------------------
// tolerance
// ---------------------------------------------------------------------------

struct ToleranceOpts {
  CommonOpts common;
  std::string seed_path;
  std::string schedule;
  std::string mask;
};

int cmd_tolerance(const ToleranceOpts &opt) {
  const Network net = load_net(opt.common);
  const Vector seed = load_seed_file(opt.seed_path);
  const auto schedule = parse_double_list(opt.schedule, "--schedule");
  std::vector<bool> mask;
  if (!opt.mask.empty())
    mask = parse_mask(opt.mask);

  const EngineConfig cfg = build_config(opt.common, net.input_size());
  const EngineKind engine = engine_kind_from_string(opt.common.engine);

  const ToleranceResult res =
      noise_tolerance(net, seed, schedule, engine, cfg, mask);

  ordered_json manifest = manifest_base("tolerance", opt.common);
  manifest_add_file(manifest, "seed_input", opt.seed_path);
  ordered_json cj = config_json(opt.common, cfg, true);
  cj["schedule"] = schedule;
  if (!opt.mask.empty())
    cj["mask"] = opt.mask;
  manifest["config"] = std::move(cj);

  ordered_json out;
  out["tolerance_percent"] = res.tolerance_percent
                                 ? ordered_json(*res.tolerance_percent)
                                 : ordered_json(nullptr);
  out["levels"] = ordered_json::array();
  for (const auto &level : res.levels) {
    ordered_json l;
    l["percent"] = level.percent;
    l["verdict"] = verdict_json(level.verdict);
    out["levels"].push_back(std::move(l));
  }
  out["manifest"] = manifest;

  std::cout << out.dump(2) << "\n";
  write_manifest(manifest, opt.common.manifest_path);
  if (res.tolerance_percent)
    std::cerr << "noise tolerance: " << *res.tolerance_percent << "%\n";
  else
    std::cerr << "noise tolerance: below " << schedule.back()
              << "% (no level proved safe)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// collect
// ---------------------------------------------------------------------------

struct CollectOpts {
  CommonOpts common;
  std::string seed_path;
  double noise = -1.0;
  std::string mask;
  long long max_ces = 1000;
  std::string db_path;
  bool csv = false;
};

int cmd_collect(const CollectOpts &opt) {
  const Network net = load_net(opt.common);
  const Vector seed = load_seed_file(opt.seed_path);
  if (opt.noise < 0.0)
    throw Error("collect needs --noise <percent>");
  NoiseSpec spec;
  spec.percent = opt.noise;
  if (!opt.mask.empty())
    spec.noisy_mask = parse_mask(opt.mask);
  const RobustnessProperty prop = RobustnessProperty::around(net, seed, spec);

  EngineConfig cfg = build_config(opt.common, net.input_size());
  if (opt.max_ces < 0)
    throw Error("--max must be non-negative");
  cfg.max_counterexamples = opt.max_ces;
  const EngineKind engine = engine_kind_from_string(opt.common.engine);

  const CEDatabase db = collect_counterexamples(net, prop, engine, cfg);

  ordered_json manifest = manifest_base("collect", opt.common);
  manifest_add_file(manifest, "seed_input", opt.seed_path);
  ordered_json cj = config_json(opt.common, cfg, true);
  cj["noise_percent"] = opt.noise;
  if (!opt.mask.empty())
    cj["mask"] = opt.mask;
  cj["max_counterexamples"] = opt.max_ces;
  cj["csv"] = opt.csv;
  manifest["config"] = std::move(cj);

  const std::string text = opt.csv ? cedb_to_csv(db) : serialize_cedb(db);
  std::cout << text;
  if (!opt.db_path.empty())
    write_file(opt.db_path, text);
  write_manifest(manifest, opt.common.manifest_path);
  std::cerr << "collected " << db.records.size() << " counterexample(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOpts {
  CommonOpts common; // net optional here: revalidation gate only
  std::string db_path;
  std::string report;
  double ratio_threshold = 0.25;
  int bins = 20;
  double sign_threshold = 0.05;
  bool csv = false;
};

bool ends_with(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_analyze(const AnalyzeOpts &opt) {
  CEDatabase db;
  try {
    db = ends_with(opt.db_path, ".csv") ? cedb_from_csv(read_file(opt.db_path))
                                        : parse_cedb(read_file(opt.db_path));
  } catch (const Error &e) {
    throw Error(opt.db_path + ": " + e.what());
  }

  ordered_json manifest;
  std::optional<Network> net;
  if (!opt.common.net_path.empty()) {
    net = load_net(opt.common);
    manifest = manifest_base("analyze", opt.common);
    try {
      db.validate_against(*net);
    } catch (const Error &e) {
      throw Error(opt.db_path + ": rejected by the revalidation gate: " +
                  e.what());
    }
  } else {
    CommonOpts no_net = opt.common;
    no_net.net_path.clear();
    manifest = manifest_base("analyze", no_net);
  }
  manifest_add_file(manifest, "db", opt.db_path);
  ordered_json cj;
  cj["report"] = opt.report;
  cj["ratio_threshold"] = opt.ratio_threshold;
  cj["bins"] = opt.bins;
  cj["sign_threshold"] = opt.sign_threshold;
  cj["csv"] = opt.csv;
  cj["revalidated"] = net.has_value();
  manifest["config"] = std::move(cj);

  std::string text;
  if (opt.report == "bias") {
    const BiasReport r = bias_report(db, opt.ratio_threshold);
    text = opt.csv ? bias_report_csv(r) : bias_report_json(r);
  } else if (opt.report == "sensitivity") {
    const SensitivityReport r =
        sensitivity_report(db, opt.bins, opt.sign_threshold);
    text = opt.csv ? sensitivity_report_csv(r) : sensitivity_report_json(r);
  } else {
    throw Error("--report must be \"bias\" or \"sensitivity\", got \"" +
                opt.report + "\"");
  }

  std::cout << text;
  write_manifest(manifest, opt.common.manifest_path);
  std::cerr << "analyzed " << db.records.size() << " record(s) from "
            << opt.db_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOpts {
  CommonOpts common;
  std::string seed_path;
  std::string sweep;     // noise percents
  std::string densities; // grid densities per node
  double noise = -1.0;   // fixed box for density mode
  int repeat = 1;
};

int cmd_bench(const BenchOpts &opt) {
  const Network net = load_net(opt.common);
  const Vector seed = load_seed_file(opt.seed_path);
  if (opt.sweep.empty() == opt.densities.empty())
    throw Error("bench needs exactly one of --sweep or --densities");
  if (opt.repeat < 1)
    throw Error("--repeat must be at least 1");

  const EngineConfig base_cfg = build_config(opt.common, net.input_size());

  struct Row {
    double level;
    EngineKind engine;
    VerdictKind kind;
    long long points;
    long long boxes;
    double wall;
  };
  std::vector<Row> rows;

  auto run_timed = [&](const Property &prop, EngineKind engine,
                       const EngineConfig &cfg) {
    Verdict best;
    double wall = 0.0;
    for (int r = 0; r < opt.repeat; ++r) {
      const Verdict v = verify(net, prop, engine, cfg);
      if (r == 0 || v.stats.wall_seconds < wall)
        wall = v.stats.wall_seconds;
      best = v;
    }
    best.stats.wall_seconds = std::max(wall, 1e-6); // avoid zero-width ticks
    return best;
  };

  if (!opt.sweep.empty()) {
    for (double pct : parse_double_list(opt.sweep, "--sweep")) {
      NoiseSpec spec;
      spec.percent = pct;
      const RobustnessProperty prop =
          RobustnessProperty::around(net, seed, spec);
      for (EngineKind engine : {EngineKind::Explicit, EngineKind::Reduced}) {
        const Verdict v = run_timed(prop, engine, base_cfg);
        rows.push_back({pct, engine, v.kind, v.stats.points_evaluated,
                        v.stats.boxes_split, v.stats.wall_seconds});
      }
    }
  } else {
    if (opt.noise < 0.0)
      throw Error("--densities needs --noise <percent> to fix the box");
    NoiseSpec spec;
    spec.percent = opt.noise;
    const RobustnessProperty prop = RobustnessProperty::around(net, seed, spec);
    const Box box = noise_box(seed, spec);
    for (long long density : parse_int_list(opt.densities, "--densities")) {
      if (density < 1)
        throw Error("--densities: densities must be positive");
      // Explicit: density grid cells per node. Reduced: matching box-width
      // floor, so both engines resolve the same granularity.
      EngineConfig ex = base_cfg;
      ex.grid_step.resize(box.dim());
      for (Index i = 0; i < box.dim(); ++i) {
        const double w = box.upper(i) - box.lower(i);
        ex.grid_step(i) = w > 0.0 ? w / static_cast<double>(density) : 1.0;
      }
      ex.grid_step_scalar = 0.0;
      EngineConfig red = base_cfg;
      red.grid_step = Vector();
      red.grid_step_scalar = 0.0;
      red.epsilon = 1.0 / static_cast<double>(density);
      red.epsilon_absolute = false;

      const Verdict ve = run_timed(prop, EngineKind::Explicit, ex);
      rows.push_back({static_cast<double>(density), EngineKind::Explicit,
                      ve.kind, ve.stats.points_evaluated, ve.stats.boxes_split,
                      ve.stats.wall_seconds});
      const Verdict vr = run_timed(prop, EngineKind::Reduced, red);
      rows.push_back({static_cast<double>(density), EngineKind::Reduced,
                      vr.kind, vr.stats.points_evaluated, vr.stats.boxes_split,
                      vr.stats.wall_seconds});
    }
  }

  ordered_json manifest = manifest_base("bench", opt.common);
  manifest_add_file(manifest, "seed_input", opt.seed_path);
  ordered_json cj = config_json(opt.common, base_cfg, false);
  if (!opt.sweep.empty())
    cj["sweep"] = opt.sweep;
  if (!opt.densities.empty())
    cj["densities"] = opt.densities;
  if (opt.noise >= 0.0)
    cj["noise_percent"] = opt.noise;
  cj["repeat"] = opt.repeat;
  manifest["config"] = std::move(cj);

  std::cout << "level,engine,kind,points_evaluated,boxes_split,wall_seconds\n";
  char buf[64];
  for (const Row &row : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.level);
    std::cout << buf << ',' << to_string(row.engine) << ','
              << to_string(row.kind) << ',' << row.points << ',' << row.boxes
              << ',';
    std::snprintf(buf, sizeof(buf), "%.9g", row.wall);
    std::cout << buf << "\n";
  }
  write_manifest(manifest, opt.common.manifest_path);
  std::cerr << "bench: " << rows.size() << " run(s), min-of-" << opt.repeat
            << " timing\n";
  return 0;
}

// ---------------------------------------------------------------------------
// emit-dot
// ---------------------------------------------------------------------------

struct DotOpts {
  std::string explicit_spec; // "noise_options,classes"
  std::string reduced_spec;  // "classes"
  std::string merged_spec;   // "noise_options,classes"
  std::string manifest_path;
};

int cmd_emit_dot(const DotOpts &opt) {
  const int sources = (opt.explicit_spec.empty() ? 0 : 1) +
                      (opt.reduced_spec.empty() ? 0 : 1) +
                      (opt.merged_spec.empty() ? 0 : 1);
  if (sources != 1)
    throw Error("choose exactly one of --explicit n,C / --reduced C / "
                "--merged n,C");

  KripkeStructure model;
  ordered_json manifest;
  manifest["tool_version"] = kVersion;
  manifest["subcommand"] = "emit-dot";
  ordered_json cj;
  if (!opt.explicit_spec.empty()) {
    const auto nc = parse_int_list(opt.explicit_spec, "--explicit");
    if (nc.size() != 2)
      throw Error("--explicit: expected \"noise_options,classes\"");
    model = build_explicit_model(nc[0], static_cast<int>(nc[1]));
    cj["explicit"] = opt.explicit_spec;
  } else if (!opt.reduced_spec.empty()) {
    const auto c = parse_int_list(opt.reduced_spec, "--reduced");
    if (c.size() != 1)
      throw Error("--reduced: expected \"classes\"");
    model = build_reduced_model(static_cast<int>(c[0]));
    cj["reduced"] = opt.reduced_spec;
  } else {
    const auto nc = parse_int_list(opt.merged_spec, "--merged");
    if (nc.size() != 2)
      throw Error("--merged: expected \"noise_options,classes\"");
    model = merge_equilabeled(build_explicit_model(nc[0],
                                                   static_cast<int>(nc[1])));
    cj["merged"] = opt.merged_spec;
  }
  manifest["config"] = std::move(cj);

  std::cout << model.to_dot();
  write_manifest(manifest, opt.manifest_path);
  std::cerr << "model: " << model.state_count() << " states, "
            << model.transition_count() << " transitions\n";
  return 0;
}

} // namespace

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

int main(int argc, char **argv) {
  CLI::App app{"verification and analysis toolkit for feed-forward ReLU "
               "classifiers (JSON to stdout, summaries to stderr)"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  VerifyOpts verify_opts;
  auto *verify_cmd = app.add_subcommand(
      "verify", "check one robustness or safety property");
  add_net_option(verify_cmd, verify_opts.common);
  verify_cmd->add_option("--property", verify_opts.property_path,
                         "property file (JSON)");
  verify_cmd->add_option("--acas", verify_opts.acas,
                         "built-in collision-avoidance property P1..P4");
  verify_cmd->add_option("--seed-input", verify_opts.seed_path,
                         "JSON array file: seed input for a robustness check");
  verify_cmd->add_option("--noise", verify_opts.noise,
                         "per-node noise percent for --seed-input");
  verify_cmd->add_option("--mask", verify_opts.mask,
                         "comma list of 0/1: which nodes may carry noise");
  verify_cmd->add_option("--plan", verify_opts.plan_path,
                         "segmentation plan file: split the safety box into "
                         "pinned sub-problems");
  verify_cmd->add_option("--samples-per-bin", verify_opts.samples_per_bin,
                         "override the plan's repeats per bin combination");
  verify_cmd->add_option("--parallel", verify_opts.parallel,
                         "worker threads for segmented verification "
                         "(default 1)");
  verify_cmd->add_option("--coarse-steps", verify_opts.coarse_steps,
                         "sample the safety box on a coarse grid with these "
                         "per-node steps instead of running an engine");
  verify_cmd->add_option("--out", verify_opts.out_path,
                         "also write the verdict JSON to this file");
  add_engine_options(verify_cmd, verify_opts.common);
  verify_cmd->add_flag("--normalized-outputs",
                       verify_opts.common.normalized_outputs,
                       "evaluate output constraints on normalized scores");

  ToleranceOpts tol_opts;
  auto *tol_cmd = app.add_subcommand(
      "tolerance", "find the highest proved-safe noise level on a descending "
                   "schedule");
  add_net_option(tol_cmd, tol_opts.common);
  tol_cmd->add_option("--seed-input", tol_opts.seed_path,
                      "JSON array file: the seed input")
      ->required();
  tol_cmd->add_option("--schedule", tol_opts.schedule,
                      "strictly decreasing noise percents, e.g. 40,30,20,11")
      ->required();
  tol_cmd->add_option("--mask", tol_opts.mask,
                      "comma list of 0/1: which nodes may carry noise");
  add_engine_options(tol_cmd, tol_opts.common);

  CollectOpts collect_opts;
  auto *collect_cmd = app.add_subcommand(
      "collect", "mine misclassification records into a database");
  add_net_option(collect_cmd, collect_opts.common);
  collect_cmd->add_option("--seed-input", collect_opts.seed_path,
                          "JSON array file: the seed input")
      ->required();
  collect_cmd->add_option("--noise", collect_opts.noise,
                          "per-node noise percent")
      ->required();
  collect_cmd->add_option("--mask", collect_opts.mask,
                          "comma list of 0/1: which nodes may carry noise");
  collect_cmd->add_option("--max", collect_opts.max_ces,
                          "stop after this many counterexamples "
                          "(default 1000)");
  collect_cmd->add_option("--db", collect_opts.db_path,
                          "also write the database to this file");
  collect_cmd->add_flag("--csv", collect_opts.csv,
                        "emit CSV instead of JSON");
  add_engine_options(collect_cmd, collect_opts.common);

  AnalyzeOpts analyze_opts;
  auto *analyze_cmd = app.add_subcommand(
      "analyze", "bias / sensitivity reports over a counterexample database");
  analyze_cmd->add_option("--db", analyze_opts.db_path,
                          "database file (.json or .csv)")
      ->required();
  analyze_cmd->add_option("--report", analyze_opts.report,
                          "report kind: bias or sensitivity")
      ->required();
  analyze_cmd->add_option("--net", analyze_opts.common.net_path,
                          "network file: revalidate every record before "
                          "reporting");
  analyze_cmd->add_option("--ratio-threshold", analyze_opts.ratio_threshold,
                          "bias flag threshold on out/in traffic "
                          "(default 0.25)");
  analyze_cmd->add_option("--bins", analyze_opts.bins,
                          "histogram bins per node (default 20)");
  analyze_cmd->add_option("--sign-threshold", analyze_opts.sign_threshold,
                          "insensitivity flag threshold on sign fractions "
                          "(default 0.05)");
  analyze_cmd->add_flag("--csv", analyze_opts.csv,
                        "emit CSV instead of JSON");
  analyze_cmd->add_option("--emit-manifest", analyze_opts.common.manifest_path,
                          "also write the run manifest to this file");

  BenchOpts bench_opts;
  auto *bench_cmd = app.add_subcommand(
      "bench", "compare the explicit and reduced engines (CSV to stdout)");
  add_net_option(bench_cmd, bench_opts.common);
  bench_cmd->add_option("--seed-input", bench_opts.seed_path,
                        "JSON array file: the seed input")
      ->required();
  bench_cmd->add_option("--sweep", bench_opts.sweep,
                        "noise percents to sweep, e.g. 2,5,8,10");
  bench_cmd->add_option("--densities", bench_opts.densities,
                        "grid densities per node at a fixed --noise box");
  bench_cmd->add_option("--noise", bench_opts.noise,
                        "noise percent fixing the box for --densities");
  bench_cmd->add_option("--repeat", bench_opts.repeat,
                        "repetitions per cell; the minimum wall time is "
                        "reported (default 1)");
  add_engine_options(bench_cmd, bench_opts.common, /*with_engine=*/false);

  DotOpts dot_opts;
  auto *dot_cmd = app.add_subcommand(
      "emit-dot", "print a transition-system model in DOT format");
  dot_cmd->add_option("--explicit", dot_opts.explicit_spec,
                      "full model: noise_options,classes");
  dot_cmd->add_option("--reduced", dot_opts.reduced_spec,
                      "class-level model: classes");
  dot_cmd->add_option("--merged", dot_opts.merged_spec,
                      "full model collapsed by label merging: "
                      "noise_options,classes");
  dot_cmd->add_option("--emit-manifest", dot_opts.manifest_path,
                      "also write the run manifest to this file");

  int rc = 0;
  verify_cmd->callback([&] { rc = cmd_verify(verify_opts); });
  tol_cmd->callback([&] { rc = cmd_tolerance(tol_opts); });
  collect_cmd->callback([&] { rc = cmd_collect(collect_opts); });
  analyze_cmd->callback([&] { rc = cmd_analyze(analyze_opts); });
  bench_cmd->callback([&] { rc = cmd_bench(bench_opts); });
  dot_cmd->callback([&] { rc = cmd_emit_dot(dot_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
