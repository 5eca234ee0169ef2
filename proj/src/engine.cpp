#include "relucheck/engine.hpp"

#include "relucheck/kripke.hpp"
#include "relucheck/network_io.hpp"
#include "relucheck/util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace relucheck {

std::string to_string(EngineKind k) {
  return k == EngineKind::Explicit ? "explicit" : "reduced";
}

std::string to_string(VerdictKind k) {
  switch (k) {
  case VerdictKind::Sat:
    return "SAT";
  case VerdictKind::Unsat:
    return "UNSAT";
  case VerdictKind::NoneFound:
    return "NONE_FOUND";
  case VerdictKind::Timeout:
    return "TIMEOUT";
  }
  throw Error("unknown verdict kind");
}

EngineKind engine_kind_from_string(const std::string &s) {
  if (s == "explicit")
    return EngineKind::Explicit;
  if (s == "reduced")
    return EngineKind::Reduced;
  throw Error("unknown engine \"" + s + "\" (expected explicit or reduced)");
}

void EngineConfig::validate() const {
  if (!(timeout_seconds >= 0.0))
    throw Error("timeout must be non-negative");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error("epsilon must be positive and finite");
  if (!epsilon_absolute && epsilon > 1.0)
    throw Error("relative epsilon is a fraction of the box width; got " +
                std::to_string(epsilon));
  if (grid_step_scalar < 0.0)
    throw Error("grid step must be positive");
  for (Index i = 0; i < grid_step.size(); ++i)
    if (!(grid_step(i) > 0.0))
      throw Error("grid step must be positive at node " + std::to_string(i));
  if (max_counterexamples < 0)
    throw Error("max counterexamples must be non-negative");
}

int Verdict::exit_code() const {
  switch (kind) {
  case VerdictKind::Sat:
    return 1;
  case VerdictKind::Timeout:
    return 2;
  case VerdictKind::Unsat:
  case VerdictKind::NoneFound:
    return 0;
  }
  return 3;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Budget {
  Clock::time_point start;
  Clock::time_point deadline;
  const std::atomic<bool> *cancel;

  Budget(double seconds, const std::atomic<bool> *cancel_flag)
      : start(Clock::now()),
        deadline(start + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double>(seconds))),
        cancel(cancel_flag) {}

  bool expired() const {
    if (cancel && cancel->load(std::memory_order_relaxed))
      return true;
    return Clock::now() >= deadline;
  }
  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
};

Vector grid_steps(const Box &box, const EngineConfig &cfg) {
  if (cfg.grid_step.size() > 0) {
    if (cfg.grid_step.size() != box.dim())
      throw Error("grid step has " + std::to_string(cfg.grid_step.size()) +
                  " entries for " + std::to_string(box.dim()) +
                  " input nodes");
    return cfg.grid_step;
  }
  Vector steps(box.dim());
  for (Index i = 0; i < box.dim(); ++i)
    steps(i) = cfg.grid_step_scalar > 0.0
                   ? cfg.grid_step_scalar
                   : (box.upper(i) - box.lower(i)) / 20.0;
  return steps;
}

struct Evaluation {
  bool violated = false;
  int cls = -1;
  Vector scores;
};

Evaluation evaluate_point(const Network &net, const Property &prop,
                          const Vector &x) {
  Evaluation e;
  e.scores = forward(net, x);
  if (const auto *r = std::get_if<RobustnessProperty>(&prop)) {
    e.cls = decide(net, e.scores);
    e.violated = e.cls != r->expected_class;
  } else {
    const auto &s = std::get<SafetyProperty>(prop);
    e.violated = !s.constraint.eval(e.scores);
    if (net.convention != OutputConvention::Raw)
      e.cls = decide(net, e.scores);
  }
  return e;
}

Counterexample make_witness(const Property &prop, const Vector &x,
                            const Evaluation &e) {
  Counterexample ce;
  ce.input = x;
  ce.observed_class = e.cls;
  ce.scores = e.scores;
  ce.property_id = property_name(prop);
  ce.timestamp = iso_timestamp();
  if (const auto *r = std::get_if<RobustnessProperty>(&prop))
    ce.noise = x - r->seed;
  return ce;
}

/// Every Sat return passes through here: the witness must reproduce the
/// violation on a fresh forward pass, or the engine has a bug.
void assert_witness(const Network &net, const Property &prop,
                    const Counterexample &ce) {
  const Vector scores = forward(net, ce.input);
  bool violated;
  if (const auto *r = std::get_if<RobustnessProperty>(&prop))
    violated = decide(net, scores) != r->expected_class;
  else
    violated = !std::get<SafetyProperty>(prop).constraint.eval(scores);
  if (!violated)
    throw std::logic_error(
        "internal error: SAT witness failed re-validation");
}

/// True when interval bounds prove the decision is `expected` everywhere in
/// the box, honouring lowest-index tie-breaking.
bool provably_expected(const Network &net, const Box &out, int expected) {
  const Index e = expected;
  if (e < 0 || e >= out.dim())
    throw Error("expected class out of range");
  for (Index j = 0; j < out.dim(); ++j) {
    if (j == e)
      continue;
    if (net.convention == OutputConvention::Argmax) {
      if (j < e ? !(out.upper(j) < out.lower(e))
                : !(out.upper(j) <= out.lower(e)))
        return false;
    } else {
      if (j < e ? !(out.lower(j) > out.upper(e))
                : !(out.lower(j) >= out.upper(e)))
        return false;
    }
  }
  return true;
}

bool provably_holds(const Network &net, const Property &prop, const Box &out) {
  if (const auto *r = std::get_if<RobustnessProperty>(&prop))
    return provably_expected(net, out, r->expected_class);
  return std::get<SafetyProperty>(prop).constraint.eval_interval(out) == 1;
}

Box bounded_search_box(const Property &prop) {
  Box box = search_box(prop);
  if (!box.finite())
    throw Error("the property's search box is unbounded; open-ended safety "
                "bounds need a network with a declared input domain");
  return box;
}

} // namespace

Verdict verify_explicit(const Network &net, const Property &prop,
                        const EngineConfig &cfg,
                        const std::atomic<bool> *cancel) {
  cfg.validate();
  const Box box = bounded_search_box(prop);
  const SampleGrid grid = make_grid(box, grid_steps(box, cfg));
  const auto *robust = std::get_if<RobustnessProperty>(&prop);

  Budget budget(cfg.timeout_seconds, cancel);
  Verdict v;
  for (long long flat = 0; flat < grid.total; ++flat) {
    if ((flat & 63) == 0 && budget.expired()) {
      v.kind = VerdictKind::Timeout;
      v.stats.wall_seconds = budget.elapsed();
      return v;
    }
    const Vector x = grid.point(flat);
    if (robust && !robust->excluded.empty() &&
        robust->is_excluded_exact(x - robust->seed))
      continue;
    const Evaluation e = evaluate_point(net, prop, x);
    ++v.stats.points_evaluated;
    if (e.violated) {
      v.kind = VerdictKind::Sat;
      v.witness = make_witness(prop, x, e);
      assert_witness(net, prop, *v.witness);
      v.stats.wall_seconds = budget.elapsed();
      return v;
    }
  }
  v.kind = VerdictKind::Unsat;
  v.stats.wall_seconds = budget.elapsed();
  return v;
}

Verdict verify_reduced(const Network &net, const Property &prop,
                       const EngineConfig &cfg,
                       const std::atomic<bool> *cancel) {
  cfg.validate();
  const Box box0 = bounded_search_box(prop);
  const Vector w0 = box0.width();
  Vector eps(box0.dim());
  for (Index i = 0; i < box0.dim(); ++i)
    eps(i) = cfg.epsilon_absolute ? cfg.epsilon : cfg.epsilon * w0(i);
  const auto *robust = std::get_if<RobustnessProperty>(&prop);

  Budget budget(cfg.timeout_seconds, cancel);
  Verdict v;
  std::vector<Box> worklist;
  worklist.push_back(box0);

  while (!worklist.empty()) {
    if (budget.expired()) {
      v.kind = VerdictKind::Timeout;
      v.stats.wall_seconds = budget.elapsed();
      return v;
    }
    Box b = std::move(worklist.back());
    worklist.pop_back();

    if (provably_holds(net, prop, forward_interval(net, b)))
      continue;

    const Vector c = b.center();
    const Evaluation e = evaluate_point(net, prop, c);
    ++v.stats.points_evaluated;
    if (e.violated) {
      const bool excluded =
          robust && !robust->excluded.empty() &&
          robust->is_excluded_within(c - robust->seed, eps);
      if (!excluded) {
        v.kind = VerdictKind::Sat;
        v.witness = make_witness(prop, c, e);
        assert_witness(net, prop, *v.witness);
        v.stats.wall_seconds = budget.elapsed();
        return v;
      }
    }

    // Split the widest dimension relative to the original box; boxes at the
    // epsilon floor stay undecided.
    Index split_dim = -1;
    double widest = 0.0;
    for (Index i = 0; i < b.dim(); ++i) {
      if (b.degenerate(i) || b.upper(i) - b.lower(i) <= eps(i))
        continue;
      const double rel = (b.upper(i) - b.lower(i)) / w0(i);
      if (rel > widest) {
        widest = rel;
        split_dim = i;
      }
    }
    bool can_split = split_dim >= 0;
    double mid = 0.0;
    if (can_split) {
      mid = c(split_dim);
      // Guard against boxes too tight to bisect in floating point.
      can_split = mid > b.lower(split_dim) && mid < b.upper(split_dim);
    }
    if (!can_split) {
      v.stats.undecided_volume += b.volume_fraction_of(box0);
      continue;
    }
    Box high = b;
    high.lower(split_dim) = mid;
    Box low = std::move(b);
    low.upper(split_dim) = mid;
    worklist.push_back(std::move(high));
    worklist.push_back(std::move(low)); // processed first: low side leads
    ++v.stats.boxes_split;
  }

  v.kind = v.stats.undecided_volume == 0.0 ? VerdictKind::Unsat
                                           : VerdictKind::NoneFound;
  v.stats.wall_seconds = budget.elapsed();
  return v;
}

Verdict verify(const Network &net, const Property &prop, EngineKind engine,
               const EngineConfig &cfg, const std::atomic<bool> *cancel) {
  return engine == EngineKind::Explicit
             ? verify_explicit(net, prop, cfg, cancel)
             : verify_reduced(net, prop, cfg, cancel);
}

ToleranceResult noise_tolerance(const Network &net, const Vector &seed,
                                const std::vector<double> &schedule,
                                EngineKind engine, const EngineConfig &cfg,
                                const std::vector<bool> &noisy_mask) {
  if (schedule.empty())
    throw Error("noise schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0))
      throw Error("noise levels must be positive");
    if (i > 0 && !(schedule[i] < schedule[i - 1]))
      throw Error("noise schedule must be strictly decreasing");
  }
  ToleranceResult res;
  for (double pct : schedule) {
    NoiseSpec spec;
    spec.percent = pct;
    spec.noisy_mask = noisy_mask;
    const RobustnessProperty prop =
        RobustnessProperty::around(net, seed, spec);
    ToleranceLevel level;
    level.percent = pct;
    level.verdict = verify(net, prop, engine, cfg);
    const VerdictKind kind = level.verdict.kind;
    res.levels.push_back(std::move(level));
    if (kind == VerdictKind::Unsat) {
      res.tolerance_percent = pct;
      break;
    }
  }
  return res;
}

CEDatabase collect_counterexamples(const Network &net,
                                   const RobustnessProperty &prop,
                                   EngineKind engine, const EngineConfig &cfg) {
  cfg.validate();
  CEDatabase db;
  db.seeds.push_back(prop.seed);
  db.net_hash = network_hash(net);
  db.property_hash = property_hash(prop);
  db.engine = to_string(engine);
  db.created_at = iso_timestamp();

  Budget budget(cfg.timeout_seconds, nullptr);
  RobustnessProperty cur = prop;
  while (static_cast<long long>(db.records.size()) <
         cfg.max_counterexamples) {
    const double remaining =
        cfg.timeout_seconds - budget.elapsed();
    if (remaining <= 0.0)
      break;
    EngineConfig step_cfg = cfg;
    step_cfg.timeout_seconds = remaining;
    const Verdict v = verify(net, cur, engine, step_cfg);
    if (v.kind != VerdictKind::Sat)
      break;
    const Counterexample &w = *v.witness;
    CERecord rec;
    rec.seed_id = 0;
    rec.true_class = cur.expected_class;
    rec.observed_class = w.observed_class;
    rec.noise = *w.noise;
    rec.noise_percent = cur.noise.percent;
    db.records.push_back(std::move(rec));
    cur = exclude(std::move(cur), {w});
  }
  db.validate_against(net);
  return db;
}

} // namespace relucheck
