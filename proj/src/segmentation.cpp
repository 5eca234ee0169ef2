#include "relucheck/segmentation.hpp"

#include "relucheck/kripke.hpp"
#include "relucheck/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace relucheck {

BinTable make_bins(const Box &domain, const std::vector<int> &bins_per_node) {
  if (bins_per_node.size() != static_cast<std::size_t>(domain.dim()))
    throw Error("bin counts given for " + std::to_string(bins_per_node.size()) +
                " nodes, domain has " + std::to_string(domain.dim()));
  BinTable table;
  for (Index i = 0; i < domain.dim(); ++i) {
    const int x = bins_per_node[static_cast<std::size_t>(i)];
    if (x < 1)
      throw Error("node " + std::to_string(i) +
                  " needs at least one bin");
    if (domain.degenerate(i) && x != 1)
      throw Error("node " + std::to_string(i) +
                  " is pinned; it cannot be split into " + std::to_string(x) +
                  " bins");
    const double lo = domain.lower(i);
    const double span = domain.upper(i) - domain.lower(i);
    std::vector<std::pair<double, double>> node_bins;
    for (int j = 0; j < x; ++j) {
      const double a = span / x * j + lo;
      const double b = j + 1 == x ? domain.upper(i) : span / x * (j + 1) + lo;
      node_bins.emplace_back(a, b);
    }
    table.bins.push_back(std::move(node_bins));
  }
  return table;
}

void SegmentationPlan::validate(Index dim) const {
  if (bins_per_node.size() != static_cast<std::size_t>(dim))
    throw Error("plan has bin counts for " +
                std::to_string(bins_per_node.size()) + " nodes, domain has " +
                std::to_string(dim));
  for (std::size_t i = 0; i < bins_per_node.size(); ++i)
    if (bins_per_node[i] < 1)
      throw Error("plan: node " + std::to_string(i) +
                  " needs at least one bin");
  for (std::size_t s = 0; s < variable_sets.size(); ++s) {
    const auto &set = variable_sets[s];
    if (set.empty())
      throw Error("plan: variable set " + std::to_string(s) + " is empty");
    std::vector<int> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] < 0 || sorted[i] >= dim)
        throw Error("plan: variable set " + std::to_string(s) +
                    " refers to node " + std::to_string(sorted[i]) +
                    " outside the domain");
      if (i > 0 && sorted[i] == sorted[i - 1])
        throw Error("plan: variable set " + std::to_string(s) +
                    " lists node " + std::to_string(sorted[i]) + " twice");
    }
  }
  if (samples_per_bin < 1)
    throw Error("plan: samples per bin must be at least 1");
}

namespace {

std::vector<std::vector<int>> effective_sets(const SegmentationPlan &plan,
                                             Index dim) {
  if (!plan.variable_sets.empty())
    return plan.variable_sets;
  std::vector<std::vector<int>> sets;
  for (Index i = 0; i < dim; ++i)
    sets.push_back({static_cast<int>(i)});
  return sets;
}

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t set_idx,
                          std::uint64_t combo, std::uint64_t rep) {
  std::uint64_t st = base;
  splitmix64(st);
  st ^= set_idx;
  splitmix64(st);
  st ^= combo;
  splitmix64(st);
  st ^= rep;
  splitmix64(st);
  return st;
}

} // namespace

std::vector<SubProblem> ris_subproblems(const Box &domain,
                                        const SegmentationPlan &plan) {
  plan.validate(domain.dim());
  const BinTable table = make_bins(domain, plan.bins_per_node);
  const auto sets = effective_sets(plan, domain.dim());

  std::vector<SubProblem> subs;
  long long index = 0;
  for (std::size_t set_idx = 0; set_idx < sets.size(); ++set_idx) {
    std::vector<int> variable = sets[set_idx];
    std::sort(variable.begin(), variable.end());
    std::vector<int> fixed;
    for (Index i = 0; i < domain.dim(); ++i)
      if (!std::binary_search(variable.begin(), variable.end(),
                              static_cast<int>(i)))
        fixed.push_back(static_cast<int>(i));

    long long combos = 1;
    for (int node : fixed)
      combos *= plan.bins_per_node[static_cast<std::size_t>(node)];

    for (long long combo = 0; combo < combos; ++combo) {
      // Decompose with the first fixed node as the slowest digit.
      std::vector<int> bin_of(fixed.size());
      long long rest = combo;
      for (std::size_t f = fixed.size(); f-- > 0;) {
        const int x = plan.bins_per_node[static_cast<std::size_t>(fixed[f])];
        bin_of[f] = static_cast<int>(rest % x);
        rest /= x;
      }
      for (int rep = 0; rep < plan.samples_per_bin; ++rep) {
        std::uint64_t st = stream_seed(plan.rng_seed, set_idx,
                                       static_cast<std::uint64_t>(combo),
                                       static_cast<std::uint64_t>(rep));
        SubProblem sub;
        sub.variable = variable;
        sub.index = index++;
        Vector lo = domain.lower;
        Vector hi = domain.upper;
        for (std::size_t f = 0; f < fixed.size(); ++f) {
          const auto &bin =
              table.bins[static_cast<std::size_t>(fixed[f])]
                        [static_cast<std::size_t>(bin_of[f])];
          const double u = unit_double(splitmix64(st));
          const double pin = bin.first + (bin.second - bin.first) * u;
          lo(fixed[f]) = pin;
          hi(fixed[f]) = pin;
        }
        sub.domain = Box(std::move(lo), std::move(hi));
        subs.push_back(std::move(sub));
      }
    }
  }
  return subs;
}

long long ris_subproblem_count(const Box &domain,
                               const SegmentationPlan &plan) {
  plan.validate(domain.dim());
  const auto sets = effective_sets(plan, domain.dim());
  long long total = 0;
  for (const auto &set : sets) {
    std::vector<int> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    long long combos = 1;
    for (Index i = 0; i < domain.dim(); ++i)
      if (!std::binary_search(sorted.begin(), sorted.end(),
                              static_cast<int>(i)))
        combos *= plan.bins_per_node[static_cast<std::size_t>(i)];
    total += combos * plan.samples_per_bin;
  }
  return total;
}

VerdictKind aggregate_verdicts(const std::vector<VerdictKind> &kinds) {
  bool timeout = false;
  bool any = false;
  for (VerdictKind k : kinds) {
    any = true;
    if (k == VerdictKind::Sat)
      return VerdictKind::Sat;
    if (k == VerdictKind::Timeout)
      timeout = true;
  }
  if (!any)
    throw Error("no verdicts to aggregate");
  return timeout ? VerdictKind::Timeout : VerdictKind::NoneFound;
}

Verdict coarse_grid_verify(const Network &net, const SafetyProperty &prop,
                           const Vector &steps, const EngineConfig &cfg,
                           const std::atomic<bool> *cancel) {
  cfg.validate();
  if (!prop.input_box.finite())
    throw Error("coarse sampling needs a bounded input box");
  const SampleGrid grid = make_grid(prop.input_box, steps);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<double>(cfg.timeout_seconds));
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  Verdict v;
  for (long long flat = 0; flat < grid.total; ++flat) {
    if ((flat & 63) == 0 &&
        ((cancel && cancel->load(std::memory_order_relaxed)) ||
         Clock::now() >= deadline)) {
      v.kind = VerdictKind::Timeout;
      v.stats.wall_seconds = elapsed();
      return v;
    }
    const Vector x = grid.point(flat);
    const Vector scores = forward(net, x);
    ++v.stats.points_evaluated;
    if (!prop.constraint.eval(scores)) {
      Counterexample ce;
      ce.input = x;
      ce.scores = scores;
      if (net.convention != OutputConvention::Raw)
        ce.observed_class = decide(net, scores);
      ce.property_id = prop.name.empty() ? "safety" : prop.name;
      ce.timestamp = iso_timestamp();
      if (prop.constraint.eval(forward(net, ce.input)))
        throw std::logic_error(
            "internal error: SAT witness failed re-validation");
      v.kind = VerdictKind::Sat;
      v.witness = std::move(ce);
      v.stats.wall_seconds = elapsed();
      return v;
    }
  }
  // Sampling cannot prove the box safe, so completion is NoneFound.
  v.kind = VerdictKind::NoneFound;
  v.stats.wall_seconds = elapsed();
  return v;
}

namespace {

struct SubResult {
  Verdict verdict;
  bool completed = false; // ran to its own verdict, not cancelled
};

} // namespace

Verdict ris_verify(const Network &net, const SafetyProperty &prop,
                   const SegmentationPlan &plan, EngineKind engine,
                   const EngineConfig &cfg, int workers,
                   const std::atomic<bool> *cancel) {
  cfg.validate();
  if (workers < 1)
    throw Error("worker count must be at least 1");
  const auto subs = ris_subproblems(prop.input_box, plan);
  const long long total = static_cast<long long>(subs.size());

  auto sub_property = [&](const SubProblem &sub) {
    SafetyProperty p = prop;
    p.input_box = sub.domain;
    return p;
  };

  std::vector<SubResult> results(subs.size());
  std::atomic<bool> stop(false);
  std::atomic<long long> first_sat(total); // lowest sub-problem index with Sat

  auto run_one = [&](long long i, const std::atomic<bool> *flag) {
    const Property p = sub_property(subs[static_cast<std::size_t>(i)]);
    results[static_cast<std::size_t>(i)].verdict =
        verify(net, p, engine, cfg, flag);
    const Verdict &v = results[static_cast<std::size_t>(i)].verdict;
    // A Timeout while the stop flag is set counts as cancelled, not as a
    // real budget exhaustion.
    const bool cancelled =
        v.kind == VerdictKind::Timeout && flag &&
        flag->load(std::memory_order_relaxed);
    results[static_cast<std::size_t>(i)].completed = !cancelled;
    if (v.kind == VerdictKind::Sat) {
      long long expect = first_sat.load();
      while (i < expect && !first_sat.compare_exchange_weak(expect, i)) {
      }
      stop.store(true, std::memory_order_relaxed);
    }
  };

  if (workers == 1) {
    for (long long i = 0; i < total; ++i) {
      if (cancel && cancel->load(std::memory_order_relaxed))
        break;
      run_one(i, cancel);
      if (results[static_cast<std::size_t>(i)].verdict.kind ==
          VerdictKind::Sat)
        break;
    }
  } else {
    std::atomic<long long> next(0);
    auto pool_stop = [&]() {
      return stop.load(std::memory_order_relaxed) ||
             (cancel && cancel->load(std::memory_order_relaxed));
    };
    // Workers poll the shared stop flag between sub-problems, and engines
    // poll it between box pops / grid batches via the cancel pointer.
    std::vector<std::thread> pool;
    std::atomic<bool> combined(false);
    std::thread monitor([&] {
      while (!combined.load(std::memory_order_relaxed)) {
        if (pool_stop())
          combined.store(true, std::memory_order_relaxed);
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
    });
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          if (pool_stop())
            return;
          const long long i = next.fetch_add(1);
          if (i >= total)
            return;
          run_one(i, &combined);
        }
      });
    }
    for (auto &t : pool)
      t.join();
    combined.store(true, std::memory_order_relaxed);
    monitor.join();

    // Deterministic witness: any unfinished sub-problem below the first Sat
    // could still hold an earlier one; settle them in order.
    if (!(cancel && cancel->load(std::memory_order_relaxed))) {
      for (long long i = 0; i < first_sat.load(); ++i) {
        if (results[static_cast<std::size_t>(i)].completed)
          continue;
        run_one(i, nullptr);
        if (results[static_cast<std::size_t>(i)].verdict.kind ==
            VerdictKind::Sat)
          break;
      }
    }
  }

  Verdict out;
  bool saw_timeout = false;
  long long sat_at = -1;
  for (long long i = 0; i < total; ++i) {
    const auto &r = results[static_cast<std::size_t>(i)];
    if (!r.completed)
      continue;
    ++out.stats.subproblems;
    out.stats.points_evaluated += r.verdict.stats.points_evaluated;
    out.stats.boxes_split += r.verdict.stats.boxes_split;
    if (r.verdict.kind == VerdictKind::Sat && sat_at < 0)
      sat_at = i;
    if (r.verdict.kind == VerdictKind::Timeout)
      saw_timeout = true;
  }
  if (sat_at >= 0) {
    out.kind = VerdictKind::Sat;
    out.witness = results[static_cast<std::size_t>(sat_at)].verdict.witness;
    if (prop.constraint.eval(forward(net, out.witness->input)))
      throw std::logic_error("internal error: SAT witness failed re-validation");
  } else if (cancel && cancel->load(std::memory_order_relaxed)) {
    out.kind = VerdictKind::Timeout;
  } else if (saw_timeout || out.stats.subproblems < total) {
    // A sub-problem that never completed (external interruption) reads as
    // a timeout; sampling never proves absence, so no Unsat here.
    out.kind = VerdictKind::Timeout;
  } else {
    out.kind = VerdictKind::NoneFound;
  }
  return out;
}

namespace {

/// Unsigned big integer, little-endian base 2^32. Only what the optimality
/// predicate needs: multiply, exact small division, compare.
struct BigNat {
  std::vector<std::uint32_t> limb;

  static BigNat from_u64(std::uint64_t v) {
    BigNat n;
    while (v) {
      n.limb.push_back(static_cast<std::uint32_t>(v & 0xffffffffull));
      v >>= 32;
    }
    return n;
  }

  void trim() {
    while (!limb.empty() && limb.back() == 0)
      limb.pop_back();
  }

  void mul_u32(std::uint32_t m) {
    std::uint64_t carry = 0;
    for (auto &l : limb) {
      const std::uint64_t p = static_cast<std::uint64_t>(l) * m + carry;
      l = static_cast<std::uint32_t>(p & 0xffffffffull);
      carry = p >> 32;
    }
    while (carry) {
      limb.push_back(static_cast<std::uint32_t>(carry & 0xffffffffull));
      carry >>= 32;
    }
    trim();
  }

  /// Exact division; throws if a remainder is left.
  void div_u32_exact(std::uint32_t d) {
    std::uint64_t rem = 0;
    for (std::size_t i = limb.size(); i-- > 0;) {
      const std::uint64_t cur = (rem << 32) | limb[i];
      limb[i] = static_cast<std::uint32_t>(cur / d);
      rem = cur % d;
    }
    if (rem != 0)
      throw std::logic_error("internal error: inexact big-integer division");
    trim();
  }

  void mul(const BigNat &other) {
    std::vector<std::uint64_t> acc(limb.size() + other.limb.size(), 0);
    for (std::size_t i = 0; i < limb.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < other.limb.size(); ++j) {
        const std::uint64_t p =
            static_cast<std::uint64_t>(limb[i]) * other.limb[j] + carry;
        acc[i + j] += p & 0xffffffffull;
        carry = (p >> 32) + (acc[i + j] >> 32);
        acc[i + j] &= 0xffffffffull;
      }
      std::size_t k = i + other.limb.size();
      while (carry) {
        acc[k] += carry & 0xffffffffull;
        carry = (carry >> 32) + (acc[k] >> 32);
        acc[k] &= 0xffffffffull;
        ++k;
      }
    }
    limb.assign(acc.size(), 0);
    for (std::size_t i = 0; i < acc.size(); ++i)
      limb[i] = static_cast<std::uint32_t>(acc[i]);
    trim();
  }

  int compare(const BigNat &other) const {
    if (limb.size() != other.limb.size())
      return limb.size() < other.limb.size() ? -1 : 1;
    for (std::size_t i = limb.size(); i-- > 0;) {
      if (limb[i] != other.limb[i])
        return limb[i] < other.limb[i] ? -1 : 1;
    }
    return 0;
  }

  std::size_t bits() const {
    if (limb.empty())
      return 0;
    std::size_t b = (limb.size() - 1) * 32;
    std::uint32_t top = limb.back();
    while (top) {
      ++b;
      top >>= 1;
    }
    return b;
  }
};

BigNat pow_big(long long base, long long exp) {
  BigNat r = BigNat::from_u64(1);
  const BigNat b = BigNat::from_u64(static_cast<std::uint64_t>(base));
  for (long long i = 0; i < exp; ++i) {
    r.mul(b);
    if (r.bits() > 4'000'000)
      throw Error("optimality operands too large");
  }
  return r;
}

BigNat binomial_big(long long n, long long k) {
  // C(n, k) = prod_{j=1..k} (n - k + j) / j, each division exact.
  BigNat r = BigNat::from_u64(1);
  for (long long j = 1; j <= k; ++j) {
    r.mul_u32(static_cast<std::uint32_t>(n - k + j));
    r.div_u32_exact(static_cast<std::uint32_t>(j));
  }
  return r;
}

} // namespace

bool ris_optimality(long long total_nodes, long long variable_nodes,
                    long long fixed_nodes, long long noise_options) {
  if (total_nodes < 1 || variable_nodes < 1 || fixed_nodes < 0 ||
      noise_options < 1)
    throw Error("optimality check needs positive node/option counts "
                "(fixed nodes may be zero)");
  if (variable_nodes + fixed_nodes != total_nodes)
    throw Error("variable and fixed nodes must partition the input nodes");
  if (total_nodes > 0xffffffffll)
    throw Error("optimality operands too large");

  // Segmenting wins when I^n > M^n * I! / (M! M'!), in exact arithmetic.
  const BigNat lhs = pow_big(total_nodes, noise_options);
  BigNat rhs = pow_big(variable_nodes, noise_options);
  rhs.mul(binomial_big(total_nodes, variable_nodes));
  return lhs.compare(rhs) > 0;
}

SegmentationPlan parse_plan(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("bins_per_node") ||
      !j["bins_per_node"].is_array())
    throw Error("plan file: expected an object with a \"bins_per_node\" array");
  SegmentationPlan plan;
  for (std::size_t i = 0; i < j["bins_per_node"].size(); ++i) {
    if (!j["bins_per_node"][i].is_number_integer())
      throw Error("bins_per_node[" + std::to_string(i) +
                  "]: expected an integer");
    plan.bins_per_node.push_back(j["bins_per_node"][i].get<int>());
  }
  if (j.contains("variable_sets")) {
    if (!j["variable_sets"].is_array())
      throw Error("variable_sets: expected an array of node-index arrays");
    for (std::size_t s = 0; s < j["variable_sets"].size(); ++s) {
      if (!j["variable_sets"][s].is_array())
        throw Error("variable_sets[" + std::to_string(s) +
                    "]: expected an array of node indices");
      std::vector<int> set;
      for (std::size_t i = 0; i < j["variable_sets"][s].size(); ++i) {
        if (!j["variable_sets"][s][i].is_number_integer())
          throw Error("variable_sets[" + std::to_string(s) + "][" +
                      std::to_string(i) + "]: expected an integer");
        set.push_back(j["variable_sets"][s][i].get<int>());
      }
      plan.variable_sets.push_back(std::move(set));
    }
  }
  if (j.contains("rng_seed")) {
    if (!j["rng_seed"].is_number_unsigned() &&
        !j["rng_seed"].is_number_integer())
      throw Error("rng_seed: expected an integer");
    plan.rng_seed = j["rng_seed"].get<std::uint64_t>();
  }
  if (j.contains("samples_per_bin")) {
    if (!j["samples_per_bin"].is_number_integer())
      throw Error("samples_per_bin: expected an integer");
    plan.samples_per_bin = j["samples_per_bin"].get<int>();
  }
  return plan;
}

std::string serialize_plan(const SegmentationPlan &plan) {
  nlohmann::ordered_json j;
  j["bins_per_node"] = plan.bins_per_node;
  if (!plan.variable_sets.empty())
    j["variable_sets"] = plan.variable_sets;
  j["rng_seed"] = plan.rng_seed;
  j["samples_per_bin"] = plan.samples_per_bin;
  return j.dump(2) + "\n";
}

} // namespace relucheck
