#include "relucheck/property.hpp"

#include "relucheck/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace relucheck {

bool NoiseSpec::node_noisy(Index i) const {
  if (noisy_mask.empty())
    return true;
  return noisy_mask[static_cast<std::size_t>(i)];
}

void NoiseSpec::validate(Index dim) const {
  if (percent < 0.0 || !std::isfinite(percent))
    throw Error("noise percent must be finite and non-negative");
  if (!noisy_mask.empty() && noisy_mask.size() != static_cast<std::size_t>(dim))
    throw Error("noise mask has " + std::to_string(noisy_mask.size()) +
                " entries for " + std::to_string(dim) + " input nodes");
}

Box noise_box(const Vector &seed, const NoiseSpec &spec) {
  spec.validate(seed.size());
  Vector lo(seed.size()), hi(seed.size());
  for (Index i = 0; i < seed.size(); ++i) {
    // Noise scales with the node's magnitude, so a zero-valued node stays
    // pinned even when the mask marks it noisy.
    const double delta = spec.node_noisy(i)
                             ? std::abs(seed(i)) * (spec.percent / 100.0)
                             : 0.0;
    lo(i) = seed(i) - delta;
    hi(i) = seed(i) + delta;
  }
  return Box(lo, hi);
}

RobustnessProperty RobustnessProperty::around(const Network &net,
                                              const Vector &seed,
                                              NoiseSpec spec) {
  if (seed.size() != net.input_size())
    throw Error("seed has " + std::to_string(seed.size()) +
                " nodes, network expects " +
                std::to_string(net.input_size()));
  spec.validate(seed.size());
  RobustnessProperty p;
  p.seed = seed;
  p.noise = std::move(spec);
  p.expected_class = classify(net, seed);
  return p;
}

bool RobustnessProperty::is_excluded_exact(const Vector &noise_vec) const {
  for (const auto &e : excluded) {
    if (e.size() != noise_vec.size())
      continue;
    bool same = true;
    for (Index i = 0; i < e.size() && same; ++i)
      same = e(i) == noise_vec(i);
    if (same)
      return true;
  }
  return false;
}

bool RobustnessProperty::is_excluded_within(const Vector &noise_vec,
                                            const Vector &radius) const {
  for (const auto &e : excluded) {
    if (e.size() != noise_vec.size())
      continue;
    bool inside = true;
    for (Index i = 0; i < e.size() && inside; ++i)
      inside = std::abs(noise_vec(i) - e(i)) <= radius(i);
    if (inside)
      return true;
  }
  return false;
}

bool holds_robust(const Network &net, const RobustnessProperty &prop,
                  const Vector &x) {
  return classify(net, x) == prop.expected_class;
}

RobustnessProperty exclude(RobustnessProperty prop,
                           const std::vector<Counterexample> &ces) {
  for (const auto &ce : ces) {
    if (!ce.noise)
      throw Error("cannot exclude a counterexample without a noise vector");
    prop.excluded.push_back(*ce.noise);
  }
  return prop;
}

OutputConstraint OutputConstraint::out_less(int i, int j) {
  OutputConstraint c;
  c.kind = Kind::OutLess;
  c.lhs = i;
  c.rhs = j;
  return c;
}

OutputConstraint OutputConstraint::out_greater(int i, int j) {
  OutputConstraint c;
  c.kind = Kind::OutGreater;
  c.lhs = i;
  c.rhs = j;
  return c;
}

OutputConstraint OutputConstraint::at_most(int i, double bound) {
  OutputConstraint c;
  c.kind = Kind::AtMost;
  c.lhs = i;
  c.bound = bound;
  return c;
}

OutputConstraint OutputConstraint::at_least(int i, double bound) {
  OutputConstraint c;
  c.kind = Kind::AtLeast;
  c.lhs = i;
  c.bound = bound;
  return c;
}

OutputConstraint OutputConstraint::all_of(std::vector<OutputConstraint> cs) {
  OutputConstraint c;
  c.kind = Kind::AllOf;
  c.children = std::move(cs);
  return c;
}

OutputConstraint OutputConstraint::any_of(std::vector<OutputConstraint> cs) {
  OutputConstraint c;
  c.kind = Kind::AnyOf;
  c.children = std::move(cs);
  return c;
}

namespace {

double score_at(const Vector &scores, int idx) {
  if (idx < 0 || idx >= scores.size())
    throw Error("constraint refers to output " + std::to_string(idx) +
                " but the score vector has " + std::to_string(scores.size()) +
                " entries");
  return scores(idx);
}

} // namespace

bool OutputConstraint::eval(const Vector &scores) const {
  switch (kind) {
  case Kind::OutLess:
    return score_at(scores, lhs) < score_at(scores, rhs);
  case Kind::OutGreater:
    return score_at(scores, lhs) > score_at(scores, rhs);
  case Kind::AtMost:
    return score_at(scores, lhs) <= bound;
  case Kind::AtLeast:
    return score_at(scores, lhs) >= bound;
  case Kind::AllOf:
    for (const auto &c : children)
      if (!c.eval(scores))
        return false;
    return true;
  case Kind::AnyOf:
    for (const auto &c : children)
      if (c.eval(scores))
        return true;
    return false;
  }
  throw Error("unknown constraint kind");
}

int OutputConstraint::eval_interval(const Box &scores) const {
  switch (kind) {
  case Kind::OutLess: {
    const double lo_l = score_at(scores.lower, lhs);
    const double hi_l = score_at(scores.upper, lhs);
    const double lo_r = score_at(scores.lower, rhs);
    const double hi_r = score_at(scores.upper, rhs);
    if (hi_l < lo_r)
      return 1;
    if (lo_l >= hi_r)
      return -1;
    return 0;
  }
  case Kind::OutGreater: {
    const double lo_l = score_at(scores.lower, lhs);
    const double hi_l = score_at(scores.upper, lhs);
    const double lo_r = score_at(scores.lower, rhs);
    const double hi_r = score_at(scores.upper, rhs);
    if (lo_l > hi_r)
      return 1;
    if (hi_l <= lo_r)
      return -1;
    return 0;
  }
  case Kind::AtMost: {
    if (score_at(scores.upper, lhs) <= bound)
      return 1;
    if (score_at(scores.lower, lhs) > bound)
      return -1;
    return 0;
  }
  case Kind::AtLeast: {
    if (score_at(scores.lower, lhs) >= bound)
      return 1;
    if (score_at(scores.upper, lhs) < bound)
      return -1;
    return 0;
  }
  case Kind::AllOf: {
    bool unknown = false;
    for (const auto &c : children) {
      const int r = c.eval_interval(scores);
      if (r == -1)
        return -1;
      if (r == 0)
        unknown = true;
    }
    return unknown ? 0 : 1;
  }
  case Kind::AnyOf: {
    bool unknown = false;
    for (const auto &c : children) {
      const int r = c.eval_interval(scores);
      if (r == 1)
        return 1;
      if (r == 0)
        unknown = true;
    }
    return unknown ? 0 : -1;
  }
  }
  throw Error("unknown constraint kind");
}

int OutputConstraint::max_output_index() const {
  int m = -1;
  switch (kind) {
  case Kind::OutLess:
  case Kind::OutGreater:
    m = std::max(lhs, rhs);
    break;
  case Kind::AtMost:
  case Kind::AtLeast:
    m = lhs;
    break;
  case Kind::AllOf:
  case Kind::AnyOf:
    for (const auto &c : children)
      m = std::max(m, c.max_output_index());
    break;
  }
  return m;
}

bool holds_safe(const SafetyProperty &prop, const Vector &scores) {
  return prop.constraint.eval(scores);
}

Box search_box(const Property &prop) {
  if (const auto *r = std::get_if<RobustnessProperty>(&prop))
    return r->box();
  return std::get<SafetyProperty>(prop).input_box;
}

std::string property_name(const Property &prop) {
  if (std::holds_alternative<RobustnessProperty>(prop))
    return "robustness";
  const auto &s = std::get<SafetyProperty>(prop);
  return s.name.empty() ? "safety" : s.name;
}

namespace {

/// Intersects [lo, hi] (either side may be unbounded) with the domain.
std::pair<double, double> clamp_to(const Box &domain, Index i, double lo,
                                   double hi) {
  const double l = std::max(lo, domain.lower(i));
  const double h = std::min(hi, domain.upper(i));
  if (l > h)
    throw Error("property bound on input " + std::to_string(i) +
                " is incompatible with the declared domain");
  return {l, h};
}

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

SafetyProperty acas_property(int index, const Box &domain) {
  if (domain.dim() != 5)
    throw Error("collision-avoidance properties need a 5-node input domain");
  Vector lo = domain.lower;
  Vector hi = domain.upper;
  auto set = [&](Index i, double l, double h) {
    auto [cl, ch] = clamp_to(domain, i, l, h);
    lo(i) = cl;
    hi(i) = ch;
  };
  SafetyProperty p;
  p.name = "P" + std::to_string(index);
  switch (index) {
  case 1:
    set(0, 55947.691, kInf);
    set(3, 1145.0, kInf);
    set(4, -kInf, 60.0);
    p.constraint = OutputConstraint::at_most(0, 1500.0);
    break;
  case 2:
    set(0, 55947.691, kInf);
    set(3, 1145.0, kInf);
    set(4, -kInf, 60.0);
    p.constraint = OutputConstraint::any_of(
        {OutputConstraint::out_greater(1, 0), OutputConstraint::out_greater(2, 0),
         OutputConstraint::out_greater(3, 0),
         OutputConstraint::out_greater(4, 0)});
    break;
  case 3:
    set(0, 1500.0, 1800.0);
    set(1, -0.06, 0.06);
    set(2, 3.10, kInf);
    set(3, 980.0, kInf);
    set(4, 960.0, kInf);
    p.constraint = OutputConstraint::any_of(
        {OutputConstraint::out_less(1, 0), OutputConstraint::out_less(2, 0),
         OutputConstraint::out_less(3, 0), OutputConstraint::out_less(4, 0)});
    break;
  case 4:
    set(0, 1500.0, 1800.0);
    set(1, -0.06, 0.06);
    set(2, 0.0, 0.0);
    set(3, 1000.0, kInf);
    set(4, 700.0, 800.0);
    p.constraint = OutputConstraint::any_of(
        {OutputConstraint::out_less(1, 0), OutputConstraint::out_less(2, 0),
         OutputConstraint::out_less(3, 0), OutputConstraint::out_less(4, 0)});
    break;
  default:
    throw Error("unknown property index " + std::to_string(index) +
                " (expected 1..4)");
  }
  p.input_box = Box(lo, hi);
  return p;
}

std::vector<SafetyProperty> acas_properties(const Box &domain) {
  std::vector<SafetyProperty> ps;
  for (int i = 1; i <= 4; ++i)
    ps.push_back(acas_property(i, domain));
  return ps;
}

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Vector json_to_vector(const json &j, const std::string &context) {
  if (!j.is_array())
    throw Error(context + ": expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw Error(context + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

ordered_json vector_to_json(const Vector &v) {
  ordered_json a = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

OutputConstraint constraint_from_json(const json &j, const std::string &ctx) {
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string())
    throw Error(ctx + ": expected an object with a string \"op\"");
  const std::string op = j["op"];
  auto int_field = [&](const char *key) {
    if (!j.contains(key) || !j[key].is_number_integer())
      throw Error(ctx + ": \"" + op + "\" needs an integer \"" + key + "\"");
    return j[key].get<int>();
  };
  auto num_field = [&](const char *key) {
    if (!j.contains(key) || !j[key].is_number())
      throw Error(ctx + ": \"" + op + "\" needs a number \"" + key + "\"");
    return j[key].get<double>();
  };
  if (op == "lt")
    return OutputConstraint::out_less(int_field("lhs"), int_field("rhs"));
  if (op == "gt")
    return OutputConstraint::out_greater(int_field("lhs"), int_field("rhs"));
  if (op == "le")
    return OutputConstraint::at_most(int_field("lhs"), num_field("bound"));
  if (op == "ge")
    return OutputConstraint::at_least(int_field("lhs"), num_field("bound"));
  if (op == "and" || op == "or") {
    if (!j.contains("args") || !j["args"].is_array() || j["args"].empty())
      throw Error(ctx + ": \"" + op + "\" needs a non-empty \"args\" array");
    std::vector<OutputConstraint> cs;
    for (std::size_t i = 0; i < j["args"].size(); ++i)
      cs.push_back(constraint_from_json(j["args"][i],
                                        ctx + ".args[" + std::to_string(i) +
                                            "]"));
    return op == "and" ? OutputConstraint::all_of(std::move(cs))
                       : OutputConstraint::any_of(std::move(cs));
  }
  throw Error(ctx + ": unknown op \"" + op +
              "\" (expected lt, gt, le, ge, and, or)");
}

ordered_json constraint_to_json(const OutputConstraint &c) {
  ordered_json j;
  switch (c.kind) {
  case OutputConstraint::Kind::OutLess:
    j["op"] = "lt";
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    break;
  case OutputConstraint::Kind::OutGreater:
    j["op"] = "gt";
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    break;
  case OutputConstraint::Kind::AtMost:
    j["op"] = "le";
    j["lhs"] = c.lhs;
    j["bound"] = c.bound;
    break;
  case OutputConstraint::Kind::AtLeast:
    j["op"] = "ge";
    j["lhs"] = c.lhs;
    j["bound"] = c.bound;
    break;
  case OutputConstraint::Kind::AllOf:
  case OutputConstraint::Kind::AnyOf:
    j["op"] = c.kind == OutputConstraint::Kind::AllOf ? "and" : "or";
    j["args"] = ordered_json::array();
    for (const auto &ch : c.children)
      j["args"].push_back(constraint_to_json(ch));
    break;
  }
  return j;
}

} // namespace

Property parse_property(const std::string &text, const Network &net) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error("property file: expected an object with a string \"kind\"");
  const std::string kind = j["kind"];

  if (kind == "robustness") {
    if (!j.contains("seed"))
      throw Error("property file: missing \"seed\"");
    RobustnessProperty p;
    p.seed = json_to_vector(j["seed"], "seed");
    if (p.seed.size() != net.input_size())
      throw Error("seed has " + std::to_string(p.seed.size()) +
                  " nodes, network expects " +
                  std::to_string(net.input_size()));
    if (!j.contains("noise_percent") || !j["noise_percent"].is_number())
      throw Error("property file: missing numeric \"noise_percent\"");
    p.noise.percent = j["noise_percent"].get<double>();
    if (j.contains("noisy_mask")) {
      if (!j["noisy_mask"].is_array())
        throw Error("noisy_mask: expected an array of booleans");
      for (std::size_t i = 0; i < j["noisy_mask"].size(); ++i) {
        if (!j["noisy_mask"][i].is_boolean())
          throw Error("noisy_mask[" + std::to_string(i) +
                      "]: expected a boolean");
        p.noise.noisy_mask.push_back(j["noisy_mask"][i].get<bool>());
      }
    }
    p.noise.validate(p.seed.size());
    const int decided = classify(net, p.seed);
    if (j.contains("expected_class")) {
      if (!j["expected_class"].is_number_integer())
        throw Error("expected_class: expected an integer");
      p.expected_class = j["expected_class"].get<int>();
      if (p.expected_class != decided)
        throw Error("expected_class " + std::to_string(p.expected_class) +
                    " disagrees with the network's decision " +
                    std::to_string(decided) + " at the seed");
    } else {
      p.expected_class = decided;
    }
    if (j.contains("excluded")) {
      if (!j["excluded"].is_array())
        throw Error("excluded: expected an array of noise vectors");
      for (std::size_t i = 0; i < j["excluded"].size(); ++i)
        p.excluded.push_back(json_to_vector(
            j["excluded"][i], "excluded[" + std::to_string(i) + "]"));
    }
    return p;
  }

  if (kind == "safety") {
    SafetyProperty p;
    if (j.contains("name")) {
      if (!j["name"].is_string())
        throw Error("name: expected a string");
      p.name = j["name"];
    }
    if (!j.contains("input_lower") || !j.contains("input_upper"))
      throw Error("property file: safety needs \"input_lower\" and "
                  "\"input_upper\"");
    Vector lo = json_to_vector(j["input_lower"], "input_lower");
    Vector hi = json_to_vector(j["input_upper"], "input_upper");
    if (lo.size() != net.input_size())
      throw Error("input_lower has " + std::to_string(lo.size()) +
                  " nodes, network expects " +
                  std::to_string(net.input_size()));
    p.input_box = Box(std::move(lo), std::move(hi));
    if (!j.contains("constraint"))
      throw Error("property file: missing \"constraint\"");
    p.constraint = constraint_from_json(j["constraint"], "constraint");
    const int max_idx = p.constraint.max_output_index();
    if (max_idx >= net.output_size())
      throw Error("constraint refers to output " + std::to_string(max_idx) +
                  " but the network has " + std::to_string(net.output_size()) +
                  " outputs");
    return p;
  }

  throw Error("property file: unknown kind \"" + kind +
              "\" (expected robustness or safety)");
}

std::string serialize_property(const Property &prop) {
  ordered_json j;
  if (const auto *r = std::get_if<RobustnessProperty>(&prop)) {
    j["kind"] = "robustness";
    j["seed"] = vector_to_json(r->seed);
    j["noise_percent"] = r->noise.percent;
    if (!r->noise.noisy_mask.empty()) {
      ordered_json m = ordered_json::array();
      for (bool b : r->noise.noisy_mask)
        m.push_back(b);
      j["noisy_mask"] = std::move(m);
    }
    j["expected_class"] = r->expected_class;
    if (!r->excluded.empty()) {
      ordered_json e = ordered_json::array();
      for (const auto &v : r->excluded)
        e.push_back(vector_to_json(v));
      j["excluded"] = std::move(e);
    }
  } else {
    const auto &s = std::get<SafetyProperty>(prop);
    j["kind"] = "safety";
    if (!s.name.empty())
      j["name"] = s.name;
    j["input_lower"] = vector_to_json(s.input_box.lower);
    j["input_upper"] = vector_to_json(s.input_box.upper);
    j["constraint"] = constraint_to_json(s.constraint);
  }
  return j.dump(2) + "\n";
}

std::string property_hash(const Property &prop) {
  return to_hex(fnv1a64(serialize_property(prop)));
}

} // namespace relucheck
