#include "relucheck/kripke.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace relucheck {

namespace {

constexpr long long kMaxStates = 10'000'000;
constexpr long long kMaxTransitions = 200'000'000;

LabelSet input_label() { return {"input"}; }

LabelSet class_label(int c) { return {"class:" + std::to_string(c)}; }

} // namespace

bool KripkeStructure::has_transition(int from, int to) const {
  return std::binary_search(transitions.begin(), transitions.end(),
                            std::make_pair(from, to));
}

void KripkeStructure::validate() const {
  const int n = state_count();
  if (n == 0)
    throw Error("transition system has no states");
  if (initial.empty())
    throw Error("transition system has no initial state");
  for (int s : initial)
    if (s < 0 || s >= n)
      throw Error("initial state " + std::to_string(s) + " out of range");
  if (!std::is_sorted(transitions.begin(), transitions.end()))
    throw Error("transitions are not sorted");
  if (std::adjacent_find(transitions.begin(), transitions.end()) !=
      transitions.end())
    throw Error("duplicate transition");
  for (const auto &[a, b] : transitions)
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw Error("transition endpoint out of range");
}

std::string KripkeStructure::to_dot() const {
  std::ostringstream out;
  out << "digraph model {\n  rankdir=LR;\n";
  for (int s = 0; s < state_count(); ++s) {
    std::string text;
    for (const auto &l : labels[s]) {
      if (!text.empty())
        text += ",";
      text += l;
    }
    const bool is_initial =
        std::find(initial.begin(), initial.end(), s) != initial.end();
    out << "  s" << s << " [label=\"" << text << "\""
        << (is_initial ? ", shape=doublecircle" : "") << "];\n";
  }
  for (const auto &[a, b] : transitions)
    out << "  s" << a << " -> s" << b << ";\n";
  out << "}\n";
  return out.str();
}

KripkeStructure build_explicit_model(long long noise_options, int class_count) {
  if (noise_options < 1)
    throw Error("need at least one noise option");
  if (class_count < 1)
    throw Error("need at least one class");
  const long long outcomes = noise_options * class_count;
  if (outcomes + 1 > kMaxStates)
    throw Error("explicit model too large to materialize: " +
                std::to_string(outcomes + 1) + " states");
  if (outcomes * (outcomes + 1) > kMaxTransitions)
    throw Error("explicit model too large to materialize: " +
                std::to_string(outcomes * (outcomes + 1)) + " transitions");

  KripkeStructure m;
  m.labels.reserve(static_cast<std::size_t>(outcomes) + 1);
  m.labels.push_back(input_label());
  // One state per (noise option, class) outcome, option-major.
  for (long long i = 0; i < noise_options; ++i)
    for (int c = 0; c < class_count; ++c)
      m.labels.push_back(class_label(c));
  m.initial = {0};

  m.transitions.reserve(static_cast<std::size_t>(outcomes * (outcomes + 1)));
  const int n = static_cast<int>(outcomes);
  for (int s = 1; s <= n; ++s)
    m.transitions.emplace_back(0, s);
  // Every outcome can follow every outcome (self-loops included).
  for (int s = 1; s <= n; ++s)
    for (int t = 1; t <= n; ++t)
      m.transitions.emplace_back(s, t);
  return m;
}

KripkeStructure build_reduced_model(int class_count) {
  if (class_count < 1)
    throw Error("need at least one class");
  KripkeStructure m;
  m.labels.push_back(input_label());
  for (int c = 0; c < class_count; ++c)
    m.labels.push_back(class_label(c));
  m.initial = {0};
  for (int s = 1; s <= class_count; ++s)
    m.transitions.emplace_back(0, s);
  for (int s = 1; s <= class_count; ++s)
    for (int t = 1; t <= class_count; ++t)
      m.transitions.emplace_back(s, t);
  return m;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;

  explicit DisjointSets(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a)
      a = parent[a] = parent[parent[a]];
    return a;
  }
  // Lower id wins so representatives keep the original ordering.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b)
      return false;
    if (a > b)
      std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

/// One merge pass. Returns true (and rewrites `m`) when anything merged.
bool merge_pass(KripkeStructure &m) {
  const int n = m.state_count();

  std::vector<std::vector<int>> parents(n);
  std::vector<std::set<LabelSet>> out_labels(n);
  for (const auto &[a, b] : m.transitions) {
    parents[b].push_back(a);
    out_labels[a].insert(m.labels[b]);
  }
  for (auto &p : parents) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  auto share_parent = [&](int a, int b) {
    const auto &pa = parents[a];
    const auto &pb = parents[b];
    std::size_t i = 0, j = 0;
    while (i < pa.size() && j < pb.size()) {
      if (pa[i] == pb[j])
        return true;
      if (pa[i] < pb[j])
        ++i;
      else
        ++j;
    }
    return false;
  };

  // Candidates must carry identical labels; group states by label set.
  std::map<LabelSet, std::vector<int>> groups;
  for (int s = 0; s < n; ++s)
    groups[m.labels[s]].push_back(s);

  DisjointSets dsu(n);
  bool changed = false;
  for (const auto &[label, members] : groups) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const int a = members[i];
        const int b = members[j];
        const bool adjacent = m.has_transition(a, b) || m.has_transition(b, a);
        const bool siblings =
            share_parent(a, b) && out_labels[a] == out_labels[b];
        if (adjacent || siblings)
          changed |= dsu.unite(a, b);
      }
    }
  }
  if (!changed)
    return false;

  // Rebuild with dense ids in representative order.
  std::vector<int> new_id(n, -1);
  int next = 0;
  for (int s = 0; s < n; ++s)
    if (dsu.find(s) == s)
      new_id[s] = next++;
  for (int s = 0; s < n; ++s)
    new_id[s] = new_id[dsu.find(s)];

  KripkeStructure r;
  r.labels.resize(next);
  for (int s = 0; s < n; ++s)
    r.labels[new_id[s]] = m.labels[s];
  for (int s : m.initial)
    r.initial.push_back(new_id[s]);
  std::sort(r.initial.begin(), r.initial.end());
  r.initial.erase(std::unique(r.initial.begin(), r.initial.end()),
                  r.initial.end());
  r.transitions.reserve(m.transitions.size());
  for (const auto &[a, b] : m.transitions)
    r.transitions.emplace_back(new_id[a], new_id[b]);
  std::sort(r.transitions.begin(), r.transitions.end());
  r.transitions.erase(
      std::unique(r.transitions.begin(), r.transitions.end()),
      r.transitions.end());
  m = std::move(r);
  return true;
}

} // namespace

KripkeStructure merge_equilabeled(const KripkeStructure &m) {
  KripkeStructure cur = m;
  cur.validate();
  while (merge_pass(cur)) {
  }
  return cur;
}

std::set<std::vector<LabelSet>> label_traces(const KripkeStructure &m,
                                             int depth) {
  std::vector<std::vector<int>> succ(m.state_count());
  for (const auto &[a, b] : m.transitions)
    succ[a].push_back(b);

  std::set<std::vector<LabelSet>> traces;
  std::vector<std::pair<int, std::vector<LabelSet>>> stack;
  for (int s : m.initial)
    stack.push_back({s, {m.labels[s]}});
  while (!stack.empty()) {
    auto [state, trace] = std::move(stack.back());
    stack.pop_back();
    traces.insert(trace);
    if (static_cast<int>(trace.size()) >= depth)
      continue;
    for (int t : succ[state]) {
      auto next = trace;
      next.push_back(m.labels[t]);
      stack.push_back({t, std::move(next)});
    }
  }
  return traces;
}

Vector SampleGrid::point(long long flat) const {
  const Index d = base.size();
  Vector x(d);
  for (Index i = d - 1; i >= 0; --i) {
    const long long k = flat % counts[static_cast<std::size_t>(i)];
    flat /= counts[static_cast<std::size_t>(i)];
    if (counts[static_cast<std::size_t>(i)] == 1) {
      x(i) = base(i);
    } else {
      // Clamp: the last point can overshoot the bound by round-off.
      x(i) = std::min(base(i) + static_cast<double>(k) * step(i), upper(i));
    }
  }
  return x;
}

SampleGrid make_grid(const Box &box, const Vector &step) {
  if (step.size() != box.dim())
    throw Error("grid step has " + std::to_string(step.size()) +
                " entries for a " + std::to_string(box.dim()) +
                "-dimensional box");
  if (!box.finite())
    throw Error("cannot grid an unbounded box");
  SampleGrid g;
  g.base = box.lower;
  g.upper = box.upper;
  g.step = step;
  g.total = 1;
  for (Index i = 0; i < box.dim(); ++i) {
    long long count = 1;
    if (!box.degenerate(i)) {
      if (!(step(i) > 0.0))
        throw Error("grid step must be positive on non-degenerate node " +
                    std::to_string(i));
      const double span = (box.upper(i) - box.lower(i)) / step(i);
      count = static_cast<long long>(std::floor(span + 1e-9)) + 1;
    }
    g.counts.push_back(count);
    if (g.total > (4'000'000'000'000'000LL / count))
      throw Error("grid too large: more than 4e15 points");
    g.total *= count;
  }
  return g;
}

} // namespace relucheck
