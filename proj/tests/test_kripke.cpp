#include "relucheck/kripke.hpp"

#include "testutil.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace relucheck;

namespace {

bool same_structure(const KripkeStructure &a, const KripkeStructure &b) {
  return a.labels == b.labels && a.initial == b.initial &&
         a.transitions == b.transitions;
}

} // namespace

TEST_CASE("explicit model has 1 + nC states and nC(nC+1) transitions") {
  struct Case {
    long long n;
    int c;
    int states;
    long long transitions;
  };
  const Case cases[] = {
      {4, 2, 9, 72}, {1, 1, 2, 2}, {10, 3, 31, 930}, {2, 5, 11, 110}};
  for (const auto &[n, c, states, transitions] : cases) {
    const KripkeStructure m = build_explicit_model(n, c);
    m.validate();
    CHECK(m.state_count() == states);
    CHECK(m.transition_count() == transitions);
    CHECK(m.initial == std::vector<int>{0});
    CHECK(m.labels[0].count("input") == 1);
    // Initial state reaches every outcome; outcomes form a complete digraph
    // with self-loops and never return to the initial state.
    for (int s = 1; s < states; ++s) {
      CHECK(m.has_transition(0, s));
      CHECK(m.has_transition(s, s));
      CHECK_FALSE(m.has_transition(s, 0));
      for (int t = 1; t < states; ++t)
        CHECK(m.has_transition(s, t));
    }
    CHECK_FALSE(m.has_transition(0, 0));
    // Outcome labels cycle through the classes option-major.
    for (int s = 1; s < states; ++s)
      CHECK(m.labels[s].count("class:" + std::to_string((s - 1) % c)) == 1);
  }
}

TEST_CASE("reduced model has 1 + C states and C(C+1) transitions") {
  struct Case {
    int c;
    int states;
    long long transitions;
  };
  const Case cases[] = {{2, 3, 6}, {1, 2, 2}, {5, 6, 30}};
  for (const auto &[c, states, transitions] : cases) {
    const KripkeStructure m = build_reduced_model(c);
    m.validate();
    CHECK(m.state_count() == states);
    CHECK(m.transition_count() == transitions);
  }
}

TEST_CASE("oversized explicit models are refused, not attempted") {
  CHECK_THROWS_WITH_AS(build_explicit_model(10'000'000, 5),
                       doctest::Contains("too large"), Error);
  CHECK_THROWS_AS(build_explicit_model(0, 2), Error);
  CHECK_THROWS_AS(build_explicit_model(2, 0), Error);
}

TEST_CASE("merging an explicit model reproduces the reduced counts") {
  for (long long n : {1LL, 2LL, 7LL, 50LL}) {
    for (int c : {1, 2, 3, 5}) {
      const KripkeStructure merged = merge_equilabeled(build_explicit_model(n, c));
      merged.validate();
      CHECK(merged.state_count() == 1 + c);
      CHECK(merged.transition_count() == static_cast<long long>(c) * (c + 1));
    }
  }
}

TEST_CASE("merging is idempotent") {
  for (long long n : {3LL, 6LL}) {
    for (int c : {2, 4}) {
      const KripkeStructure once = merge_equilabeled(build_explicit_model(n, c));
      const KripkeStructure twice = merge_equilabeled(once);
      CHECK(same_structure(once, twice));
    }
  }
}

TEST_CASE("merged models preserve label traces") {
  for (long long n : {1LL, 2LL, 5LL}) {
    for (int c : {1, 2, 3}) {
      const KripkeStructure merged = merge_equilabeled(build_explicit_model(n, c));
      const KripkeStructure reduced = build_reduced_model(c);
      CHECK(label_traces(merged, 3) == label_traces(reduced, 3));
      // Abstraction loses nothing observable: the explicit model's traces
      // coincide with the reduced ones because equal-label states collapse.
      CHECK(label_traces(build_explicit_model(n, c), 3) ==
            label_traces(reduced, 3));
    }
  }
}

TEST_CASE("adjacent states with the same labels collapse along a chain") {
  KripkeStructure m;
  m.labels = {{"a"}, {"b"}, {"b"}, {"b"}};
  m.initial = {0};
  m.transitions = {{0, 1}, {1, 2}, {2, 3}};
  const KripkeStructure merged = merge_equilabeled(m);
  merged.validate();
  CHECK(merged.state_count() == 2);
  CHECK(merged.labels == std::vector<LabelSet>{{"a"}, {"b"}});
  CHECK(merged.transitions ==
        std::vector<std::pair<int, int>>{{0, 1}, {1, 1}});
}

TEST_CASE("siblings merge only when their outgoing label sets agree") {
  // Common parent 0; children 1 and 2 share labels and successor labels.
  KripkeStructure agree;
  agree.labels = {{"i"}, {"x"}, {"x"}, {"y"}};
  agree.initial = {0};
  agree.transitions = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  const KripkeStructure merged = merge_equilabeled(agree);
  CHECK(merged.state_count() == 3);
  CHECK(merged.transitions ==
        std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});

  // Same shape, but the children lead to differently labelled states.
  KripkeStructure differ;
  differ.labels = {{"i"}, {"x"}, {"x"}, {"y"}, {"z"}};
  differ.initial = {0};
  differ.transitions = {{0, 1}, {0, 2}, {1, 3}, {2, 4}};
  const KripkeStructure kept = merge_equilabeled(differ);
  CHECK(kept.state_count() == 5);
  CHECK(same_structure(kept, differ));
}

TEST_CASE("disconnected equal-label states do not merge") {
  KripkeStructure m;
  m.labels = {{"i"}, {"x"}, {"x"}};
  m.initial = {0};
  m.transitions = {{0, 1}}; // state 2 is unreachable and not a sibling
  const KripkeStructure merged = merge_equilabeled(m);
  CHECK(merged.state_count() == 3);
}

TEST_CASE("structure validation catches malformed inputs") {
  KripkeStructure m;
  m.labels = {{"a"}, {"b"}};
  m.initial = {0};
  m.transitions = {{0, 1}};
  CHECK_NOTHROW(m.validate());

  KripkeStructure bad = m;
  bad.initial = {5};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("out of range"),
                       Error);
  bad = m;
  bad.transitions = {{1, 0}, {0, 1}};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("sorted"), Error);
  bad = m;
  bad.transitions = {{0, 1}, {0, 1}};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("duplicate"), Error);
  bad = m;
  bad.transitions = {{0, 2}};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("endpoint"), Error);
  bad = m;
  bad.initial.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("dot export names every state and edge") {
  const KripkeStructure m = build_explicit_model(2, 2);
  const std::string dot = m.to_dot();
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("doublecircle") != std::string::npos); // initial state
  CHECK(dot.find("class:1") != std::string::npos);
  const auto arrows = std::count(dot.begin(), dot.end(), '>');
  CHECK(arrows >= m.transition_count());
}

TEST_CASE("grid counts follow floor(span/step) + 1 with round-off slack") {
  Vector lo(1), hi(1), step(1);
  lo << 0.0;
  hi << 1.0;

  step << 0.25;
  CHECK(make_grid(Box(lo, hi), step).total == 5);
  step << 0.3;
  CHECK(make_grid(Box(lo, hi), step).total == 4);
  step << 0.5;
  SampleGrid g = make_grid(Box(lo, hi), step);
  CHECK(g.total == 3);
  CHECK(g.point(2)(0) == 1.0);

  // 1/3 does not divide 1 exactly in floating point; the slack keeps the
  // count at 4 and the clamp pins the last point to the upper bound.
  step << 1.0 / 3.0;
  g = make_grid(Box(lo, hi), step);
  CHECK(g.total == 4);
  CHECK(g.point(3)(0) == 1.0);
}

TEST_CASE("grid flattening is lexicographic with node 0 most significant") {
  Vector lo(2), hi(2), step(2);
  lo << 0.0, 0.0;
  hi << 1.0, 2.0;
  step << 1.0, 1.0;
  const SampleGrid g = make_grid(Box(lo, hi), step);
  REQUIRE(g.total == 6);
  CHECK(g.counts == std::vector<long long>{2, 3});
  const double expect[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}};
  for (long long f = 0; f < 6; ++f) {
    const Vector p = g.point(f);
    CHECK(p(0) == expect[f][0]);
    CHECK(p(1) == expect[f][1]);
  }
}

TEST_CASE("degenerate nodes contribute exactly one sample") {
  Vector lo(3), hi(3), step(3);
  lo << 0.0, 2.0, 1.0;
  hi << 1.0, 2.0, 3.0;
  step << 0.5, 123.0, 1.0; // step on the pinned node is ignored
  const SampleGrid g = make_grid(Box(lo, hi), step);
  CHECK(g.counts == std::vector<long long>{3, 1, 3});
  CHECK(g.total == 9);
  for (long long f = 0; f < g.total; ++f)
    CHECK(g.point(f)(1) == 2.0);

  Vector zero_step(3);
  zero_step << 0.5, 1.0, 0.0;
  CHECK_THROWS_WITH_AS(make_grid(Box(lo, hi), zero_step),
                       doctest::Contains("positive"), Error);
}

TEST_CASE("grids match an independent re-derivation on random boxes") {
  testutil::Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const int dim = static_cast<int>(rng.uniform_int(1, 3));
    Vector lo(dim), hi(dim), step(dim);
    for (int i = 0; i < dim; ++i) {
      lo(i) = rng.uniform(-2.0, 2.0);
      hi(i) = lo(i) + rng.uniform(0.1, 3.0);
      step(i) =
          (hi(i) - lo(i)) / static_cast<double>(rng.uniform_int(1, 5));
    }
    const SampleGrid g = make_grid(Box(lo, hi), step);
    const testutil::OracleGrid og = testutil::make_oracle_grid(
        testutil::to_std(lo), testutil::to_std(hi), testutil::to_std(step));
    REQUIRE(g.total == og.total);
    for (long long f = 0; f < g.total; ++f) {
      const Vector p = g.point(f);
      const std::vector<double> q = og.point(f);
      for (int i = 0; i < dim; ++i)
        CHECK(p(i) == q[i]); // bitwise
    }
  }
}

TEST_CASE("absurd grids are rejected up front") {
  Vector lo(5), hi(5), step(5);
  for (int i = 0; i < 5; ++i) {
    lo(i) = 0.0;
    hi(i) = 1.0;
    step(i) = 1e-5;
  }
  CHECK_THROWS_WITH_AS(make_grid(Box(lo, hi), step),
                       doctest::Contains("too large"), Error);

  Vector inf_hi = hi;
  inf_hi(0) = std::numeric_limits<double>::infinity();
  Vector coarse = Vector::Constant(5, 0.5);
  CHECK_THROWS_WITH_AS(make_grid(Box(lo, inf_hi), coarse),
                       doctest::Contains("unbounded"), Error);

  Vector short_step(3);
  short_step << 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(make_grid(Box(lo, hi), short_step), Error);
}
