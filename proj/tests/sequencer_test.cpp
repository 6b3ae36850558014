// Copyright 2026 The cci Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cci/sequencer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cci/intersect.hpp"
#include "test_support.hpp"

namespace cci {
namespace {

using testing::V2;

std::vector<ObjectId> sorted(std::vector<ObjectId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

TEST(Intersects, SphereExamples) {
  EXPECT_TRUE(intersects<2>(Sphere<2>(V2(0, 0), 1.0), Sphere<2>(V2(1.5, 0), 1.0)));
  EXPECT_FALSE(intersects<2>(Sphere<2>(V2(0, 0), 1.0), Sphere<2>(V2(3, 0), 1.0)));
  // Touching counts.
  EXPECT_TRUE(intersects<2>(Sphere<2>(V2(0, 0), 1.0), Sphere<2>(V2(2, 0), 1.0)));
  EXPECT_TRUE(intersects<2>(Polytope<2>::box(V2(0, 0), V2(1, 1)), Polytope<2>::box(V2(2, 0), V2(1, 1))));
  EXPECT_FALSE(intersects<2>(Polytope<2>::box(V2(0, 0), V2(1, 1)), Sphere<2>(V2(2.5, 2.5), 1.0)));
}

// Exact distance between disjoint convex polygons: nearest pair lies on an
// endpoint of one of the edges.
double polygon_distance(const Polytope<2>& a, const Polytope<2>& b) {
  double best = std::numeric_limits<double>::infinity();
  auto scan = [&](const Polytope<2>& p, const Polytope<2>& q) {
    const auto& pv = p.vertices();
    const auto& qv = q.vertices();
    for (const auto& x : pv)
      for (std::size_t i = 0; i < qv.size(); ++i)
        best = std::min(best, testing::point_segment_distance(x, qv[i], qv[(i + 1) % qv.size()]));
  };
  scan(a, b);
  scan(b, a);
  return best;
}

bool sampled_overlap(std::mt19937_64& rng, const Polytope<2>& a, const Polytope<2>& b) {
  auto [lo, hi] = shape_bounds<2>(ConvexShape<2>(a));
  for (const auto& v : a.vertices())
    if (b.contains(v)) return true;
  for (int k = 0; k < 10000; ++k) {
    V2 x(testing::uniform(rng, lo.x(), hi.x()), testing::uniform(rng, lo.y(), hi.y()));
    if (a.contains(x) && b.contains(x)) return true;
  }
  return false;
}

TEST(Intersects, RandomPolygonsAgreeWithSampling) {
  std::mt19937_64 rng(21);
  int checked = 0, overlapping = 0;
  while (checked < 50) {
    auto a = testing::random_polygon(rng, V2::Zero(), 1.0);
    double r = testing::uniform(rng, 0.5, 2.5), ang = testing::uniform(rng, 0, 2 * M_PI);
    auto b = testing::random_polygon(rng, V2(r * std::cos(ang), r * std::sin(ang)), 1.0);
    bool oracle = sampled_overlap(rng, a, b) || sampled_overlap(rng, b, a);
    if (!oracle && polygon_distance(a, b) < 1e-3) continue;  // too close for sampling
    EXPECT_EQ(intersects<2>(a, b), oracle) << "pair " << checked;
    EXPECT_EQ(intersects<2>(b, a), oracle);
    overlapping += oracle;
    ++checked;
  }
  EXPECT_GT(overlapping, 5);
  EXPECT_LT(overlapping, 45);
}

// Two gray base slabs; green candidates placed on top of them.
ObjectSet<2> leaf_scene() {
  ObjectSet<2> s;
  s.add(0, Polytope<2>::box(V2(0, 0), V2(1.0, 0.3)));
  s.add(1, Polytope<2>::box(V2(3, 0), V2(1.0, 0.3)));
  s.add(10, Sphere<2>(V2(0, 0.8), 0.6));
  s.add(11, Sphere<2>(V2(3, 0.8), 0.6));
  s.add(12, Polytope<2>::box(V2(1.5, 0), V2(0.7, 0.2)));  // bridges both slabs
  s.add(13, Sphere<2>(V2(0.9, 0.8), 0.6));                // overlaps 10
  return s;
}

TEST(IsLeafSet, DisjointLeavesOnSeparateAnchors) {
  auto all = leaf_scene();
  auto env = all.subset({0, 1});
  auto r = is_leaf_set<2>({10, 11}, env, all);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.attachment.at(10), 0);
  EXPECT_EQ(r.attachment.at(11), 1);
  EXPECT_FALSE(r.violation.has_value());
}

TEST(IsLeafSet, CandidateTouchingTwoObjects) {
  auto all = leaf_scene();
  auto r = is_leaf_set<2>({12}, all.subset({0, 1}), all);
  ASSERT_FALSE(r.ok);
  ASSERT_TRUE(r.violation.has_value());
  EXPECT_EQ(r.violation->kind, LeafViolation::Kind::kMultipleAttachments);
  EXPECT_NE(r.violation->message().find("intersecting with two objects"), std::string::npos)
      << r.violation->message();
}

TEST(IsLeafSet, CandidatesTouchingEachOther) {
  auto all = leaf_scene();
  auto r = is_leaf_set<2>({10, 13}, all.subset({0, 1}), all);
  ASSERT_FALSE(r.ok);
  ASSERT_TRUE(r.violation.has_value());
  EXPECT_EQ(r.violation->kind, LeafViolation::Kind::kMembersIntersect);
  EXPECT_NE(r.violation->message().find("intersecting with each other"), std::string::npos);
}

TEST(IsLeafSet, UnattachedAndUnknown) {
  auto all = leaf_scene();
  auto r = is_leaf_set<2>({11}, all.subset({0}), all);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.violation->kind, LeafViolation::Kind::kNoAttachment);
  EXPECT_THROW(is_leaf_set<2>({99}, all.subset({0, 1}), all), LookupError);
}

TEST(BuildSequence, SingleObject) {
  ObjectSet<2> s;
  s.add(4, Sphere<2>(V2::Zero(), 1.0));
  auto seq = build_sequence(s);
  EXPECT_EQ(seq.initial.ids(), std::vector<ObjectId>{4});
  EXPECT_TRUE(seq.steps.empty());
  EXPECT_THROW(build_sequence(ObjectSet<2>{}), DomainError);
}

ObjectSet<2> chain() {
  ObjectSet<2> s;
  s.add(1, Sphere<2>(V2(0, 0), 1.0));    // A
  s.add(2, Sphere<2>(V2(1.5, 0), 1.0));  // B
  s.add(3, Sphere<2>(V2(3, 0), 1.0));    // C
  return s;
}

TEST(BuildSequence, Chain) {
  auto seq = build_sequence(chain());
  EXPECT_EQ(seq.initial.ids(), std::vector<ObjectId>{2});
  ASSERT_EQ(seq.steps.size(), 1u);
  EXPECT_EQ(sorted(seq.steps[0].members), (std::vector<ObjectId>{1, 3}));
  EXPECT_EQ(seq.steps[0].attachment.at(1), 2);
  EXPECT_EQ(seq.steps[0].attachment.at(3), 2);
}

TEST(TruncateSequence, Examples) {
  auto seq = build_sequence(chain());
  auto same = truncate_sequence(seq, 5);
  EXPECT_EQ(same.initial.ids(), seq.initial.ids());
  EXPECT_EQ(same.steps.size(), 1u);

  auto flat = truncate_sequence(seq, 0);
  EXPECT_EQ(sorted(flat.initial.ids()), (std::vector<ObjectId>{1, 2, 3}));
  EXPECT_TRUE(flat.steps.empty());
}

// A longer chain gives one object per peel; truncation keeps the last glued.
TEST(TruncateSequence, KeepsLatestSteps) {
  ObjectSet<2> s;
  for (int i = 0; i < 5; ++i) s.add(i, Sphere<2>(V2(1.5 * i, 0), 1.0));
  auto seq = build_sequence(s);
  ASSERT_GE(seq.steps.size(), 2u);
  auto t = truncate_sequence(seq, 1);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].members, seq.steps.back().members);
  auto ids = sorted(t.initial.ids());
  auto expected = sorted(seq.environment_ids(seq.steps.size() - 1));
  EXPECT_EQ(ids, expected);
  auto chk = is_leaf_set<2>(t.steps[0].members, t.initial, s);
  EXPECT_TRUE(chk.ok);
}

ObjectSet<2> random_connected(std::mt19937_64& rng, int n) {
  for (;;) {
    ObjectSet<2> s;
    std::vector<V2> centers{V2::Zero()};
    s.add(0, testing::random_shape(rng, V2::Zero(), 0.7));
    for (int i = 1; i < n; ++i) {
      V2 near = centers[std::uniform_int_distribution<std::size_t>(0, centers.size() - 1)(rng)];
      double ang = testing::uniform(rng, 0, 2 * M_PI);
      V2 c = near + testing::uniform(rng, 0.6, 1.1) * V2(std::cos(ang), std::sin(ang));
      centers.push_back(c);
      s.add(i * 7 % 11 + 20 * (i % 2), testing::random_shape(rng, c, 0.7));  // scrambled ids
    }
    if (IntersectionGraph(s).components().size() == 1) return s;
  }
}

void check_sequence_invariants(const GlueSequence<2>& seq) {
  // Reconstruction and disjointness.
  std::multiset<ObjectId> ids;
  for (ObjectId id : seq.initial.ids()) ids.insert(id);
  for (const auto& st : seq.steps) {
    EXPECT_FALSE(st.members.empty());
    for (ObjectId id : st.members) ids.insert(id);
  }
  auto tot = seq.total.ids();
  EXPECT_EQ(ids, std::multiset<ObjectId>(tot.begin(), tot.end()));

  // Every step is a leaf set of its cumulative environment.
  for (std::size_t k = 0; k < seq.steps.size(); ++k) {
    auto env = seq.total.subset(sorted(seq.environment_ids(k)));
    auto chk = is_leaf_set<2>(seq.steps[k].members, env, seq.total);
    ASSERT_TRUE(chk.ok) << "step " << k << ": " << chk.violation->message();
    EXPECT_EQ(chk.attachment, seq.steps[k].attachment);
  }
}

TEST(BuildSequence, RandomConnectedEnvironments) {
  std::mt19937_64 rng(31);
  int with_steps = 0;
  for (int trial = 0; trial < 20; ++trial) {
    int n = std::uniform_int_distribution<int>(2, 8)(rng);
    auto total = random_connected(rng, n);
    auto seq = build_sequence(total);
    ASSERT_EQ(seq.components, 1u);
    check_sequence_invariants(seq);
    with_steps += !seq.steps.empty();

    // Determinism.
    auto again = build_sequence(total);
    EXPECT_EQ(again.initial.ids(), seq.initial.ids());
    ASSERT_EQ(again.steps.size(), seq.steps.size());
    for (std::size_t k = 0; k < seq.steps.size(); ++k) EXPECT_EQ(again.steps[k].members, seq.steps[k].members);

    // Greedy maximality: at peel time of step k the remaining set was the
    // environment after gluing it. No other remaining object can join.
    IntersectionGraph graph(total);
    for (std::size_t k = 0; k < seq.steps.size(); ++k) {
      auto remaining = seq.environment_ids(k + 1);
      const auto& leaf = seq.steps[k].members;
      for (ObjectId r : remaining) {
        if (std::find(leaf.begin(), leaf.end(), r) != leaf.end()) continue;
        auto cand = leaf;
        cand.push_back(r);
        std::vector<ObjectId> env;
        for (ObjectId e : remaining)
          if (std::find(cand.begin(), cand.end(), e) == cand.end()) env.push_back(e);
        EXPECT_FALSE(graph.leaf_check(cand, env).ok) << "object " << r << " could extend step " << k;
      }
    }
    // Nothing further can be peeled from the initial set.
    auto init = seq.initial.ids();
    for (ObjectId v : init) {
      std::vector<ObjectId> env;
      for (ObjectId e : init)
        if (e != v) env.push_back(e);
      EXPECT_FALSE(graph.leaf_check({v}, env).ok);
    }
  }
  EXPECT_GT(with_steps, 10);
}

TEST(BuildSequence, DisconnectedInput) {
  ObjectSet<2> s;
  s.add(1, Sphere<2>(V2(0, 0), 1.0));
  s.add(2, Sphere<2>(V2(1.5, 0), 1.0));
  s.add(3, Sphere<2>(V2(3, 0), 1.0));
  s.add(7, Sphere<2>(V2(0, 10), 1.0));
  s.add(8, Sphere<2>(V2(1.5, 10), 1.0));
  s.add(9, Sphere<2>(V2(20, 0), 1.0));
  auto seq = build_sequence(s);
  EXPECT_EQ(seq.components, 3u);
  check_sequence_invariants(seq);
  EXPECT_EQ(seq.initial.ids(), (std::vector<ObjectId>{2, 8, 9}));
  ASSERT_EQ(seq.steps.size(), 2u);
  EXPECT_EQ(sorted(seq.steps[0].members), (std::vector<ObjectId>{1, 3}));
  EXPECT_EQ(seq.steps[1].members, std::vector<ObjectId>{7});
}

TEST(EnvironmentAt, EndpointsMatchStepSets) {
  auto seq = build_sequence(chain());
  auto sh = ShapingFunction::exponential(kDefaultEta);
  auto e0 = environment_at(seq, 0, 0.0, sh);
  EXPECT_EQ(e0.base().ids(), std::vector<ObjectId>{2});
  EXPECT_EQ(e0.blends().size(), 2u);
  auto full = environment_at(seq, 1, 0.0, sh);
  EXPECT_EQ(full.base().ids(), (std::vector<ObjectId>{1, 2, 3}));
  EXPECT_TRUE(full.blends().empty());
  // At alpha = 1 occupancy equals that of the next environment.
  auto e1 = environment_at(seq, 0, 1.0, sh);
  std::mt19937_64 rng(41);
  for (int k = 0; k < 2000; ++k) {
    V2 x = testing::random_point(rng, -1.5, 4.5);
    x.y() *= 0.5;
    EXPECT_EQ(occupied(e1.value(x)), occupied(full.value(x)));
  }
}

}  // namespace
}  // namespace cci
