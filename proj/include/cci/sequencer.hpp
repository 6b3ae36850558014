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

#ifndef CCI_SEQUENCER_HPP_
#define CCI_SEQUENCER_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cci/interpolation.hpp"
#include "cci/intersect.hpp"
#include "cci/sdf_core.hpp"

namespace cci {

/// Objects glued in one step. Every member touches exactly one object of
/// the environment it is glued onto (its anchor) and no other member.
struct LeafSet {
  std::vector<ObjectId> members;
  std::map<ObjectId, ObjectId> attachment;  // member -> anchor
};

template <int Dim>
struct GlueSequence {
  ObjectSet<Dim> initial;
  std::vector<LeafSet> steps;  // in gluing order
  ObjectSet<Dim> total;
  std::size_t components = 1;  // connected components of the intersection graph

  /// Environment before step k is glued (0-based): initial ∪ steps[0..k).
  std::vector<ObjectId> environment_ids(std::size_t k) const {
    std::vector<ObjectId> ids = initial.ids();
    for (std::size_t i = 0; i < k && i < steps.size(); ++i)
      ids.insert(ids.end(), steps[i].members.begin(), steps[i].members.end());
    return ids;
  }
};

struct LeafViolation {
  enum class Kind { kNoAttachment, kMultipleAttachments, kMembersIntersect };
  Kind kind;
  ObjectId member;
  std::vector<ObjectId> others;  // env objects touched, or the other member

  std::string message() const {
    auto list = [&] {
      std::string s;
      for (std::size_t i = 0; i < others.size(); ++i) s += (i ? ", " : "") + std::to_string(others[i]);
      return s;
    };
    switch (kind) {
      case Kind::kNoAttachment:
        return "object " + std::to_string(member) + " does not intersect any environment object";
      case Kind::kMultipleAttachments:
        return "object " + std::to_string(member) + " violates condition 1.1 by intersecting with " +
               (others.size() == 2 ? std::string("two") : std::to_string(others.size())) +
               " objects (" + list() + ")";
      case Kind::kMembersIntersect:
        return "objects " + std::to_string(member) + " and " + list() +
               " violate condition 1.2 by intersecting with each other";
    }
    return {};
  }
};

struct LeafCheck {
  bool ok = false;
  std::map<ObjectId, ObjectId> attachment;
  std::optional<LeafViolation> violation;
};

/// Symmetric pairwise intersection table over a fixed id list.
class IntersectionGraph {
 public:
  template <int Dim>
  explicit IntersectionGraph(const ObjectSet<Dim>& set) : ids_(set.ids()) {
    const std::size_t n = ids_.size();
    adj_.assign(n * n, false);
    const auto& objs = set.objects();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        adj_[i * n + j] = adj_[j * n + i] = intersects(objs[i].shape, objs[j].shape);
  }

  bool touches(ObjectId a, ObjectId b) const { return adj_[index(a) * ids_.size() + index(b)]; }
  const std::vector<ObjectId>& ids() const { return ids_; }

  std::size_t index(ObjectId id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw LookupError("unknown object id " + std::to_string(id));
    return static_cast<std::size_t>(it - ids_.begin());
  }

  /// Condition 1 for `candidate` against `env`.
  LeafCheck leaf_check(const std::vector<ObjectId>& candidate, const std::vector<ObjectId>& env) const {
    LeafCheck out;
    for (ObjectId c : candidate) index(c);
    for (ObjectId e : env) index(e);
    for (ObjectId c : candidate) {
      std::vector<ObjectId> touched;
      for (ObjectId e : env)
        if (touches(c, e)) touched.push_back(e);
      if (touched.size() != 1) {
        out.violation = LeafViolation{touched.empty() ? LeafViolation::Kind::kNoAttachment
                                                      : LeafViolation::Kind::kMultipleAttachments,
                                      c, touched};
        return out;
      }
      out.attachment[c] = touched.front();
    }
    for (std::size_t i = 0; i < candidate.size(); ++i)
      for (std::size_t j = i + 1; j < candidate.size(); ++j)
        if (touches(candidate[i], candidate[j])) {
          out.violation =
              LeafViolation{LeafViolation::Kind::kMembersIntersect, candidate[i], {candidate[j]}};
          out.attachment.clear();
          return out;
        }
    out.ok = true;
    return out;
  }

  /// Connected components, each sorted by id, ordered by smallest id.
  std::vector<std::vector<ObjectId>> components() const {
    const std::size_t n = ids_.size();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<ObjectId>> out;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; });
    for (std::size_t start : order) {
      if (comp[start] >= 0) continue;
      std::vector<ObjectId> members;
      std::vector<std::size_t> stack{start};
      comp[start] = static_cast<int>(out.size());
      while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        members.push_back(ids_[u]);
        for (std::size_t v = 0; v < n; ++v)
          if (comp[v] < 0 && adj_[u * n + v]) {
            comp[v] = comp[start];
            stack.push_back(v);
          }
      }
      std::sort(members.begin(), members.end());
      out.push_back(std::move(members));
    }
    return out;
  }

 private:
  std::vector<ObjectId> ids_;
  std::vector<bool> adj_;
};

/// Condition 1 check of `candidate` against `env`; ids are resolved in `all`.
template <int Dim>
LeafCheck is_leaf_set(const std::vector<ObjectId>& candidate, const ObjectSet<Dim>& env,
                      const ObjectSet<Dim>& all) {
  for (ObjectId c : candidate) {
    all.at(c);
    if (env.contains_id(c)) throw InvalidInput("candidate id " + std::to_string(c) + " is also in env");
  }
  std::vector<ObjectId> ids = candidate;
  for (ObjectId e : env.ids()) ids.push_back(e);
  ObjectSet<Dim> scope;
  for (ObjectId id : ids) scope.add(id, all.contains_id(id) ? all.at(id).shape : env.at(id).shape);
  return IntersectionGraph(scope).leaf_check(candidate, env.ids());
}

namespace detail {

// Greedy peeling on one connected component. Returns peeled sets in peel
// order; `remaining` ends as the component's initial objects.
inline std::vector<LeafSet> peel_component(const IntersectionGraph& graph, std::vector<ObjectId>& remaining) {
  std::vector<LeafSet> peeled;
  while (!remaining.empty()) {
    std::vector<ObjectId> leaf;
    LeafCheck accepted;
    for (ObjectId v : remaining) {
      std::vector<ObjectId> cand = leaf;
      cand.push_back(v);
      std::vector<ObjectId> env;
      for (ObjectId r : remaining)
        if (std::find(cand.begin(), cand.end(), r) == cand.end()) env.push_back(r);
      LeafCheck check = graph.leaf_check(cand, env);
      if (check.ok) {
        leaf = std::move(cand);
        accepted = std::move(check);
      }
    }
    if (leaf.empty()) break;
    std::erase_if(remaining, [&](ObjectId r) { return std::find(leaf.begin(), leaf.end(), r) != leaf.end(); });
    peeled.push_back({leaf, accepted.attachment});
  }
  return peeled;
}

}  // namespace detail

/// Greedy leaf-set peeling, then reversal into gluing order. Objects are
/// scanned in ascending id order. A disconnected input is processed per
/// connected component and the per-component step lists are interleaved
/// round-robin.
template <int Dim>
GlueSequence<Dim> build_sequence(const ObjectSet<Dim>& total) {
  if (total.empty()) throw DomainError("build_sequence of an empty object set");
  IntersectionGraph graph(total);
  auto comps = graph.components();

  std::vector<std::vector<LeafSet>> per_comp;
  std::vector<ObjectId> initial_ids;
  for (auto& comp : comps) {
    std::vector<ObjectId> remaining = comp;
    auto peeled = detail::peel_component(graph, remaining);
    std::reverse(peeled.begin(), peeled.end());
    per_comp.push_back(std::move(peeled));
    initial_ids.insert(initial_ids.end(), remaining.begin(), remaining.end());
  }
  std::sort(initial_ids.begin(), initial_ids.end());

  GlueSequence<Dim> seq;
  seq.total = total;
  seq.components = comps.size();
  seq.initial = total.subset(initial_ids);
  std::size_t longest = 0;
  for (const auto& p : per_comp) longest = std::max(longest, p.size());
  for (std::size_t k = 0; k < longest; ++k)
    for (const auto& p : per_comp)
      if (k < p.size()) seq.steps.push_back(p[k]);
  return seq;
}

/// Keeps at most `max_steps` glue steps by folding the first-glued steps into
/// the initial set, which leaves every remaining step a leaf set of its
/// (larger) cumulative environment.
template <int Dim>
GlueSequence<Dim> truncate_sequence(const GlueSequence<Dim>& seq, std::size_t max_steps) {
  if (seq.steps.size() <= max_steps) return seq;
  const std::size_t fold = seq.steps.size() - max_steps;
  std::vector<ObjectId> ids = seq.environment_ids(fold);
  std::sort(ids.begin(), ids.end());
  GlueSequence<Dim> out;
  out.total = seq.total;
  out.components = seq.components;
  out.initial = seq.total.subset(ids);
  out.steps.assign(seq.steps.begin() + static_cast<std::ptrdiff_t>(fold), seq.steps.end());
  return out;
}

/// Blend terms for gluing `step` onto `base` at interpolation value alpha.
template <int Dim>
std::vector<Blend<Dim>> make_blends(const ObjectSet<Dim>& total, const LeafSet& step, double alpha,
                                    const ShapingFunction& shaping) {
  std::vector<Blend<Dim>> out;
  for (ObjectId m : step.members) {
    ObjectId anchor = step.attachment.at(m);
    out.push_back({anchor, m, InterpolatedSdf<Dim>(total.at(anchor).shape, total.at(m).shape, alpha, shaping)});
  }
  return out;
}

/// Interpolated environment of glue step k (0-based) at alpha. k equal to the
/// number of steps yields the full environment with no blends.
template <int Dim>
EnvInterpSdf<Dim> environment_at(const GlueSequence<Dim>& seq, std::size_t k, double alpha,
                                 const ShapingFunction& shaping) {
  std::vector<ObjectId> ids = seq.environment_ids(k);
  std::sort(ids.begin(), ids.end());
  ObjectSet<Dim> base = seq.total.subset(ids);
  std::vector<Blend<Dim>> blends;
  if (k < seq.steps.size()) blends = make_blends(seq.total, seq.steps[k], alpha, shaping);
  return EnvInterpSdf<Dim>(std::move(base), std::move(blends), alpha);
}

}  // namespace cci

#endif  // CCI_SEQUENCER_HPP_
