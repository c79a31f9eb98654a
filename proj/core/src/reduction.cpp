#include "fplab/reduction.hpp"

#include <algorithm>
#include <stdexcept>

#include "fplab/rng.hpp"

namespace fplab {

ReductionOrder::ReductionOrder(int arity, std::vector<std::pair<int, int>> pairs)
    : arity_(arity), pairs_(std::move(pairs)) {
  if (arity_ < 1) throw std::invalid_argument("reduction order arity must be >= 1");
  if (static_cast<int>(pairs_.size()) != arity_ - 1) {
    throw std::invalid_argument("reduction order needs exactly arity-1 steps");
  }
  int m = arity_;
  for (const auto& [i, j] : pairs_) {
    if (i < 1 || j < 1 || i >= j || j > m) {
      throw std::invalid_argument("reduction step references invalid tuple positions");
    }
    --m;
  }
}

ReductionOrder ReductionOrder::left_to_right(int arity) {
  std::vector<std::pair<int, int>> pairs(std::max(0, arity - 1), {1, 2});
  return ReductionOrder(arity, std::move(pairs));
}

ReductionOrder ReductionOrder::balanced(int arity) {
  // Canonical pairing: adjacent pairs, then pairs of pairs; an odd element
  // is carried to the end of the next level.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(std::max(0, arity - 1));
  // cur holds node tags; level holds the tags of the current level in order.
  std::vector<int> cur(arity), level(arity);
  for (int t = 0; t < arity; ++t) cur[t] = level[t] = t;
  int next_tag = arity;
  auto position_of = [&](int tag) {
    for (std::size_t t = 0; t < cur.size(); ++t) {
      if (cur[t] == tag) return static_cast<int>(t) + 1;
    }
    throw std::logic_error("balanced generator lost a node");
  };
  while (level.size() > 1) {
    std::vector<int> next_level;
    for (std::size_t t = 0; t + 1 < level.size(); t += 2) {
      int pi = position_of(level[t]);
      int pj = position_of(level[t + 1]);
      if (pi > pj) std::swap(pi, pj);
      pairs.emplace_back(pi, pj);
      cur.erase(cur.begin() + (pj - 1));
      cur.erase(cur.begin() + (pi - 1));
      cur.insert(cur.begin(), next_tag);
      next_level.push_back(next_tag);
      ++next_tag;
    }
    if (level.size() % 2 == 1) next_level.push_back(level.back());
    level = std::move(next_level);
  }
  return ReductionOrder(arity, std::move(pairs));
}

ReductionOrder ReductionOrder::random(int arity, std::uint64_t seed) {
  SplitMix64 rng(SplitMix64::mix(seed, static_cast<std::uint64_t>(arity)));
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(std::max(0, arity - 1));
  for (int m = arity; m >= 2; --m) {
    const std::uint64_t npairs = static_cast<std::uint64_t>(m) * (m - 1) / 2;
    std::uint64_t r = rng.below(npairs);
    // Decode r into 1 <= i < j <= m, lexicographic by (i, j).
    int i = 1;
    std::uint64_t row = static_cast<std::uint64_t>(m - 1);
    while (r >= row) {
      r -= row;
      --row;
      ++i;
    }
    const int j = i + 1 + static_cast<int>(r);
    pairs.emplace_back(i, j);
  }
  return ReductionOrder(arity, std::move(pairs));
}

ExtFloat ReductionOrder::reduce(std::span<const ExtFloat> xs) const {
  if (static_cast<int>(xs.size()) != arity_) {
    throw std::invalid_argument("reduce: tuple length does not match order arity");
  }
  // Left-to-right fast path.
  bool ltr = true;
  for (const auto& pr : pairs_) {
    if (pr != std::pair<int, int>{1, 2}) {
      ltr = false;
      break;
    }
  }
  if (ltr) {
    ExtFloat acc = xs[0];
    for (std::size_t t = 1; t < xs.size(); ++t) acc = fadd(acc, xs[t]);
    return acc;
  }
  std::vector<ExtFloat> cur(xs.begin(), xs.end());
  for (const auto& [i, j] : pairs_) {
    ExtFloat merged = fadd(cur[i - 1], cur[j - 1]);
    cur.erase(cur.begin() + (j - 1));
    cur.erase(cur.begin() + (i - 1));
    cur.insert(cur.begin(), merged);
  }
  return cur.front();
}

ReductionOrder::Tree ReductionOrder::tree() const {
  Tree t;
  t.arity = arity_;
  t.children.reserve(std::max(0, arity_ - 1));
  std::vector<int> cur(arity_);
  for (int v = 0; v < arity_; ++v) cur[v] = v;
  int next_id = arity_;
  for (const auto& [i, j] : pairs_) {
    t.children.emplace_back(cur[i - 1], cur[j - 1]);
    cur.erase(cur.begin() + (j - 1));
    cur.erase(cur.begin() + (i - 1));
    cur.insert(cur.begin(), next_id);
    ++next_id;
  }
  t.root = next_id - 1;
  if (arity_ == 1) t.root = 0;
  return t;
}

int ReductionOrder::depth() const {
  if (arity_ == 1) return 0;
  const Tree t = tree();
  // Depth of each node from the root, computed top-down over ids (children
  // always have smaller ids than their parent).
  std::vector<int> depth(arity_ + t.children.size(), 0);
  int max_leaf_depth = 0;
  for (int v = t.root; v >= arity_; --v) {
    const auto [l, r] = t.child(v);
    depth[l] = depth[v] + 1;
    depth[r] = depth[v] + 1;
  }
  for (int v = 0; v < arity_; ++v) max_leaf_depth = std::max(max_leaf_depth, depth[v]);
  return max_leaf_depth;
}

ReductionSchedule ReductionSchedule::left_to_right() {
  return ReductionSchedule(ScheduleKind::LeftToRight, 0);
}
ReductionSchedule ReductionSchedule::balanced() {
  return ReductionSchedule(ScheduleKind::Balanced, 0);
}
ReductionSchedule ReductionSchedule::seeded_random(std::uint64_t seed) {
  return ReductionSchedule(ScheduleKind::SeededRandom, seed);
}
ReductionSchedule ReductionSchedule::explicit_orders(std::vector<ReductionOrder> orders) {
  ReductionSchedule s(ScheduleKind::Explicit, 0);
  for (auto& o : orders) s.cache_.emplace(o.arity(), std::move(o));
  return s;
}

ReductionSchedule ReductionSchedule::parse(std::string_view spec) {
  if (spec == "ltr") return left_to_right();
  if (spec == "balanced") return balanced();
  if (spec.rfind("rand:", 0) == 0) {
    const std::string seed_text(spec.substr(5));
    return seeded_random(std::stoull(seed_text));
  }
  throw std::invalid_argument("cannot parse schedule spec '" + std::string(spec) + "'");
}

std::string ReductionSchedule::spec_string() const {
  switch (kind_) {
    case ScheduleKind::LeftToRight: return "ltr";
    case ScheduleKind::Balanced: return "balanced";
    case ScheduleKind::SeededRandom: return "rand:" + std::to_string(seed_);
    default: return "explicit";
  }
}

const ReductionOrder& ReductionSchedule::order(int arity) const {
  auto it = cache_.find(arity);
  if (it != cache_.end()) return it->second;
  switch (kind_) {
    case ScheduleKind::LeftToRight:
      it = cache_.emplace(arity, ReductionOrder::left_to_right(arity)).first;
      break;
    case ScheduleKind::Balanced:
      it = cache_.emplace(arity, ReductionOrder::balanced(arity)).first;
      break;
    case ScheduleKind::SeededRandom:
      it = cache_.emplace(arity, ReductionOrder::random(arity, seed_)).first;
      break;
    default:
      throw std::out_of_range("explicit schedule has no order for arity " +
                              std::to_string(arity));
  }
  return it->second;
}

int ReductionSchedule::depth_of(int arity) const { return order(arity).depth(); }

ExtFloat ReductionSchedule::reduce(std::span<const ExtFloat> xs) const {
  return order(static_cast<int>(xs.size())).reduce(xs);
}

LeftToRightEmbedding embed_left_to_right(int n, const ReductionSchedule& schedule,
                                         int arity_cap) {
  if (n < 1) throw std::invalid_argument("embed_left_to_right: n must be >= 1");
  if (arity_cap < 0) arity_cap = 4 * n + 64;
  if (n == 1) return {1, {1}};
  for (int k = std::max(n, 2); k <= arity_cap; ++k) {
    const ReductionOrder& o = schedule.order(k);
    if (o.depth() < n - 1) continue;
    // A left-to-right order of the same arity hosts the inputs in place.
    if (k == n) {
      bool ltr = true;
      for (const auto& pr : o.pairs()) {
        if (pr != std::pair<int, int>{1, 2}) {
          ltr = false;
          break;
        }
      }
      if (ltr) {
        LeftToRightEmbedding id;
        id.arity_k = n;
        id.assignment.resize(n);
        for (int t = 0; t < n; ++t) id.assignment[t] = t + 1;
        return id;
      }
    }
    const auto t = o.tree();
    // Depths from root; pick a deepest leaf and take the path toward it.
    std::vector<int> depth(static_cast<std::size_t>(k) + t.children.size(), 0);
    std::vector<int> parent(depth.size(), -1);
    for (int v = t.root; v >= k; --v) {
      const auto [l, r] = t.child(v);
      depth[l] = depth[r] = depth[v] + 1;
      parent[l] = parent[r] = v;
    }
    int deepest = 0;
    for (int v = 0; v < k; ++v) {
      if (depth[v] > depth[deepest]) deepest = v;
    }
    // Path root -> deepest leaf.
    std::vector<int> path;
    for (int v = deepest; v != -1; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());  // path[0] = root
    // v_0..v_{n-1}: first n nodes of the path; v_{n-1} need not be a leaf.
    std::vector<int> leftmost(depth.size());
    for (int v = 0; v < k; ++v) leftmost[v] = v;
    for (int v = k; v <= t.root; ++v) {
      const auto [l, r] = t.child(v);
      leftmost[v] = std::min(leftmost[l], leftmost[r]);
    }
    auto sibling_of = [&](int v) {
      const auto [l, r] = t.child(parent[v]);
      return l == v ? r : l;
    };
    std::vector<int> assignment(k, 0);
    // w_{n-1} carries x_2 in the on-path node's subtree; its sibling w_n
    // carries x_1. Above, the sibling of v_i carries x_{n+1-i}.
    const int v_last = path[n - 1];
    assignment[leftmost[v_last]] = 2;
    assignment[leftmost[sibling_of(v_last)]] = 1;
    for (int i = n - 2; i >= 1; --i) {
      const int v_i = path[i];
      assignment[leftmost[sibling_of(v_i)]] = n + 1 - i;
    }
    return {k, std::move(assignment)};
  }
  throw EmbeddingNotFound("embedding not found within arity cap " + std::to_string(arity_cap) +
                          " for n=" + std::to_string(n) + " under schedule " +
                          schedule.spec_string());
}

std::vector<ExtFloat> apply_embedding(const LeftToRightEmbedding& emb,
                                      std::span<const ExtFloat> xs, FloatFormat fmt) {
  std::vector<ExtFloat> out;
  out.reserve(emb.assignment.size());
  for (int src : emb.assignment) {
    if (src == 0) {
      out.push_back(ExtFloat::zero(fmt));
    } else {
      out.push_back(xs[src - 1]);
    }
  }
  return out;
}

}  // namespace fplab
