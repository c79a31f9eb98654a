#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fplab/extfloat.hpp"

namespace fplab {

// A reduction order for summing n floats: a sequence of n-1 index pairs.
// Step k picks positions (i_k, j_k), 1-based with i < j, of the current
// tuple; the pairwise float sum replaces them at the front of the tuple.
// Every order induces a full binary tree with n leaves.
class ReductionOrder {
public:
  ReductionOrder(int arity, std::vector<std::pair<int, int>> pairs);

  static ReductionOrder left_to_right(int arity);
  static ReductionOrder balanced(int arity);
  static ReductionOrder random(int arity, std::uint64_t seed);

  int arity() const { return arity_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  ExtFloat reduce(std::span<const ExtFloat> xs) const;

  // Max root-to-leaf edge count of the induced tree.
  int depth() const;

  // Tree view: node ids 0..arity-1 are leaves (tuple positions in order),
  // internal nodes follow; root is the last node. children[v] is valid for
  // internal v only.
  struct Tree {
    int arity;
    std::vector<std::pair<int, int>> children;  // indexed by v - arity
    int root;
    bool is_leaf(int v) const { return v < arity; }
    std::pair<int, int> child(int v) const { return children[v - arity]; }
  };
  Tree tree() const;

private:
  int arity_;
  std::vector<std::pair<int, int>> pairs_;
};

enum class ScheduleKind { LeftToRight, Balanced, SeededRandom, Explicit };

// One reduction order per arity. Deterministic given kind and seed;
// generated orders are memoized (a pure cache).
class ReductionSchedule {
public:
  static ReductionSchedule left_to_right();
  static ReductionSchedule balanced();
  static ReductionSchedule seeded_random(std::uint64_t seed);
  static ReductionSchedule explicit_orders(std::vector<ReductionOrder> orders);

  // Spec strings: "ltr", "balanced", "rand:<seed>".
  static ReductionSchedule parse(std::string_view spec);

  ScheduleKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  std::string spec_string() const;

  const ReductionOrder& order(int arity) const;
  int depth_of(int arity) const;

  ExtFloat reduce(std::span<const ExtFloat> xs) const;

private:
  ReductionSchedule(ScheduleKind kind, std::uint64_t seed) : kind_(kind), seed_(seed) {}

  ScheduleKind kind_;
  std::uint64_t seed_ = 0;
  mutable std::map<int, ReductionOrder> cache_;
};

// Smallest arity k >= n in the schedule whose order has depth >= n-1,
// together with the leaf assignment that replays a left-to-right sum of n
// inputs inside that order: assignment[t] (t in [0, k)) is the 1-based
// source index, or 0 for a zero-padded leaf.
struct LeftToRightEmbedding {
  int arity_k;
  std::vector<int> assignment;
};

class EmbeddingNotFound : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

LeftToRightEmbedding embed_left_to_right(int n, const ReductionSchedule& schedule,
                                         int arity_cap = -1);  // -1: default 4n+64

// Apply an embedding to an input tuple (zero-pads the rest).
std::vector<ExtFloat> apply_embedding(const LeftToRightEmbedding& emb,
                                      std::span<const ExtFloat> xs, FloatFormat fmt);

}  // namespace fplab
