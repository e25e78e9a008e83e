#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tmcheck/history.hpp"

namespace tmcheck {

// Dense binary relation over {0..n-1}, bitset rows.
class Relation {
 public:
  Relation() = default;
  explicit Relation(int n) : n_(n), words_((n + 63) / 64), bits_(size_t(n) * words_, 0) {}

  int size() const { return n_; }

  bool contains(int i, int j) const {
    return (bits_[size_t(i) * words_ + size_t(j) / 64] >> (j % 64)) & 1;
  }
  void add(int i, int j) {
    bits_[size_t(i) * words_ + size_t(j) / 64] |= uint64_t(1) << (j % 64);
  }

  Relation& operator|=(const Relation& other);

  // Relational composition: (i,k) when (i,j) here and (j,k) in other.
  Relation compose(const Relation& other) const;

  // Transitive closure.
  Relation closure() const;

  bool irreflexive() const;
  bool empty() const;
  size_t count() const;
  std::vector<std::pair<int, int>> pairs() const;

 private:
  int n_ = 0;
  size_t words_ = 0;
  std::vector<uint64_t> bits_;
};

struct RelationBundle {
  Relation po, xpo, cl, af, bf, rt;
  std::map<int, Relation> wr;    // per register index
  std::map<int, Relation> txwr;  // per register index
};

// Builds the order relations of a well-formed history.
RelationBundle base_relations(const History& h);
RelationBundle base_relations(const History& h, const Classification& cls);

// hb = (po ∪ cl ∪ af ∪ bf ∪ ⋃_x (xpo ; txwr_x))+ ; rt is not included.
Relation happens_before(const History& h);
Relation happens_before(const History& h, const Classification& cls,
                        const RelationBundle& rels);

struct ConflictPair {
  int nontxn_index = -1;  // non-transactional request action
  int txn_index = -1;     // transactional request action
  int reg = -1;
};

struct Race {
  ConflictPair conflict;
  std::string note;
};

// Conflicting request pairs: one non-transactional, one transactional, by
// different threads, same register, at least one write. Ordered by
// (min index, max index).
std::vector<ConflictPair> conflicts(const History& h);
std::vector<ConflictPair> conflicts(const History& h, const Classification& cls);

// Conflicts unordered by happens-before either way.
std::vector<Race> races(const History& h);
std::vector<Race> races(const History& h, const Classification& cls,
                        const Relation& hb);

bool is_drf(const History& h);

}  // namespace tmcheck
