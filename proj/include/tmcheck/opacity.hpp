#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tmcheck/history.hpp"
#include "tmcheck/relations.hpp"

namespace tmcheck {

// Request/response index pairs that are local to their transaction: reads
// preceded by a same-register write in the transaction, writes followed by
// one.
std::set<std::pair<int, int>> local_pairs(const History& h);

// Every local read returns its transaction's most recent preceding write;
// every non-local read either reads from a qualifying non-local write or
// returns the initial value when no such write exists.
bool is_consistent(const History& h);

// ---------------------------------------------------------------------------
// Opacity graphs. Nodes are the classification's transactions followed by its
// non-transactional accesses.

struct OpacityGraph {
  Classification cls;
  std::vector<char> vis;                   // per node
  Relation hb;                             // lifted happens-before, node level
  std::map<int, std::vector<int>> ww;      // register -> visible writers, in WW order
  std::map<int, Relation> wr;              // register -> node-level read dependencies
  std::map<int, Relation> rw;              // register -> node-level anti-dependencies

  int node_count() const { return cls.node_count(); }
  // Union of HB, WR, WW, RW edges as one relation.
  Relation all_edges() const;
  // WR ∪ WW ∪ RW only.
  Relation dep_edges() const;
  Relation ww_relation(int reg) const;
};

// Does the node contain a write request to reg? (Any action of the node.)
bool node_writes(const Classification& cls, const History& h, int node, int reg);

// Builds the graph for the given visibility assignment and per-register total
// orders over visible writers. Throws std::invalid_argument when vis violates
// the forced values, ww is not a total order over exactly the visible writers,
// or a read-from node is invisible.
OpacityGraph build_graph(const History& h, const std::vector<char>& vis,
                         const std::map<int, std::vector<int>>& ww);
OpacityGraph build_graph(const History& h, const Classification& cls,
                         const Relation& hb_actions, const std::vector<char>& vis,
                         const std::map<int, std::vector<int>>& ww);

struct AcyclicityResult {
  bool acyclic = true;
  std::vector<int> cycle;  // witness cycle (node ids), first == last
};

AcyclicityResult is_acyclic(const OpacityGraph& g);

// (a) HB;(WR∪WW∪RW) irreflexive and (b) no cycle among transaction nodes under
// RT ∪ WR ∪ WW ∪ RW, with RT lifted from the real-time order.
bool decomposed_check(const History& h, const OpacityGraph& g);

struct GraphSearchResult {
  enum class Status { Found, None, BoundExceeded } status = Status::None;
  std::optional<OpacityGraph> graph;
  uint64_t candidates_tried = 0;
};

struct GraphSearchConfig {
  int max_writers_per_reg = 8;
  uint64_t max_candidates = 1'000'000;
  bool prune_hb_inconsistent_ww = true;
};

// Enumerates visibility assignments over commit-pending transactions (in
// transaction order, false before true) and per-register writer permutations
// (lexicographic), returning the first acyclic graph.
GraphSearchResult search_graph(const History& h, const GraphSearchConfig& cfg = {});

// ---------------------------------------------------------------------------
// Fenced graphs: graph nodes plus one node per fence action, with all lifted
// happens-before edges touching fence actions.

struct FencedGraph {
  // node ids 0..graph nodes-1 as in OpacityGraph, then one per fence action
  int base_nodes = 0;
  std::vector<int> fence_actions;  // action index of each fence node
  Relation edges;                  // HB̄ ∪ WR ∪ WW ∪ RW
  int node_count() const { return base_nodes + int(fence_actions.size()); }
};

FencedGraph fenced_graph(const OpacityGraph& g, const History& h);
FencedGraph fenced_graph(const OpacityGraph& g, const History& h, const Relation& hb_actions);

struct Witness {
  History serial;
  std::vector<int> theta;  // position in serial of each input action
};

// Topologically sorts the fenced graph (ties by original execution order),
// linearizes, verifies the result is an hb-preserving permutation admitted by
// the atomic TM, and returns it. Throws std::logic_error if verification
// fails.
Witness extract_witness(const History& h, const OpacityGraph& g);

// H1 ⊑ H2: a bijection matching equal actions such that hb(H1)-ordered pairs
// map to increasing positions. Throws std::invalid_argument on length
// mismatch or when the actions are not a permutation of one another.
bool opacity_relation(const History& h1, const History& h2);

// ---------------------------------------------------------------------------

struct OpacityVerdict {
  enum class Kind {
    StronglyOpaque,
    NotOpaqueInconsistent,
    NotOpaqueNoAcyclicGraph,
    Racy,
    SearchBoundExceeded,
  };
  Kind kind = Kind::NotOpaqueNoAcyclicGraph;
  std::optional<Witness> witness;
  std::optional<OpacityGraph> graph;
  std::vector<Race> race_list;
  std::string detail;

  bool strongly_opaque() const { return kind == Kind::StronglyOpaque; }
};

const char* verdict_name(OpacityVerdict::Kind k);

struct OpacityOptions {
  GraphSearchConfig search;
  // When false, skip the data-race gate and decide opacity regardless; used to
  // compare against the permutation oracle, which is race-blind.
  bool race_gate = true;
};

OpacityVerdict check_strong_opacity(const History& h, const OpacityOptions& opt = {});

}  // namespace tmcheck
