#include "doctest.h"

#include <random>
#include <stdexcept>

#include "tmcheck/atomic_tm.hpp"
#include "tmcheck/opacity.hpp"

#include "support.hpp"

using namespace tmcheck;
using namespace tmcheck::test;
using K = ActionKind;

namespace {

History fig1a_fenced_shaped() {
  return make_history({
      {2, K::TxBegin}, {2, K::Ok}, {2, K::ReadReq, "priv"}, {2, K::RetVal, nullptr, 0},
      {2, K::WriteReq, "x", 42}, {2, K::RetUnit}, {2, K::TxCommit}, {2, K::Committed},
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "priv", 11}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {1, K::FBegin}, {1, K::FEnd},
      {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
  });
}

OpacityGraph h_bad_graph() {
  History h = h_bad();
  Classification cls = classify(h);
  std::vector<char> vis(cls.node_count(), 1);  // T1 committed, nu visible
  std::map<int, std::vector<int>> ww;
  ww[h.reg_index("x")] = {0};  // T1 is the only visible writer
  return build_graph(h, vis, ww);
}

}  // namespace

TEST_CASE("local_pairs: overwritten write and covered read are local") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok},
      {1, K::WriteReq, "x", 1}, {1, K::RetUnit},   // 2,3: local (overwritten)
      {1, K::WriteReq, "x", 2}, {1, K::RetUnit},   // 4,5: non-local
      {1, K::ReadReq, "x"}, {1, K::RetVal, nullptr, 2},  // 6,7: local
  });
  auto lp = local_pairs(h);
  CHECK(lp.count({2, 3}));
  CHECK_FALSE(lp.count({4, 5}));
  CHECK(lp.count({6, 7}));
}

TEST_CASE("local_pairs: non-transactional accesses are never local") {
  History h = make_history({
      {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::ReadReq, "x"}, {1, K::RetVal, nullptr, 1},
  });
  CHECK(local_pairs(h).empty());
}

TEST_CASE("local_pairs: a lone transactional read is non-local") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::ReadReq, "x"}, {1, K::RetVal, nullptr, 0},
  });
  CHECK(local_pairs(h).empty());
}

TEST_CASE("is_consistent: H_0 reads from the commit-pending writer") {
  CHECK(is_consistent(h0()));
}

TEST_CASE("is_consistent: reading a live transaction's write is inconsistent") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 5}, {1, K::RetUnit},
      {2, K::TxBegin}, {2, K::Ok}, {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 5},
  });
  CHECK_FALSE(is_consistent(h));
}

TEST_CASE("is_consistent: initial value with no prior write") {
  History h = make_history({{1, K::ReadReq, "x"}, {1, K::RetVal, nullptr, 0}});
  CHECK(is_consistent(h));
}

TEST_CASE("is_consistent: local reads must see the most recent own write") {
  History good = make_history({
      {1, K::TxBegin}, {1, K::Ok},
      {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::WriteReq, "x", 2}, {1, K::RetUnit},
      {1, K::ReadReq, "x"}, {1, K::RetVal, nullptr, 2},
  });
  CHECK(is_consistent(good));
  History bad = good;
  bad.actions[7].val = 1;  // sees the overwritten value
  CHECK_FALSE(is_consistent(bad));
}

TEST_CASE("build_graph: H_0 with a visible T1") {
  History h = h0();
  Classification cls = classify(h);
  // nodes: T1, T2, nu
  std::vector<char> vis = {1, 0, 1};
  std::map<int, std::vector<int>> ww;
  ww[h.reg_index("x")] = {0};
  OpacityGraph g = build_graph(h, vis, ww);
  int x = h.reg_index("x");
  REQUIRE(g.wr.count(x));
  CHECK(g.wr.at(x).contains(0, 2));  // T1 -> nu
  CHECK(g.ww.at(x) == std::vector<int>{0});
  CHECK(g.rw.empty());
  CHECK(g.hb.empty());
  CHECK(is_acyclic(g).acyclic);
}

TEST_CASE("build_graph: vis constraints are enforced") {
  History h = h0();
  // T1 invisible but read from: invalid
  CHECK_THROWS_AS(build_graph(h, {0, 0, 1}, {}), std::invalid_argument);
  // T2 is live and may not be visible
  std::map<int, std::vector<int>> ww;
  ww[h.reg_index("x")] = {0, 1};
  CHECK_THROWS_AS(build_graph(h, {1, 1, 1}, ww), std::invalid_argument);
  // ww not covering the visible writers
  CHECK_THROWS_AS(build_graph(h, {1, 0, 1}, {}), std::invalid_argument);
}

TEST_CASE("build_graph: H_bad forces the anti-dependency cycle") {
  OpacityGraph g = h_bad_graph();
  History h = h_bad();
  int x = h.reg_index("x");
  CHECK(g.hb.contains(0, 1));          // T1 -> nu via bf;po
  REQUIRE(g.rw.count(x));
  CHECK(g.rw.at(x).contains(1, 0));    // nu -> T1 via the initial-value clause
  AcyclicityResult ac = is_acyclic(g);
  CHECK_FALSE(ac.acyclic);
  REQUIRE(ac.cycle.size() >= 3);
  CHECK(ac.cycle.front() == ac.cycle.back());
}

TEST_CASE("build_graph: empty history yields an empty graph") {
  OpacityGraph g = build_graph(History{}, {}, {});
  CHECK(g.node_count() == 0);
  CHECK(is_acyclic(g).acyclic);
}

TEST_CASE("decomposed_check: H_0 graph passes") {
  History h = h0();
  std::map<int, std::vector<int>> ww;
  ww[h.reg_index("x")] = {0};
  OpacityGraph g = build_graph(h, {1, 0, 1}, ww);
  CHECK(decomposed_check(h, g));
}

TEST_CASE("decomposed_check: an RT/RW 2-cycle fails") {
  // T_b commits a write before T_a begins; T_a reads the initial value
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {2, K::TxBegin}, {2, K::Ok}, {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 0},
  });
  std::map<int, std::vector<int>> ww;
  ww[h.reg_index("x")] = {0};
  OpacityGraph g = build_graph(h, {1, 0}, ww);
  int x = h.reg_index("x");
  REQUIRE(g.rw.count(x));
  CHECK(g.rw.at(x).contains(1, 0));  // T_a -> T_b
  CHECK_FALSE(decomposed_check(h, g));
}

TEST_CASE("decomposed_check: single transaction passes") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
  });
  std::map<int, std::vector<int>> ww;
  ww[h.reg_index("x")] = {0};
  OpacityGraph g = build_graph(h, {1}, ww);
  CHECK(decomposed_check(h, g));
}

TEST_CASE("search_graph: finds the H_0 graph by making T1 visible") {
  GraphSearchResult r = search_graph(h0());
  REQUIRE(r.status == GraphSearchResult::Status::Found);
  CHECK(r.graph->vis[0]);        // T1 visible
  CHECK_FALSE(r.graph->vis[1]);  // T2 stays invisible
}

TEST_CASE("search_graph: H_bad admits no acyclic graph") {
  GraphSearchResult r = search_graph(h_bad());
  CHECK(r.status == GraphSearchResult::Status::None);
}

TEST_CASE("search_graph: empty history") {
  CHECK(search_graph(History{}).status == GraphSearchResult::Status::Found);
}

TEST_CASE("search_graph: writer bound exceeded is a distinct outcome") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 2}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 3}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
  });
  GraphSearchConfig cfg;
  cfg.max_writers_per_reg = 2;
  CHECK(search_graph(h, cfg).status == GraphSearchResult::Status::BoundExceeded);
}

TEST_CASE("search_graph: the HB prune does not change results") {
  std::mt19937_64 rng(505);
  GraphSearchConfig pruned, unpruned;
  unpruned.prune_hb_inconsistent_ww = false;
  for (int i = 0; i < 120; ++i) {
    History h = random_history(rng, {});
    GraphSearchResult a = search_graph(h, pruned);
    GraphSearchResult b = search_graph(h, unpruned);
    REQUIRE(a.status == b.status);
    if (a.status == GraphSearchResult::Status::Found) {
      CHECK(a.graph->vis == b.graph->vis);
      CHECK(a.graph->ww == b.graph->ww);
    }
  }
}

TEST_CASE("fenced_graph: no fences leaves the graph unchanged") {
  History h = h0();
  std::map<int, std::vector<int>> ww;
  ww[h.reg_index("x")] = {0};
  OpacityGraph g = build_graph(h, {1, 0, 1}, ww);
  FencedGraph fg = fenced_graph(g, h);
  CHECK(fg.fence_actions.empty());
  CHECK(fg.node_count() == g.node_count());
  CHECK(fg.edges.count() == g.all_edges().count());
}

TEST_CASE("fenced_graph: fence nodes pick up before/after edges") {
  History h = fig1a_fenced_shaped();
  GraphSearchResult r = search_graph(h);
  REQUIRE(r.status == GraphSearchResult::Status::Found);
  FencedGraph fg = fenced_graph(*r.graph, h);
  REQUIRE(fg.fence_actions.size() == 2);
  // node ids: T2=0, T1=1, nu=2, fbegin=3, fend=4
  CHECK(fg.edges.contains(0, 4));  // T2 completed before fend
  CHECK(fg.edges.contains(4, 2));  // fend precedes nu by program order
  CHECK(fg.edges.contains(3, 4));  // fbegin before fend
}

TEST_CASE("fenced_graph: a cyclic input stays cyclic, no assertion fires") {
  OpacityGraph g = h_bad_graph();
  REQUIRE_FALSE(is_acyclic(g).acyclic);
  FencedGraph fg = fenced_graph(g, h_bad());
  // the base cycle T1 <-> nu is still present
  CHECK(fg.edges.contains(0, 1));
  CHECK(fg.edges.contains(1, 0));
}

TEST_CASE("extract_witness: H_0 witness is atomic and order-preserving") {
  History h = h0();
  GraphSearchResult r = search_graph(h);
  REQUIRE(r.status == GraphSearchResult::Status::Found);
  Witness w = extract_witness(h, *r.graph);
  CHECK(w.serial.size() == h.size());
  CHECK(opacity_relation(h, w.serial));
  CHECK(atomic_member(w.serial));
  // T1 fully precedes the read that observes its write
  CHECK(w.serial[0].kind == K::TxBegin);
  CHECK(w.serial[0].thread == 1);
  int read_pos = -1, commit_pos = -1;
  for (int i = 0; i < int(w.serial.size()); ++i) {
    if (w.serial[i].kind == K::ReadReq) read_pos = i;
    if (w.serial[i].kind == K::TxCommit && w.serial[i].thread == 1) commit_pos = i;
  }
  CHECK(commit_pos < read_pos);
}

TEST_CASE("extract_witness: a serial history maps to itself") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 1},
  });
  GraphSearchResult r = search_graph(h);
  REQUIRE(r.status == GraphSearchResult::Status::Found);
  Witness w = extract_witness(h, *r.graph);
  REQUIRE(w.serial.size() == h.size());
  for (size_t i = 0; i < h.size(); ++i) CHECK(w.serial[i] == h[i]);
}

TEST_CASE("extract_witness: fenced privatization history verifies end to end") {
  History h = fig1a_fenced_shaped();
  REQUIRE(races(h).empty());
  GraphSearchResult r = search_graph(h);
  REQUIRE(r.status == GraphSearchResult::Status::Found);
  Witness w = extract_witness(h, *r.graph);
  CHECK(opacity_relation(h, w.serial));
  CHECK(atomic_member(w.serial));
  CHECK(well_formed(w.serial).ok());
}

TEST_CASE("opacity_relation: identity, witness, and order violations") {
  History serial = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::TxCommit}, {1, K::Committed},
  });
  CHECK(opacity_relation(serial, serial));

  History h = h0();
  Witness w = extract_witness(h, *search_graph(h).graph);
  CHECK(opacity_relation(h, w.serial));

  History swapped = serial;
  std::swap(swapped.actions[0], swapped.actions[1]);
  CHECK_FALSE(opacity_relation(serial, swapped));

  History shorter = serial;
  shorter.actions.pop_back();
  CHECK_THROWS_AS(opacity_relation(serial, shorter), std::invalid_argument);
}

TEST_CASE("check_strong_opacity: verdicts") {
  // H_0 carries unsynchronized conflicts, so the default gate reports Racy;
  // the race-blind core decision is strongly opaque
  OpacityVerdict gated = check_strong_opacity(h0());
  CHECK(gated.kind == OpacityVerdict::Kind::Racy);
  CHECK(gated.race_list.size() == 2);

  OpacityOptions core;
  core.race_gate = false;
  OpacityVerdict v = check_strong_opacity(h0(), core);
  REQUIRE(v.kind == OpacityVerdict::Kind::StronglyOpaque);
  REQUIRE(v.witness.has_value());
  CHECK(atomic_member(v.witness->serial));
  CHECK(opacity_relation(h0(), v.witness->serial));

  // H_bad is DRF (the fence orders the conflict) and has no acyclic graph
  REQUIRE(races(h_bad()).empty());
  OpacityVerdict bad = check_strong_opacity(h_bad());
  CHECK(bad.kind == OpacityVerdict::Kind::NotOpaqueNoAcyclicGraph);

  // an inconsistent history
  History live_read = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 5}, {1, K::RetUnit},
      {2, K::TxBegin}, {2, K::Ok}, {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 5},
  });
  CHECK(check_strong_opacity(live_read).kind ==
        OpacityVerdict::Kind::NotOpaqueInconsistent);

  // a racy shape
  History racy = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 1},
      {2, K::ReadReq, "y"}, {2, K::RetVal, nullptr, 0},
  });
  // only racy if a conflict is unordered; the x read races with T's write
  CHECK(check_strong_opacity(racy).kind == OpacityVerdict::Kind::Racy);
}

TEST_CASE("verdicts and witnesses are reproducible byte for byte") {
  OpacityOptions core;
  core.race_gate = false;
  OpacityVerdict a = check_strong_opacity(h0(), core);
  OpacityVerdict b = check_strong_opacity(h0(), core);
  REQUIRE(a.witness.has_value());
  REQUIRE(b.witness.has_value());
  CHECK(encode(a.witness->serial) == encode(b.witness->serial));
  CHECK(a.witness->theta == b.witness->theta);
  CHECK(a.graph->vis == b.graph->vis);
  CHECK(a.graph->ww == b.graph->ww);
}

TEST_CASE("oracle agreement on the fixtures") {
  OracleResult o0 = oracle_strong_opacity(h0());
  CHECK(o0.exists);
  OracleResult ob = oracle_strong_opacity(h_bad());
  CHECK_FALSE(ob.exists);
}

TEST_CASE("theorem 6.6 cross-check on random DRF histories") {
  std::mt19937_64 rng(606);
  int checked = 0;
  for (int i = 0; i < 80; ++i) {
    History h = random_history(rng, {});
    if (!races(h).empty()) continue;
    if (!is_consistent(h)) continue;
    GraphSearchResult r = search_graph(h);
    if (r.status != GraphSearchResult::Status::Found) continue;
    ++checked;
    if (decomposed_check(h, *r.graph)) CHECK(is_acyclic(*r.graph).acyclic);
  }
  CHECK(checked > 5);
}
