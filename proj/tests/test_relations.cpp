#include "doctest.h"

#include <map>
#include <random>

#include "tmcheck/relations.hpp"

#include "support.hpp"

using namespace tmcheck;
using namespace tmcheck::test;
using K = ActionKind;

namespace {

// nu T1 T2: publication-shaped (nu writes x=42, T1 clears the flag, T2 reads
// the flag then x)
History fig2_shaped() {
  return make_history({
      {1, K::WriteReq, "flag_x", 42}, {1, K::RetUnit},                        // 0,1: nu on x
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "priv", 21}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},                                    // 2..7: T1
      {2, K::TxBegin}, {2, K::Ok}, {2, K::ReadReq, "priv"},
      {2, K::RetVal, nullptr, 21}, {2, K::ReadReq, "flag_x"},
      {2, K::RetVal, nullptr, 42}, {2, K::TxCommit}, {2, K::Committed},       // 8..15: T2
  });
}

// T2 T1 fence nu: privatization-shaped with the fence between T1 and nu
History fig1a_fenced_shaped() {
  return make_history({
      {2, K::TxBegin}, {2, K::Ok}, {2, K::ReadReq, "priv"}, {2, K::RetVal, nullptr, 0},
      {2, K::WriteReq, "x", 42}, {2, K::RetUnit}, {2, K::TxCommit}, {2, K::Committed},  // 0..7: T2
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "priv", 11}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},                                              // 8..13: T1
      {1, K::FBegin}, {1, K::FEnd},                                                     // 14,15
      {1, K::WriteReq, "x", 1}, {1, K::RetUnit},                                        // 16,17: nu
  });
}

// T fully committed, then two non-transactional reads by another thread
History fig3_shaped() {
  return make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::WriteReq, "y", 2}, {1, K::RetUnit}, {1, K::TxCommit}, {1, K::Committed},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 1},
      {2, K::ReadReq, "y"}, {2, K::RetVal, nullptr, 2},
  });
}

// T; nu sets the ready flag; the other thread's terminating flag read; then
// its read of x
History fig6_shaped() {
  return make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 42}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {1, K::WriteReq, "ready", 9}, {1, K::RetUnit},
      {2, K::ReadReq, "ready"}, {2, K::RetVal, nullptr, 9},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 42},
  });
}

}  // namespace

TEST_CASE("base_relations: empty history has empty relations") {
  RelationBundle b = base_relations(History{});
  CHECK(b.po.empty());
  CHECK(b.cl.empty());
  CHECK(b.af.empty());
  CHECK(b.bf.empty());
  CHECK(b.rt.empty());
  CHECK(b.wr.empty());
  CHECK(b.txwr.empty());
}

TEST_CASE("base_relations: publication shape has the flag read-dependency") {
  History h = fig2_shaped();
  int priv = h.reg_index("priv");
  RelationBundle b = base_relations(h);
  REQUIRE(b.wr.count(priv));
  CHECK(b.wr.at(priv).contains(4, 11));   // T1's flag write -> T2's flag ret
  REQUIRE(b.txwr.count(priv));
  CHECK(b.txwr.at(priv).contains(4, 11));  // both endpoints transactional
  int x = h.reg_index("flag_x");
  REQUIRE(b.wr.count(x));
  CHECK(b.wr.at(x).contains(0, 13));       // nu's write -> T2's x ret
  CHECK(!b.txwr.count(x));                 // nu is not transactional
}

TEST_CASE("base_relations: before-fence pairs transaction ends with fend") {
  History h = fig1a_fenced_shaped();
  RelationBundle b = base_relations(h);
  CHECK(b.bf.contains(7, 15));   // T2's committed before fend
  CHECK(b.bf.contains(13, 15));  // T1's committed before fend
  CHECK(b.af.empty());           // no transaction begins after the fence
  // real-time order: T2 ends before T1 begins
  CHECK(b.rt.contains(7, 8));
}

TEST_CASE("base_relations: after-fence pairs fbegin with later txbegins") {
  History h = make_history({
      {1, K::FBegin}, {1, K::FEnd},
      {2, K::TxBegin}, {2, K::Ok}, {2, K::TxCommit}, {2, K::Committed},
  });
  RelationBundle b = base_relations(h);
  CHECK(b.af.contains(0, 2));
  CHECK(b.bf.empty());  // the completion comes after fend
  Relation hb = happens_before(h);
  CHECK(hb.contains(0, 2));  // and transitively into the transaction
  CHECK(hb.contains(0, 5));
}

TEST_CASE("base_relations: xpo needs an intervening txbegin") {
  History h = fig2_shaped();
  RelationBundle b = base_relations(h);
  CHECK(b.xpo.contains(0, 4));    // nu's request, then T1 begins, then its write
  CHECK(!b.xpo.contains(2, 4));   // no txbegin strictly between
  CHECK(b.po.contains(2, 4));
}

TEST_CASE("happens_before: publication puts nu's write before T2's x read") {
  History h = fig2_shaped();
  Relation hb = happens_before(h);
  CHECK(hb.contains(0, 11));  // nu write -> T2's flag ret (xpo;txwr)
  CHECK(hb.contains(0, 12));  // ... and then by po to the x read request
  CHECK(hb.contains(0, 13));
}

TEST_CASE("happens_before: the fence orders T2 before nu") {
  History h = fig1a_fenced_shaped();
  Relation hb = happens_before(h);
  for (int i = 0; i <= 7; ++i) {
    CHECK(hb.contains(i, 16));  // every action of T2 happens before nu's write
    CHECK(hb.contains(i, 17));
  }
}

TEST_CASE("happens_before: empty history") {
  CHECK(happens_before(History{}).empty());
}

TEST_CASE("conflicts: single-thread history has none") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {1, K::ReadReq, "x"}, {1, K::RetVal, nullptr, 1},
  });
  CHECK(conflicts(h).empty());
}

TEST_CASE("conflicts: racy shape has exactly the two register conflicts") {
  History h = fig3_shaped();
  auto cs = conflicts(h);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].nontxn_index == 8);  // read x
  CHECK(cs[0].txn_index == 2);     // write x
  CHECK(cs[1].nontxn_index == 10);
  CHECK(cs[1].txn_index == 4);
}

TEST_CASE("conflicts: two non-transactional writes never conflict") {
  History h = make_history({
      {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {2, K::WriteReq, "x", 2}, {2, K::RetUnit},
  });
  CHECK(conflicts(h).empty());
}

TEST_CASE("races: racy shape has two races") {
  auto rs = races(fig3_shaped());
  CHECK(rs.size() == 2);
  CHECK_FALSE(is_drf(fig3_shaped()));
}

TEST_CASE("races: the fenced privatization shape is race-free") {
  CHECK(races(fig1a_fenced_shaped()).empty());
}

TEST_CASE("races: empty history is race-free") {
  CHECK(is_drf(History{}));
}

TEST_CASE("races: client order privatizes by agreement") {
  CHECK(races(fig6_shaped()).empty());
}

TEST_CASE("hb is transitive and irreflexive on random well-formed histories") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 150; ++i) {
    History h = random_history(rng, {});
    Relation hb = happens_before(h);
    CHECK(hb.irreflexive());
    const int n = int(h.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (hb.contains(a, b))
          for (int c = 0; c < n; ++c)
            if (hb.contains(b, c)) CHECK(hb.contains(a, c));
  }
}

TEST_CASE("hb is monotone under history extension") {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 60; ++i) {
    History h = random_history(rng, {});
    Relation full = happens_before(h);
    for (size_t len = 1; len < h.size(); ++len) {
      History prefix;
      prefix.regs = h.regs;
      prefix.actions.assign(h.actions.begin(), h.actions.begin() + len);
      if (!well_formed(prefix).ok()) continue;
      Relation hp = happens_before(prefix);
      for (auto [a, b] : hp.pairs()) CHECK(full.contains(a, b));
    }
  }
}

TEST_CASE("wr is a partial function into read responses") {
  std::mt19937_64 rng(303);
  for (int i = 0; i < 150; ++i) {
    History h = random_history(rng, {});
    RelationBundle b = base_relations(h);
    for (const auto& [x, rel] : b.wr) {
      std::map<int, int> preds;
      for (auto [w, r] : rel.pairs()) preds[r]++;
      for (const auto& [r, c] : preds) CHECK(c == 1);
    }
  }
}
