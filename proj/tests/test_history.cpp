#include "doctest.h"

#include <random>
#include <stdexcept>

#include "tmcheck/history.hpp"

#include "support.hpp"

using namespace tmcheck;
using namespace tmcheck::test;
using K = ActionKind;

TEST_CASE("well_formed: empty trace has an empty report") {
  CHECK(well_formed(Trace{}).ok());
}

TEST_CASE("well_formed: H_0 is well-formed") {
  CHECK(well_formed(h0()).ok());
}

TEST_CASE("well_formed: fence completion rule") {
  // t1 begins a transaction and never completes it; t2 runs a full fence
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok},
      {2, K::FBegin}, {2, K::FEnd},
  });
  WellFormednessReport rep = well_formed(h);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations.size() == 1);
  CHECK(rep.violations[0].rule == 10);
}

TEST_CASE("well_formed: fence waits are satisfied by completions in either window") {
  // completion before the fence begins
  History before = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::TxCommit}, {1, K::Committed},
      {2, K::FBegin}, {2, K::FEnd},
  });
  CHECK(well_formed(before).ok());
  // completion between fbegin and fend
  History inside = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::TxCommit},
      {2, K::FBegin}, {1, K::Committed}, {2, K::FEnd},
  });
  CHECK(well_formed(inside).ok());
}

TEST_CASE("well_formed: duplicate ids, duplicate write values, initial-value writes") {
  History h = h0();
  h.actions[3].id = h.actions[0].id;
  auto rep = well_formed(h);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations[0].rule == 1);

  History w = make_history({
      {1, K::WriteReq, "x", 5}, {1, K::RetUnit},
      {2, K::WriteReq, "y", 5}, {2, K::RetUnit},
  });
  rep = well_formed(w);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations[0].rule == 3);

  History z = make_history({{1, K::WriteReq, "x", 0}, {1, K::RetUnit}});
  rep = well_formed(z);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations[0].rule == 3);
}

TEST_CASE("well_formed: request/response alternation per thread") {
  History h = make_history({{1, K::ReadReq, "x"}, {1, K::ReadReq, "x"}});
  auto rep = well_formed(h);
  bool rule5 = false;
  for (const auto& v : rep.violations) rule5 |= v.rule == 5;
  CHECK(rule5);

  // mismatched response kind
  History m = make_history({{1, K::TxBegin}, {1, K::RetUnit}});
  rep = well_formed(m);
  rule5 = false;
  for (const auto& v : rep.violations) rule5 |= v.rule == 5;
  CHECK(rule5);
}

TEST_CASE("well_formed: primitive action while a request is pending") {
  History h = make_history({{1, K::ReadReq, "x"}, {1, K::Prim}});
  auto rep = well_formed(h);
  bool rule4 = false;
  for (const auto& v : rep.violations) rule4 |= v.rule == 4;
  CHECK(rule4);
}

TEST_CASE("well_formed: non-transactional accesses are adjacent and never abort") {
  // t2's action intervenes between t1's non-transactional request and response
  History h = make_history({
      {1, K::ReadReq, "x"}, {2, K::WriteReq, "x", 3}, {2, K::RetUnit},
      {1, K::RetVal, nullptr, 0},
  });
  auto rep = well_formed(h);
  bool rule7 = false;
  for (const auto& v : rep.violations) rule7 |= v.rule == 7;
  CHECK(rule7);

  History ab = make_history({{1, K::ReadReq, "x"}, {1, K::Aborted}});
  rep = well_formed(ab);
  bool rule8 = false;
  for (const auto& v : rep.violations) rule8 |= v.rule == 8;
  CHECK(rule8);
}

TEST_CASE("well_formed: fence actions inside a transaction") {
  History h = make_history({{1, K::TxBegin}, {1, K::Ok}, {1, K::FBegin}});
  auto rep = well_formed(h);
  bool rule9 = false;
  for (const auto& v : rep.violations) rule9 |= v.rule == 9;
  CHECK(rule9);
}

TEST_CASE("classify: H_0 partitions into T1 commit-pending, T2 live, one access") {
  Classification cls = classify(h0());
  REQUIRE(cls.txns.size() == 2);
  CHECK(cls.txns[0].thread == 1);
  CHECK(cls.txns[0].status == TxnStatus::CommitPending);
  CHECK(cls.txns[1].thread == 2);
  CHECK(cls.txns[1].status == TxnStatus::Live);
  REQUIRE(cls.nontxn.size() == 1);
  CHECK(cls.nontxn[0].thread == 3);
  CHECK_FALSE(cls.nontxn[0].is_write);
  CHECK(cls.nontxn[0].value == 1);
  CHECK(cls.fence_actions.empty());
}

TEST_CASE("classify: a lone fence leaves both partitions empty") {
  Classification cls = classify(make_history({{1, K::FBegin}, {1, K::FEnd}}));
  CHECK(cls.txns.empty());
  CHECK(cls.nontxn.empty());
  CHECK(cls.fence_actions.size() == 2);
}

TEST_CASE("classify: one full committed transaction") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 7}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
  });
  Classification cls = classify(h);
  REQUIRE(cls.txns.size() == 1);
  CHECK(cls.txns[0].status == TxnStatus::Committed);
  CHECK(cls.txns[0].actions.size() == 6);
}

TEST_CASE("classify is a partition of the history") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    History h = random_history(rng, {});
    REQUIRE(well_formed(h).ok());
    Classification cls = classify(h);
    size_t total = cls.fence_actions.size();
    for (const auto& tv : cls.txns) total += tv.actions.size();
    for (const auto& nu : cls.nontxn) total += nu.response_index >= 0 ? 2 : 1;
    CHECK(total == h.size());
  }
}

TEST_CASE("complete: committing H_0's T1 inserts committed after its txcommit") {
  History h = h0();
  History c = complete(h, {{0, CompletionDecision::Commit}});
  REQUIRE(c.size() == h.size() + 1);
  CHECK(c[5].kind == K::Committed);
  CHECK(c[5].thread == 1);
  // H is a subsequence of the completion
  CHECK(c[4].kind == K::TxCommit);
  Classification cls = classify(c);
  CHECK(cls.txns[0].status == TxnStatus::Committed);
  CHECK(cls.txns[1].status == TxnStatus::Live);
}

TEST_CASE("complete: aborting decision inserts aborted") {
  History c = complete(h0(), {{0, CompletionDecision::Abort}});
  CHECK(c[5].kind == K::Aborted);
  CHECK(classify(c).txns[0].status == TxnStatus::Aborted);
}

TEST_CASE("complete: no commit-pending transactions, empty decisions") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::TxCommit}, {1, K::Committed},
  });
  History c = complete(h, {});
  CHECK(c.size() == h.size());
}

TEST_CASE("complete: subsequence and size over random histories") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 120; ++i) {
    History h = random_history(rng, {});
    Classification cls = classify(h);
    std::map<int, CompletionDecision> decisions;
    int pending = 0;
    for (size_t t = 0; t < cls.txns.size(); ++t)
      if (cls.txns[t].status == TxnStatus::CommitPending) {
        ++pending;
        decisions[int(t)] = (t % 2) ? CompletionDecision::Abort : CompletionDecision::Commit;
      }
    History c = complete(h, decisions);
    CHECK(c.size() == h.size() + size_t(pending));
    // h is a subsequence of c
    size_t j = 0;
    for (size_t k = 0; k < c.size() && j < h.size(); ++k)
      if (c[k] == h[j]) ++j;
    CHECK(j == h.size());
    // no commit-pending transactions remain
    for (const TransactionView& tv : classify(c).txns)
      CHECK(tv.status != TxnStatus::CommitPending);
  }
}

TEST_CASE("complete: bad decision maps are rejected") {
  CHECK_THROWS_AS(complete(h0(), {}), std::invalid_argument);
  CHECK_THROWS_AS(complete(h0(), {{1, CompletionDecision::Commit}}), std::invalid_argument);
  CHECK_THROWS_AS(
      complete(h0(), {{0, CompletionDecision::Commit}, {1, CompletionDecision::Commit}}),
      std::invalid_argument);
}

TEST_CASE("codec: H_0 fixture decodes to 10 actions and round-trips") {
  Trace t = decode_file(std::string(TMCHECK_FIXTURES) + "/h0.jsonl");
  CHECK(t.size() == 10);
  CHECK(well_formed(t).ok());
  std::string bytes = encode(t);
  Trace again = decode(bytes);
  CHECK(encode(again) == bytes);
  REQUIRE(again.size() == t.size());
  for (size_t i = 0; i < t.size(); ++i) CHECK(same_action(t, t[i], again, again[i]));
}

TEST_CASE("codec: schema errors") {
  CHECK_THROWS(decode(R"({"id":0,"thread":1,"kind":"write","reg":"x"})"));  // missing val
  CHECK_THROWS(decode(R"({"id":0,"thread":1,"kind":"wibble"})"));           // unknown kind
  CHECK_THROWS(decode("{\"id\":0,\"thread\":1,\"kind\":\"ok\"}\n"
                      "{\"id\":0,\"thread\":2,\"kind\":\"ok\"}"));          // duplicate id
  CHECK_THROWS(decode(R"({"id":0,"thread":0,"kind":"ok"})"));               // bad thread
  CHECK_THROWS(decode(R"({"id":0,"thread":1,"kind":"ok","extra":1})"));     // stray field
  CHECK_THROWS(decode("not json"));
}

TEST_CASE("codec: decode/encode identity on random histories") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    History h = random_history(rng, {});
    Trace rt = decode(encode(h));
    REQUIRE(rt.size() == h.size());
    for (size_t k = 0; k < h.size(); ++k) CHECK(same_action(h, h[k], rt, rt[k]));
  }
}

TEST_CASE("per-thread projections alternate request/response from a request") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    History h = random_history(rng, {});
    REQUIRE(well_formed(h).ok());
    std::map<int, int> pending;  // thread -> 0/1
    for (const Action& a : h.actions) {
      auto& p = pending[a.thread];
      if (is_request(a.kind)) {
        CHECK(p == 0);
        p = 1;
      } else if (is_response(a.kind)) {
        CHECK(p == 1);
        p = 0;
      }
    }
  }
}
