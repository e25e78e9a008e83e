#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "tmcheck/history.hpp"

#include "json.hpp"

namespace tmcheck {

namespace {

bool kind_from_string(const std::string& s, ActionKind& out) {
  static const std::pair<const char*, ActionKind> table[] = {
      {"txbegin", ActionKind::TxBegin}, {"ok", ActionKind::Ok},
      {"txcommit", ActionKind::TxCommit}, {"committed", ActionKind::Committed},
      {"aborted", ActionKind::Aborted}, {"write", ActionKind::WriteReq},
      {"read", ActionKind::ReadReq}, {"ret", ActionKind::RetVal},
      {"retu", ActionKind::RetUnit}, {"fbegin", ActionKind::FBegin},
      {"fend", ActionKind::FEnd}, {"prim", ActionKind::Prim},
  };
  for (const auto& [name, kind] : table)
    if (s == name) { out = kind; return true; }
  return false;
}

bool kind_has_reg(ActionKind k) {
  return k == ActionKind::WriteReq || k == ActionKind::ReadReq;
}

bool kind_has_val(ActionKind k) {
  return k == ActionKind::WriteReq || k == ActionKind::RetVal;
}

}  // namespace

std::string encode(const Trace& t) {
  std::ostringstream os;
  for (const Action& a : t.actions) {
    os << "{\"id\":" << a.id << ",\"thread\":" << a.thread << ",\"kind\":\""
       << kind_name(a.kind) << "\"";
    if (kind_has_reg(a.kind)) {
      os << ",\"reg\":" << nlohmann::json(t.reg_name(a.reg)).dump();
    }
    if (kind_has_val(a.kind)) os << ",\"val\":" << a.val;
    os << "}\n";
  }
  return os.str();
}

Trace decode(const std::string& bytes) {
  Trace out;
  std::unordered_set<int64_t> ids;
  std::istringstream is(bytes);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("decode: line " + std::to_string(lineno) +
                               ": malformed JSON: " + e.what());
    }
    auto fail = [lineno](const std::string& msg) -> std::runtime_error {
      return std::runtime_error("decode: line " + std::to_string(lineno) + ": " + msg);
    };
    if (!j.is_object()) throw fail("not an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k != "id" && k != "thread" && k != "kind" && k != "reg" && k != "val")
        throw fail("unexpected field '" + k + "'");
    }
    if (!j.contains("id") || !j["id"].is_number_integer()) throw fail("missing integer 'id'");
    if (!j.contains("thread") || !j["thread"].is_number_integer())
      throw fail("missing integer 'thread'");
    if (!j.contains("kind") || !j["kind"].is_string()) throw fail("missing string 'kind'");

    Action a;
    a.id = j["id"].get<int64_t>();
    a.thread = j["thread"].get<int>();
    if (a.thread < 1) throw fail("thread must be >= 1");
    if (!kind_from_string(j["kind"].get<std::string>(), a.kind))
      throw fail("unknown kind '" + j["kind"].get<std::string>() + "'");

    if (kind_has_reg(a.kind)) {
      if (!j.contains("reg") || !j["reg"].is_string())
        throw fail(std::string("kind '") + kind_name(a.kind) + "' requires string 'reg'");
      a.reg = out.intern_reg(j["reg"].get<std::string>());
    } else if (j.contains("reg")) {
      throw fail(std::string("kind '") + kind_name(a.kind) + "' does not take 'reg'");
    }
    if (kind_has_val(a.kind)) {
      if (!j.contains("val") || !j["val"].is_number_integer())
        throw fail(std::string("kind '") + kind_name(a.kind) + "' requires integer 'val'");
      a.val = j["val"].get<int64_t>();
    } else if (j.contains("val")) {
      throw fail(std::string("kind '") + kind_name(a.kind) + "' does not take 'val'");
    }
    if (!ids.insert(a.id).second)
      throw fail("duplicate action id " + std::to_string(a.id));
    out.actions.push_back(a);
  }
  return out;
}

Trace decode_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode(ss.str());
}

void encode_file(const Trace& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << encode(t);
}

}  // namespace tmcheck
