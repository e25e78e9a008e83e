#include "tmcheck/report_json.hpp"

#include "json.hpp"

namespace tmcheck {

namespace {

nlohmann::json schedule_json(const std::vector<Choice>& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Choice& c : s) {
    nlohmann::json e;
    e["t"] = c.thread;
    if (c.variant) e["v"] = c.variant;
    arr.push_back(e);
  }
  return arr;
}

nlohmann::json finals_json(const FinalState& f) {
  nlohmann::json j;
  for (const auto& [n, v] : f.registers) j["registers"][n] = v;
  for (const auto& [n, v] : f.locals) j["locals"][n] = v.to_string();
  return j;
}

nlohmann::json outcome_json(const Outcome& o) {
  nlohmann::json j;
  j["schedule"] = schedule_json(o.schedule);
  j["final"] = finals_json(o.finals);
  j["post_ok"] = o.post_ok;
  if (o.diverged) j["diverged"] = true;
  if (o.deadlock) j["deadlock"] = true;
  if (!o.note.empty()) j["note"] = o.note;
  return j;
}

}  // namespace

std::string exploration_report_json(const ExplorationReport& rep) {
  nlohmann::json j;
  j["program"] = rep.program;
  j["tm"] = rep.tm;
  j["schedules_explored"] = rep.schedules_explored;
  j["completed"] = rep.completed;
  j["violations"] = rep.violations;
  j["divergences"] = rep.divergences;
  j["deadlocks"] = rep.deadlocks;
  j["bound_exceeded"] = rep.bound_exceeded;
  if (rep.wf_checked) {
    j["well_formed_checked"] = rep.wf_checked;
    j["well_formed_failures"] = rep.wf_failures;
  }
  j["drf"]["histories_checked"] = rep.drf.histories_checked;
  j["drf"]["racy_histories"] = rep.drf.racy_histories;
  if (!rep.outcomes.empty()) {
    nlohmann::json all = nlohmann::json::array();
    for (const Outcome& o : rep.outcomes) all.push_back(outcome_json(o));
    j["outcomes"] = all;
  }
  nlohmann::json viol = nlohmann::json::array();
  for (const Outcome& o : rep.violation_outcomes) viol.push_back(outcome_json(o));
  j["violating_outcomes"] = viol;
  nlohmann::json divs = nlohmann::json::array();
  for (const Outcome& o : rep.divergence_outcomes) divs.push_back(outcome_json(o));
  j["divergent_outcomes"] = divs;
  return j.dump(2);
}

std::string opacity_verdict_json(const OpacityVerdict& v) {
  nlohmann::json j;
  j["verdict"] = verdict_name(v.kind);
  if (!v.detail.empty()) j["detail"] = v.detail;
  if (!v.race_list.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Race& r : v.race_list) {
      nlohmann::json e;
      e["nontxn_action"] = r.conflict.nontxn_index;
      e["txn_action"] = r.conflict.txn_index;
      e["note"] = r.note;
      arr.push_back(e);
    }
    j["races"] = arr;
  }
  if (v.witness) {
    nlohmann::json theta = nlohmann::json::array();
    for (size_t i = 0; i < v.witness->theta.size(); ++i)
      theta.push_back({int(i), v.witness->theta[i]});
    j["theta"] = theta;
  }
  return j.dump(2);
}

std::string wf_report_json(const WellFormednessReport& rep) {
  nlohmann::json j;
  j["well_formed"] = rep.ok();
  nlohmann::json arr = nlohmann::json::array();
  for (const WfViolation& v : rep.violations) {
    nlohmann::json e;
    e["rule"] = v.rule;
    e["index"] = v.index;
    e["message"] = v.message;
    arr.push_back(e);
  }
  j["violations"] = arr;
  return j.dump(2);
}

std::string races_json(const History& h, const std::vector<Race>& rs) {
  nlohmann::json j;
  j["drf"] = rs.empty();
  nlohmann::json arr = nlohmann::json::array();
  for (const Race& r : rs) {
    nlohmann::json e;
    e["nontxn_action"] = r.conflict.nontxn_index;
    e["txn_action"] = r.conflict.txn_index;
    e["register"] = h.reg_name(r.conflict.reg);
    e["note"] = r.note;
    arr.push_back(e);
  }
  j["races"] = arr;
  return j.dump(2);
}

}  // namespace tmcheck
