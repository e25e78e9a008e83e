#pragma once

#include <string>

#include "tmcheck/explore.hpp"
#include "tmcheck/opacity.hpp"

namespace tmcheck {

std::string exploration_report_json(const ExplorationReport& rep);
std::string opacity_verdict_json(const OpacityVerdict& v);
std::string wf_report_json(const WellFormednessReport& rep);
std::string races_json(const History& h, const std::vector<Race>& rs);

}  // namespace tmcheck
