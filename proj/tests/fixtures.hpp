#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "lineup/lineup.hpp"

namespace fixtures {

inline std::string data_path(const std::string& rel) {
  return std::string(LINEUP_DATA_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& rel) {
  std::ifstream in(data_path(rel), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const lineup::RatingTable& figure1() {
  static const auto table = lineup::parse_roster(slurp("figure1.csv"));
  return table;
}

inline lineup::FormationSpec formation(const std::string& name) {
  return lineup::parse_formation(slurp("formations/" + name + ".json"));
}

}  // namespace fixtures
