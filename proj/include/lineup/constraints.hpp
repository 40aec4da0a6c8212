#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lineup/error.hpp"
#include "lineup/roster.hpp"

namespace lineup {

enum class Comparator { equal, at_most };

constexpr std::string_view to_string(Comparator c) noexcept {
  return c == Comparator::equal ? "=" : "<=";
}

/// sum(coef * x_id) (= | <=) rhs.
struct LinearConstraint {
  std::map<VarId, std::int64_t> terms;
  Comparator comparator = Comparator::equal;
  std::int64_t rhs = 0;
  std::string label;

  std::int64_t lhs(const std::vector<std::uint8_t>& bits) const {
    std::int64_t sum = 0;
    for (const auto& [id, coef] : terms) {
      if (id < 1 || id > bits.size())
        throw InvalidArgument("constraint '" + label + "' references x_" +
                              std::to_string(id) + " outside the assignment");
      sum += coef * bits[id - 1];
    }
    return sum;
  }

  bool satisfied_by(const std::vector<std::uint8_t>& bits) const {
    const auto v = lhs(bits);
    return comparator == Comparator::equal ? v == rhs : v <= rhs;
  }

  friend bool operator==(const LinearConstraint&,
                         const LinearConstraint&) = default;
};

inline LinearConstraint make_selection_constraint(
    const std::vector<VarId>& ids, Comparator cmp, std::int64_t rhs,
    std::string label) {
  if (ids.empty()) throw InvalidArgument("constraint '" + label + "' is empty");
  if (rhs < 0) throw InvalidArgument("constraint '" + label + "' has rhs < 0");
  LinearConstraint c;
  for (VarId id : ids) c.terms[id] = 1;
  c.comparator = cmp;
  c.rhs = rhs;
  c.label = std::move(label);
  return c;
}

/// Human-readable role name used in constraint labels ("2 central defenders").
constexpr std::string_view describe(Position p, bool plural) noexcept {
  switch (p) {
    case Position::GK: return plural ? "goalkeepers" : "goalkeeper";
    case Position::DC: return plural ? "central defenders" : "central defender";
    case Position::DL:
      return plural ? "left-hand side defenders" : "left-hand side defender";
    case Position::DR:
      return plural ? "right-hand side defenders" : "right-hand side defender";
    case Position::DM:
      return plural ? "defensive midfielders" : "defensive midfielder";
    case Position::CM:
      return plural ? "central midfielders" : "central midfielder";
    case Position::AM:
      return plural ? "attacking midfielders" : "attacking midfielder";
    case Position::FWL: return plural ? "left forwards" : "left forward";
    case Position::FWR: return plural ? "right forwards" : "right forward";
    case Position::FW: return plural ? "forwards/strikers" : "forward/striker";
  }
  return "";
}

inline std::string quota_label(Position p, std::int64_t quota) {
  return std::to_string(quota) + " " + std::string(describe(p, quota != 1));
}

// ---------------------------------------------------------------------------
// Formations

struct FormationSpec {
  std::string name;
  std::map<Position, std::int64_t> quotas;
  std::int64_t total = 0;

  /// Checks the quota arithmetic only; roster coverage is checked by
  /// formation_constraints.
  void validate() const {
    if (total <= 0)
      throw InvalidArgument("formation '" + name + "': total must be positive");
    std::int64_t sum = 0;
    for (const auto& [pos, q] : quotas) {
      if (q < 0)
        throw InvalidArgument("formation '" + name + "': negative quota for " +
                              std::string(to_string(pos)));
      sum += q;
    }
    if (sum != total)
      throw InvalidArgument("formation '" + name + "': quotas sum to " +
                            std::to_string(sum) + ", total is " +
                            std::to_string(total));
  }
};

inline FormationSpec parse_formation(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("formation: ") + e.what());
  }
  FormationSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    spec.total = j.at("total").get<std::int64_t>();
    for (const auto& [key, value] : j.at("quotas").items()) {
      const auto pos = parse_position(key);
      if (!pos)
        throw ParseError("formation '" + spec.name +
                         "': unknown position code '" + key + "'");
      spec.quotas[*pos] = value.get<std::int64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("formation: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  return spec;
}

inline nlohmann::json formation_to_json(const FormationSpec& spec) {
  nlohmann::json quotas = nlohmann::json::object();
  for (const auto& [pos, q] : spec.quotas) quotas[std::string(to_string(pos))] = q;
  return {{"name", spec.name}, {"total", spec.total}, {"quotas", quotas}};
}

inline constexpr std::string_view kFormation433Json =
    R"({"name": "4-3-3", "total": 11, "quotas": {"GK":1,"DC":2,"DL":1,"DR":1,"CM":3,"FWL":1,"FWR":1,"FW":1}})";
inline constexpr std::string_view kFormation4231Json =
    R"({"name": "4-2-3-1", "total": 11, "quotas": {"GK":1,"DC":2,"DL":1,"DR":1,"DM":2,"AM":3,"FW":1}})";

/// Resolves the built-in names "4-3-3" and "4-2-3-1".
inline std::optional<FormationSpec> builtin_formation(std::string_view name) {
  if (name == "4-3-3") return parse_formation(kFormation433Json);
  if (name == "4-2-3-1") return parse_formation(kFormation4231Json);
  return std::nullopt;
}

/// One equality over every variable for the squad size, then one equality
/// per position with a positive quota, in position order. Zero-quota
/// positions get no constraint of their own; the total forces them to 0.
inline std::vector<LinearConstraint> formation_constraints(
    const FormationSpec& spec, const VariableIndex& index) {
  spec.validate();
  std::vector<VarId> all(index.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<VarId>(i + 1);

  std::vector<LinearConstraint> out;
  out.push_back(make_selection_constraint(
      all, Comparator::equal, spec.total,
      std::to_string(spec.total) + (spec.total == 1 ? " player" : " players")));
  for (Position pos : kAllPositions) {
    const auto it = spec.quotas.find(pos);
    if (it == spec.quotas.end() || it->second == 0) continue;
    const auto ids = index.ids_for(pos);
    const auto label = quota_label(pos, it->second);
    if (ids.empty()) {
      throw InfeasibleError(label, "formation '" + spec.name + "' requires " +
                                       label + " but the roster has no " +
                                       std::string(to_string(pos)) +
                                       " candidates");
    }
    out.push_back(
        make_selection_constraint(ids, Comparator::equal, it->second, label));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Same-player conflicts

/// `auto_detect` covers every multi-position player. `paper_exact` is the
/// fixed ten-row list for the 43-variable reference roster, which leaves
/// Fabinho, Firmino, Minamino and Origi unconstrained.
enum class ConflictMode { paper_exact, auto_detect };

constexpr std::string_view to_string(ConflictMode m) noexcept {
  return m == ConflictMode::paper_exact ? "paper" : "auto";
}

inline std::optional<ConflictMode> parse_conflict_mode(std::string_view s) {
  if (s == "paper" || s == "paper-exact") return ConflictMode::paper_exact;
  if (s == "auto") return ConflictMode::auto_detect;
  return std::nullopt;
}

/// Conflict rows for the 43-variable reference roster, by variable id.
inline const std::array<std::vector<VarId>, 10>& reference_conflict_rows() {
  static const std::array<std::vector<VarId>, 10> rows = {{
      {8, 12, 17},
      {9, 13},
      {10, 14, 18},
      {15, 20, 29},
      {11, 22},
      {16, 24},
      {26, 30},
      {32, 34},
      {37, 40},
      {28, 33, 35, 38, 42},
  }};
  return rows;
}

/// Label prefix of the reference conflict row that carries no slack variable.
inline constexpr std::string_view kSlackFreeConflictLabel = "I_10";

inline std::vector<LinearConstraint> conflict_constraints(
    const VariableIndex& index, ConflictMode mode) {
  std::vector<LinearConstraint> out;
  if (mode == ConflictMode::paper_exact) {
    if (index.size() != 43)
      throw InvalidArgument(
          "paper-exact conflicts require the 43-variable reference roster, "
          "got " + std::to_string(index.size()) + " variables");
    const auto& rows = reference_conflict_rows();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& player = index.at(rows[r].front()).player;
      for (VarId id : rows[r]) {
        if (index.at(id).player != player)
          throw InvalidArgument(
              "paper-exact conflicts: x_" + std::to_string(id) +
              " does not belong to " + player +
              "; roster is not the reference fixture");
      }
      out.push_back(make_selection_constraint(
          rows[r], Comparator::at_most, 1,
          "I_" + std::to_string(r + 1) + " " + player));
    }
    return out;
  }
  std::vector<std::string> players;
  for (const auto& slot : index.order())
    if (std::find(players.begin(), players.end(), slot.player) == players.end())
      players.push_back(slot.player);
  // Order rows by the player's smallest variable id.
  std::vector<std::pair<VarId, std::string>> multi;
  for (const auto& p : players) {
    const auto ids = index.ids_for(p);
    if (ids.size() >= 2) multi.emplace_back(ids.front(), p);
  }
  std::sort(multi.begin(), multi.end());
  for (const auto& [first, player] : multi) {
    out.push_back(make_selection_constraint(index.ids_for(player),
                                            Comparator::at_most, 1,
                                            player + " in one position"));
  }
  return out;
}

}  // namespace lineup
