#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lineup/constraints.hpp"
#include "lineup/decimal.hpp"
#include "lineup/error.hpp"
#include "lineup/qubo.hpp"
#include "lineup/roster.hpp"

namespace lineup {

struct Pick {
  VarId variable = 0;
  std::string player;
  Position position = Position::GK;
  Decimal rating;

  friend bool operator==(const Pick&, const Pick&) = default;
};

/// Selected (player, position) pairs sorted by variable id, with their
/// exact total rating.
struct LineupSolution {
  std::vector<Pick> picks;
  Decimal total_rating;

  static LineupSolution from_picks(std::vector<Pick> picks) {
    std::sort(picks.begin(), picks.end(),
              [](const Pick& a, const Pick& b) { return a.variable < b.variable; });
    LineupSolution s;
    for (const auto& p : picks) s.total_rating += p.rating;
    s.picks = std::move(picks);
    return s;
  }

  /// Decision bits with exactly the picked ids set.
  Bits to_bits(std::size_t num_vars) const {
    Bits bits(num_vars, 0);
    for (const auto& p : picks) {
      if (p.variable < 1 || p.variable > num_vars)
        throw InvalidArgument("pick x_" + std::to_string(p.variable) +
                              " outside 1.." + std::to_string(num_vars));
      bits[p.variable - 1] = 1;
    }
    return bits;
  }

  friend bool operator==(const LineupSolution&, const LineupSolution&) = default;
};

// ---------------------------------------------------------------------------
// Feasibility

struct ConstraintCheck {
  std::string label;
  Comparator comparator = Comparator::equal;
  bool satisfied = false;
  std::int64_t lhs = 0;
  std::int64_t rhs = 0;
};

struct FeasibilityReport {
  std::vector<ConstraintCheck> checks;
  bool overall = true;

  std::vector<const ConstraintCheck*> violations() const {
    std::vector<const ConstraintCheck*> out;
    for (const auto& c : checks)
      if (!c.satisfied) out.push_back(&c);
    return out;
  }

  const ConstraintCheck* find(std::string_view label) const {
    for (const auto& c : checks)
      if (c.label == label) return &c;
    return nullptr;
  }
};

/// Evaluates the original constraints on the decision bits. Inequalities
/// are judged as plain `<=` here regardless of how they were penalised.
inline FeasibilityReport check_feasibility(
    const Bits& bits, const std::vector<LinearConstraint>& equalities,
    const std::vector<LinearConstraint>& inequalities) {
  FeasibilityReport report;
  auto run = [&](const LinearConstraint& c) {
    ConstraintCheck chk{c.label, c.comparator, false, c.lhs(bits), c.rhs};
    chk.satisfied = c.comparator == Comparator::equal ? chk.lhs == chk.rhs
                                                      : chk.lhs <= chk.rhs;
    report.overall = report.overall && chk.satisfied;
    report.checks.push_back(std::move(chk));
  };
  for (const auto& c : equalities) run(c);
  for (const auto& c : inequalities) run(c);
  return report;
}

// ---------------------------------------------------------------------------
// Decoding

/// Turns decision bits into picks. Slack bits must already be stripped:
/// any set bit above the index range is rejected.
inline LineupSolution decode_lineup(const Bits& bits, const VariableIndex& index,
                                    const RatingTable& table) {
  std::vector<Pick> picks;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (!bits[k]) continue;
    const auto id = static_cast<VarId>(k + 1);
    if (id > index.size())
      throw InvalidArgument("bit x_" + std::to_string(id) +
                            " is set but lies outside the " +
                            std::to_string(index.size()) +
                            " decision variables; strip slack bits first");
    const auto& slot = index.at(id);
    const auto rating = table.find(slot.player, slot.position);
    if (!rating)
      throw InvalidArgument("no rating for " + slot.player + " " +
                            std::string(to_string(slot.position)));
    picks.push_back({id, slot.player, slot.position, *rating});
  }
  return LineupSolution::from_picks(std::move(picks));
}

// ---------------------------------------------------------------------------
// Comparison

struct LineupDiff {
  std::vector<Pick> only_in_found;
  std::vector<Pick> only_in_reference;
  Decimal delta;  // found total - reference total

  bool identical() const noexcept {
    return only_in_found.empty() && only_in_reference.empty() &&
           delta == Decimal{};
  }
};

/// Picks are matched on (player, position); variable ids are carried along
/// for display only.
inline LineupDiff compare(const LineupSolution& found,
                          const LineupSolution& reference) {
  auto contains = [](const LineupSolution& s, const Pick& p) {
    return std::any_of(s.picks.begin(), s.picks.end(), [&](const Pick& q) {
      return q.player == p.player && q.position == p.position;
    });
  };
  LineupDiff diff;
  for (const auto& p : found.picks)
    if (!contains(reference, p)) diff.only_in_found.push_back(p);
  for (const auto& p : reference.picks)
    if (!contains(found, p)) diff.only_in_reference.push_back(p);
  diff.delta = found.total_rating - reference.total_rating;
  return diff;
}

// ---------------------------------------------------------------------------
// Line-up CSV: `variable,player,position,rating`

inline LineupSolution parse_lineup(std::string_view text) {
  const auto rows = detail::lines(text);
  if (rows.empty() ||
      detail::trim(rows.front()) != "variable,player,position,rating")
    throw ParseError("line-up: expected header 'variable,player,position,rating'");
  std::vector<Pick> picks;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (detail::trim(rows[i]).empty()) continue;
    const auto where = "line-up row " + std::to_string(i + 1) + ": ";
    const auto f = detail::split(rows[i], ',');
    if (f.size() != 4) throw ParseError(where + "expected 4 fields");
    auto var_tok = detail::trim(f[0]);
    if (var_tok.starts_with("x_")) var_tok.remove_prefix(2);
    VarId id = 0;
    auto [p, ec] =
        std::from_chars(var_tok.data(), var_tok.data() + var_tok.size(), id);
    if (ec != std::errc{} || p != var_tok.data() + var_tok.size() || id == 0)
      throw ParseError(where + "bad variable '" + std::string(f[0]) + "'");
    const auto pos = parse_position(detail::trim(f[2]));
    if (!pos)
      throw ParseError(where + "unknown position code '" +
                       std::string(detail::trim(f[2])) + "'");
    Decimal rating;
    try {
      rating = Decimal::parse(detail::trim(f[3]), 1, 2);
    } catch (const ParseError&) {
      throw ParseError(where + "malformed rating '" +
                       std::string(detail::trim(f[3])) + "'");
    }
    picks.push_back({id, std::string(detail::trim(f[1])), *pos, rating});
  }
  return LineupSolution::from_picks(std::move(picks));
}

inline std::string format_lineup(const LineupSolution& s) {
  std::ostringstream os;
  os << "variable,player,position,rating\n";
  for (const auto& p : s.picks)
    os << p.variable << ',' << p.player << ',' << to_string(p.position) << ','
       << p.rating << '\n';
  return os.str();
}

}  // namespace lineup
