#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lineup/decimal.hpp"
#include "lineup/error.hpp"

namespace lineup {

/// Playing position. Declaration order is the canonical column order of the
/// rating table and drives variable numbering.
enum class Position : std::uint8_t { GK, DC, DL, DR, DM, CM, AM, FWL, FWR, FW };

inline constexpr std::array<Position, 10> kAllPositions = {
    Position::GK, Position::DC, Position::DL,  Position::DR,  Position::DM,
    Position::CM, Position::AM, Position::FWL, Position::FWR, Position::FW};

constexpr std::string_view to_string(Position p) noexcept {
  constexpr std::array<std::string_view, 10> names = {
      "GK", "DC", "DL", "DR", "DM", "CM", "AM", "FWL", "FWR", "FW"};
  return names[static_cast<std::size_t>(p)];
}

inline std::optional<Position> parse_position(std::string_view token) {
  for (Position p : kAllPositions)
    if (to_string(p) == token) return p;
  return std::nullopt;
}

/// 1-based binary variable id (x_1 .. x_n, slacks above n).
using VarId = std::uint32_t;

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Splits text into lines, dropping a trailing '\r' and a UTF-8 BOM.
inline std::vector<std::string_view> lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
  }
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

}  // namespace detail

struct RatingEntry {
  std::string player;
  Position position;
  Decimal rating;

  friend bool operator==(const RatingEntry&, const RatingEntry&) = default;
};

/// Sparse player x position rating table. Entries keep input order; no
/// duplicate (player, position) pair; ratings strictly positive.
class RatingTable {
 public:
  RatingTable() = default;

  explicit RatingTable(std::vector<RatingEntry> entries) {
    for (auto& e : entries) add(std::move(e));
  }

  void add(RatingEntry e) {
    e.player = std::string(detail::trim(e.player));
    if (e.player.empty()) throw InvalidArgument("empty player name");
    if (e.rating <= Decimal{}) {
      throw InvalidArgument("rating for " + e.player + " " +
                            std::string(to_string(e.position)) +
                            " must be positive");
    }
    if (find(e.player, e.position)) {
      throw InvalidArgument("duplicate (player, position) pair (" + e.player +
                            ", " + std::string(to_string(e.position)) + ")");
    }
    entries_.push_back(std::move(e));
  }

  const std::vector<RatingEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::optional<Decimal> find(std::string_view player, Position pos) const {
    for (const auto& e : entries_)
      if (e.player == player && e.position == pos) return e.rating;
    return std::nullopt;
  }

  /// Players in order of first appearance.
  std::vector<std::string> players() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
      if (std::find(out.begin(), out.end(), e.player) == out.end())
        out.push_back(e.player);
    return out;
  }

 private:
  std::vector<RatingEntry> entries_;
};

/// Parses the roster CSV (`player,position,rating`). Ratings need one or
/// two decimal places.
inline RatingTable parse_roster(std::string_view source) {
  const auto rows = detail::lines(source);
  if (rows.empty() || detail::trim(rows.front()) != "player,position,rating") {
    throw ParseError("roster: expected header 'player,position,rating'");
  }
  RatingTable table;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::size_t row_no = i + 1;
    const auto row = rows[i];
    if (detail::trim(row).empty()) continue;
    const auto fields = detail::split(row, ',');
    auto where = [&] { return "roster row " + std::to_string(row_no) + ": "; };
    if (fields.size() != 3)
      throw ParseError(where() + "expected 3 fields, got " +
                       std::to_string(fields.size()));
    const auto player = detail::trim(fields[0]);
    const auto token = detail::trim(fields[1]);
    const auto pos = parse_position(token);
    if (!pos)
      throw ParseError(where() + "unknown position code '" +
                       std::string(token) + "'");
    Decimal rating;
    try {
      rating = Decimal::parse(detail::trim(fields[2]), 1, 2);
    } catch (const ParseError&) {
      throw ParseError(where() + "malformed rating '" +
                       std::string(detail::trim(fields[2])) + "'");
    }
    if (rating <= Decimal{})
      throw ParseError(where() + "rating must be positive");
    if (player.empty()) throw ParseError(where() + "empty player name");
    if (table.find(player, *pos)) {
      throw ParseError(where() + "duplicate pair (" + std::string(player) +
                       ", " + std::string(token) + ")");
    }
    table.add({std::string(player), *pos, rating});
  }
  return table;
}

inline std::string format_roster(const RatingTable& table) {
  std::ostringstream os;
  os << "player,position,rating\n";
  for (const auto& e : table.entries())
    os << e.player << ',' << to_string(e.position) << ',' << e.rating << '\n';
  return os.str();
}

struct PlayerSlot {
  std::string player;
  Position position;

  friend auto operator<=>(const PlayerSlot&, const PlayerSlot&) = default;
};

/// Bijection between (player, position) pairs and ids 1..n. Column-major:
/// every GK entry first, then DC, ... through FW; players within a column
/// keep their first-appearance order from the table.
class VariableIndex {
 public:
  VariableIndex() = default;

  explicit VariableIndex(std::vector<PlayerSlot> order) : order_(std::move(order)) {
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const auto [it, inserted] =
          lookup_.emplace(order_[i], static_cast<VarId>(i + 1));
      if (!inserted) throw InvalidArgument("variable index: duplicate slot");
    }
  }

  std::size_t size() const noexcept { return order_.size(); }

  const PlayerSlot& at(VarId id) const {
    if (id < 1 || id > order_.size())
      throw InvalidArgument("variable id " + std::to_string(id) +
                            " out of range 1.." +
                            std::to_string(order_.size()));
    return order_[id - 1];
  }

  std::optional<VarId> find(std::string_view player, Position pos) const {
    const auto it = lookup_.find(PlayerSlot{std::string(player), pos});
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  /// Ids of one position column, ascending.
  std::vector<VarId> ids_for(Position pos) const {
    std::vector<VarId> out;
    for (std::size_t i = 0; i < order_.size(); ++i)
      if (order_[i].position == pos) out.push_back(static_cast<VarId>(i + 1));
    return out;
  }

  /// Ids of one player, ascending.
  std::vector<VarId> ids_for(std::string_view player) const {
    std::vector<VarId> out;
    for (std::size_t i = 0; i < order_.size(); ++i)
      if (order_[i].player == player) out.push_back(static_cast<VarId>(i + 1));
    return out;
  }

  const std::vector<PlayerSlot>& order() const noexcept { return order_; }

 private:
  std::vector<PlayerSlot> order_;
  std::map<PlayerSlot, VarId> lookup_;
};

inline VariableIndex build_variable_index(const RatingTable& table) {
  if (table.empty())
    throw InvalidArgument("cannot index an empty rating table");
  std::vector<PlayerSlot> order;
  order.reserve(table.size());
  const auto players = table.players();
  for (Position pos : kAllPositions)
    for (const auto& name : players)
      if (table.find(name, pos)) order.push_back({name, pos});
  return VariableIndex(std::move(order));
}

/// Rating of each indexed pair; element k holds the coefficient of x_{k+1}.
inline std::vector<Decimal> objective_coefficients(const VariableIndex& index,
                                                   const RatingTable& table) {
  std::vector<Decimal> out;
  out.reserve(index.size());
  for (const auto& slot : index.order()) {
    const auto r = table.find(slot.player, slot.position);
    if (!r)
      throw InvalidArgument("index entry (" + slot.player + ", " +
                            std::string(to_string(slot.position)) +
                            ") missing from rating table");
    out.push_back(*r);
  }
  return out;
}

}  // namespace lineup
