#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lineup/constraints.hpp"
#include "lineup/decimal.hpp"
#include "lineup/error.hpp"
#include "lineup/roster.hpp"

namespace lineup {

using Bits = std::vector<std::uint8_t>;

/// Binary quadratic model over ids 1..num_vars:
///   E(x) = offset + sum_i linear_i x_i + sum_{i<j} quadratic_ij x_i x_j
/// All coefficients are exact decimals.
class Bqm {
 public:
  using Pair = std::pair<VarId, VarId>;

  Bqm() = default;
  explicit Bqm(std::size_t num_vars) : linear_(num_vars) {}

  std::size_t num_vars() const noexcept { return linear_.size(); }

  /// Grows the variable range; existing coefficients are kept.
  void resize(std::size_t num_vars) {
    if (num_vars < linear_.size())
      throw InvalidArgument("Bqm::resize cannot shrink");
    linear_.resize(num_vars);
  }

  Decimal linear(VarId i) const { return linear_.at(check(i) - 1); }
  const std::vector<Decimal>& linear() const noexcept { return linear_; }
  const std::map<Pair, Decimal>& quadratic() const noexcept { return quad_; }
  Decimal quadratic(VarId i, VarId j) const {
    const auto it = quad_.find(ordered(i, j));
    return it == quad_.end() ? Decimal{} : it->second;
  }
  Decimal offset() const noexcept { return offset_; }

  void add_linear(VarId i, Decimal v) { linear_[check(i) - 1] += v; }

  /// x_i * x_i folds into the linear term (x^2 = x for binaries).
  void add_quadratic(VarId i, VarId j, Decimal v) {
    check(i);
    check(j);
    if (i == j) {
      add_linear(i, v);
      return;
    }
    const auto key = ordered(i, j);
    auto& slot = quad_[key];
    slot += v;
    if (slot == Decimal{}) quad_.erase(key);
  }

  void add_offset(Decimal v) noexcept { offset_ += v; }

  /// this += scale * other; `other` must have integer coefficients or the
  /// product must stay within two fractional digits.
  void add_scaled(const Bqm& other, Decimal scale) {
    if (other.num_vars() > num_vars()) resize(other.num_vars());
    for (std::size_t k = 0; k < other.linear_.size(); ++k)
      if (other.linear_[k] != Decimal{})
        linear_[k] += other.linear_[k] * scale;
    for (const auto& [key, v] : other.quad_)
      add_quadratic(key.first, key.second, v * scale);
    offset_ += other.offset_ * scale;
  }

  friend bool operator==(const Bqm&, const Bqm&) = default;

 private:
  VarId check(VarId i) const {
    if (i < 1 || i > linear_.size())
      throw InvalidArgument("Bqm variable " + std::to_string(i) +
                            " outside 1.." + std::to_string(linear_.size()));
    return i;
  }
  static Pair ordered(VarId i, VarId j) noexcept {
    return i < j ? Pair{i, j} : Pair{j, i};
  }

  std::vector<Decimal> linear_;
  std::map<Pair, Decimal> quad_;
  Decimal offset_;
};

inline Decimal energy(const Bqm& bqm, const Bits& bits) {
  if (bits.size() != bqm.num_vars())
    throw InvalidArgument("assignment has " + std::to_string(bits.size()) +
                          " bits, model has " +
                          std::to_string(bqm.num_vars()) + " variables");
  Decimal e = bqm.offset();
  for (std::size_t k = 0; k < bits.size(); ++k)
    if (bits[k]) e += bqm.linear()[k];
  for (const auto& [key, v] : bqm.quadratic())
    if (bits[key.first - 1] && bits[key.second - 1]) e += v;
  return e;
}

// ---------------------------------------------------------------------------
// Penalty encoding

/// Slack bits allocated to one inequality. The slack integer is
/// sum(weights[k] * bit(ids[k])) and ranges over exactly [0, upper].
struct SlackEntry {
  std::string label;
  std::vector<VarId> ids;
  std::vector<std::int64_t> weights;
  std::int64_t upper = 0;
};

/// Allocates slack ids contiguously after the decision variables.
class SlackRegistry {
 public:
  SlackRegistry() = default;
  explicit SlackRegistry(std::size_t num_decision_vars)
      : first_free_(static_cast<VarId>(num_decision_vars + 1)),
        num_decision_(num_decision_vars) {}

  std::size_t num_decision_vars() const noexcept { return num_decision_; }
  /// Decision plus slack variables allocated so far.
  std::size_t num_vars() const noexcept { return first_free_ - 1; }
  const std::vector<SlackEntry>& entries() const noexcept { return entries_; }

  const SlackEntry* find(std::string_view label) const {
    for (const auto& e : entries_)
      if (e.label == label) return &e;
    return nullptr;
  }

  /// Reserves slack bits for a slack integer in [0, upper] using a capped
  /// binary expansion: weights 1, 2, ..., 2^(k-2), upper - (2^(k-1) - 1).
  const SlackEntry& allocate(std::string label, std::int64_t upper) {
    if (upper < 1) throw InvalidArgument("slack range must be at least 1");
    SlackEntry e;
    e.label = std::move(label);
    e.upper = upper;
    const int k = std::bit_width(static_cast<std::uint64_t>(upper));
    for (int b = 0; b + 1 < k; ++b) e.weights.push_back(std::int64_t{1} << b);
    e.weights.push_back(upper - ((std::int64_t{1} << (k - 1)) - 1));
    for (std::size_t b = 0; b < e.weights.size(); ++b)
      e.ids.push_back(first_free_++);
    entries_.push_back(std::move(e));
    return entries_.back();
  }

 private:
  VarId first_free_ = 1;
  std::size_t num_decision_ = 0;
  std::vector<SlackEntry> entries_;
};

namespace detail {

/// (sum a_k y_k - b)^2 expanded with y^2 = y. Terms may repeat ids.
inline Bqm square_of_affine(
    const std::vector<std::pair<VarId, std::int64_t>>& terms, std::int64_t b,
    std::size_t num_vars) {
  Bqm out(num_vars);
  for (const auto& [id, a] : terms)
    out.add_linear(id, Decimal::from_integer(a * (a - 2 * b)));
  for (std::size_t p = 0; p < terms.size(); ++p)
    for (std::size_t q = p + 1; q < terms.size(); ++q)
      out.add_quadratic(terms[p].first, terms[q].first,
                        Decimal::from_integer(2 * terms[p].second *
                                              terms[q].second));
  out.add_offset(Decimal::from_integer(b * b));
  return out;
}

inline std::size_t max_id(const LinearConstraint& c) {
  return c.terms.empty() ? 0 : c.terms.rbegin()->first;
}

}  // namespace detail

/// Penalty (sum a_i x_i - b)^2 for an equality. `num_vars` widens the
/// model's range; by default it ends at the constraint's largest id.
inline Bqm encode_equality(const LinearConstraint& c, std::size_t num_vars = 0) {
  if (c.comparator != Comparator::equal)
    throw InvalidArgument("encode_equality: '" + c.label + "' is not an equality");
  std::vector<std::pair<VarId, std::int64_t>> terms(c.terms.begin(),
                                                    c.terms.end());
  return detail::square_of_affine(terms, c.rhs,
                                  std::max(num_vars, detail::max_id(c)));
}

/// Penalty for sum a_i x_i <= b: adds a slack integer s in [0, b - min lhs]
/// and squares sum a_i x_i + s - b. With no room for slack (b - min lhs == 0)
/// or `with_slack == false` it degenerates to the equality penalty.
inline Bqm encode_inequality(const LinearConstraint& c, SlackRegistry& registry,
                             bool with_slack = true) {
  if (c.comparator != Comparator::at_most)
    throw InvalidArgument("encode_inequality: '" + c.label +
                          "' is not an at-most constraint");
  if (c.rhs < 0) throw InvalidArgument("encode_inequality: rhs < 0");
  std::vector<std::pair<VarId, std::int64_t>> terms(c.terms.begin(),
                                                    c.terms.end());
  if (registry.num_vars() < detail::max_id(c))
    throw InvalidArgument("encode_inequality: slack registry must start above "
                          "the decision variables of '" + c.label + "'");
  std::int64_t min_lhs = 0;
  for (const auto& [id, a] : terms) min_lhs += std::min<std::int64_t>(a, 0);
  const std::int64_t upper = c.rhs - min_lhs;
  if (with_slack && upper > 0) {
    const auto& slack = registry.allocate(c.label, upper);
    for (std::size_t k = 0; k < slack.ids.size(); ++k)
      terms.emplace_back(slack.ids[k], slack.weights[k]);
  }
  return detail::square_of_affine(
      terms, c.rhs, std::max(registry.num_vars(), detail::max_id(c)));
}

/// Positive penalty weight shared by every constraint.
class PenaltyWeight {
 public:
  explicit PenaltyWeight(Decimal lambda) : lambda_(lambda) {
    if (lambda <= Decimal{})
      throw InvalidArgument("penalty weight must be positive, got " +
                            lambda.to_string());
  }
  Decimal value() const noexcept { return lambda_; }

 private:
  Decimal lambda_;
};

inline constexpr Decimal kDefaultLambda = Decimal::from_hundredths(9050);

struct CompiledModel {
  Bqm bqm;
  SlackRegistry slack;
};

/// -objective + lambda * (sum of equality penalties + sum of inequality
/// penalties). In paper-exact mode the inequality labelled I_10 is encoded
/// without slack; every other inequality receives slack.
inline CompiledModel assemble(const std::vector<Decimal>& objective,
                              const std::vector<LinearConstraint>& equalities,
                              const std::vector<LinearConstraint>& inequalities,
                              PenaltyWeight lambda, ConflictMode mode) {
  const std::size_t n = objective.size();
  auto check_range = [n](const LinearConstraint& c) {
    if (detail::max_id(c) > n)
      throw InvalidArgument("constraint '" + c.label +
                            "' references ids beyond the objective");
  };
  CompiledModel out{Bqm(n), SlackRegistry(n)};
  for (std::size_t k = 0; k < n; ++k)
    out.bqm.add_linear(static_cast<VarId>(k + 1), -objective[k]);

  for (const auto& c : equalities) {
    check_range(c);
    out.bqm.add_scaled(encode_equality(c, n), lambda.value());
  }
  for (const auto& c : inequalities) {
    check_range(c);
    const bool slack_free = mode == ConflictMode::paper_exact &&
                            c.label.starts_with(kSlackFreeConflictLabel) &&
                            (c.label.size() == kSlackFreeConflictLabel.size() ||
                             c.label[kSlackFreeConflictLabel.size()] == ' ');
    out.bqm.add_scaled(encode_inequality(c, out.slack, !slack_free),
                       lambda.value());
  }
  out.bqm.resize(out.slack.num_vars());
  return out;
}

/// Extends decision bits with slack bits that zero each inequality's penalty
/// where possible (slack = rhs - lhs when it lies in the slack range).
inline Bits fill_slack(const Bits& decision, const SlackRegistry& registry,
                       const std::vector<LinearConstraint>& inequalities) {
  Bits bits(registry.num_vars(), 0);
  const auto n = std::min(decision.size(), registry.num_decision_vars());
  std::copy_n(decision.begin(), n, bits.begin());
  for (const auto& c : inequalities) {
    const auto* entry = registry.find(c.label);
    if (!entry) continue;
    const std::int64_t s = c.rhs - c.lhs(bits);
    if (s < 0 || s > entry->upper) continue;
    // The capped top weight covers the range above the plain binary part.
    const std::size_t top = entry->weights.size() - 1;
    std::int64_t rest = s;
    const std::int64_t plain_max = (std::int64_t{1} << top) - 1;
    if (rest > plain_max) {
      bits[entry->ids[top] - 1] = 1;
      rest -= entry->weights[top];
    }
    for (std::size_t b = 0; b < top; ++b)
      bits[entry->ids[b] - 1] = static_cast<std::uint8_t>((rest >> b) & 1);
  }
  return bits;
}

// ---------------------------------------------------------------------------
// Text interchange: `offset <v>`, `lin <i> <v>`, `quad <i> <j> <v>`.
// One `lin` line per variable (so the variable count survives), `quad` lines
// for nonzero couplings in (i, j) order, `offset` only when nonzero.

inline std::string format_bqm(const Bqm& bqm) {
  std::ostringstream os;
  if (bqm.offset() != Decimal{}) os << "offset " << bqm.offset() << '\n';
  for (std::size_t k = 0; k < bqm.num_vars(); ++k)
    os << "lin " << (k + 1) << ' ' << bqm.linear()[k] << '\n';
  for (const auto& [key, v] : bqm.quadratic())
    os << "quad " << key.first << ' ' << key.second << ' ' << v << '\n';
  return os.str();
}

inline Bqm parse_bqm(std::string_view text) {
  Bqm bqm;
  std::size_t line_no = 0;
  for (const auto line : detail::lines(text)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    std::vector<std::string_view> f;
    for (auto tok : detail::split(trimmed, ' '))
      if (!tok.empty()) f.push_back(tok);
    auto fail = [&](const std::string& why) {
      return ParseError("bqm line " + std::to_string(line_no) + ": " + why);
    };
    auto id = [&](std::string_view tok) {
      VarId v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || p != tok.data() + tok.size() || v == 0)
        throw fail("bad variable id '" + std::string(tok) + "'");
      return v;
    };
    if (f[0] == "offset" && f.size() == 2) {
      bqm.add_offset(Decimal::parse(f[1]));
    } else if (f[0] == "lin" && f.size() == 3) {
      const auto i = id(f[1]);
      if (i > bqm.num_vars()) bqm.resize(i);
      bqm.add_linear(i, Decimal::parse(f[2]));
    } else if (f[0] == "quad" && f.size() == 4) {
      const auto i = id(f[1]);
      const auto j = id(f[2]);
      if (i >= j) throw fail("quad requires i < j");
      if (j > bqm.num_vars()) bqm.resize(j);
      bqm.add_quadratic(i, j, Decimal::parse(f[3]));
    } else {
      throw fail("unrecognised record");
    }
  }
  return bqm;
}

}  // namespace lineup
