#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "lineup/constraints.hpp"
#include "lineup/decimal.hpp"
#include "lineup/error.hpp"
#include "lineup/qubo.hpp"
#include "lineup/roster.hpp"
#include "lineup/verify.hpp"

namespace lineup {

struct Sample {
  Bits bits;
  Decimal energy;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// ---------------------------------------------------------------------------
// Exact combinatorial oracle

/// Best line-up by enumerating quota-sized subsets per position group and
/// their Cartesian product. A combination is rejected when a player fills
/// two slots or any supplied constraint fails. Ties go to the
/// lexicographically smallest sorted id tuple.
inline LineupSolution exact_lineup(const RatingTable& table,
                                   const FormationSpec& spec,
                                   const std::vector<LinearConstraint>& conflicts) {
  spec.validate();
  const auto index = build_variable_index(table);
  const auto ratings = objective_coefficients(index, table);

  std::unordered_map<std::string, int> player_ids;
  std::vector<int> player_of(index.size() + 1, -1);
  for (VarId id = 1; id <= index.size(); ++id) {
    const auto [it, _] = player_ids.emplace(
        index.at(id).player, static_cast<int>(player_ids.size()));
    player_of[id] = it->second;
  }

  struct Group {
    std::string label;
    std::vector<std::vector<VarId>> subsets;
  };
  std::vector<Group> groups;
  for (Position pos : kAllPositions) {
    const auto q = spec.quotas.contains(pos) ? spec.quotas.at(pos) : 0;
    if (q == 0) continue;
    const auto ids = index.ids_for(pos);
    Group g{quota_label(pos, q), {}};
    if (static_cast<std::int64_t>(ids.size()) < q)
      throw InfeasibleError(g.label, "infeasible: " + g.label + " needed, only " +
                                         std::to_string(ids.size()) +
                                         " candidate(s)");
    // Lexicographic k-subsets of ids.
    std::vector<std::size_t> pick(static_cast<std::size_t>(q));
    for (std::size_t k = 0; k < pick.size(); ++k) pick[k] = k;
    while (true) {
      std::vector<VarId> subset;
      for (auto k : pick) subset.push_back(ids[k]);
      g.subsets.push_back(std::move(subset));
      std::size_t k = pick.size();
      while (k > 0 && pick[k - 1] == ids.size() - pick.size() + k - 1) --k;
      if (k == 0) break;
      ++pick[k - 1];
      for (std::size_t m = k; m < pick.size(); ++m) pick[m] = pick[m - 1] + 1;
    }
    groups.push_back(std::move(g));
  }

  Bits bits(index.size(), 0);
  std::vector<int> player_used(player_ids.size(), 0);
  std::vector<VarId> chosen;
  std::vector<VarId> best_ids;
  Decimal best_total;
  bool found = false;
  std::size_t deepest = 0;

  auto leaf = [&] {
    for (const auto& c : conflicts)
      if (!c.satisfied_by(bits)) return;
    Decimal total;
    for (VarId id : chosen) total += ratings[id - 1];
    auto sorted = chosen;
    std::sort(sorted.begin(), sorted.end());
    if (!found || total > best_total ||
        (total == best_total && sorted < best_ids)) {
      found = true;
      best_total = total;
      best_ids = std::move(sorted);
    }
  };

  auto dfs = [&](auto&& self, std::size_t depth) -> void {
    deepest = std::max(deepest, depth);
    if (depth == groups.size()) {
      leaf();
      return;
    }
    for (const auto& subset : groups[depth].subsets) {
      bool clash = false;
      for (VarId id : subset) clash = clash || player_used[player_of[id]] > 0;
      if (clash) continue;
      for (VarId id : subset) {
        ++player_used[player_of[id]];
        bits[id - 1] = 1;
        chosen.push_back(id);
      }
      self(self, depth + 1);
      for (VarId id : subset) {
        --player_used[player_of[id]];
        bits[id - 1] = 0;
        chosen.pop_back();
      }
    }
  };
  dfs(dfs, 0);

  if (!found) {
    const std::string label = deepest < groups.size()
                                  ? groups[deepest].label
                                  : std::string("conflict constraints");
    throw InfeasibleError(label, "infeasible: no line-up satisfies " + label +
                                     " after conflict filtering");
  }
  std::vector<Pick> picks;
  for (VarId id : best_ids) {
    const auto& slot = index.at(id);
    picks.push_back({id, slot.player, slot.position, ratings[id - 1]});
  }
  return LineupSolution::from_picks(std::move(picks));
}

// ---------------------------------------------------------------------------
// Integer kernel shared by the BQM minimisers

/// Adjacency form of a Bqm with coefficients in integer hundredths.
class BqmKernel {
 public:
  explicit BqmKernel(const Bqm& bqm)
      : n_(bqm.num_vars()),
        offset_(bqm.offset().hundredths()),
        linear_(n_),
        start_(n_ + 1, 0) {
    for (std::size_t k = 0; k < n_; ++k) linear_[k] = bqm.linear()[k].hundredths();
    for (const auto& [key, v] : bqm.quadratic()) {
      ++start_[key.first];
      ++start_[key.second];
    }
    for (std::size_t k = 0; k < n_; ++k) start_[k + 1] += start_[k];
    neighbor_.resize(start_[n_]);
    coupling_.resize(start_[n_]);
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (const auto& [key, v] : bqm.quadratic()) {
      const auto a = key.first - 1;
      const auto b = key.second - 1;
      neighbor_[fill[a]] = b;
      coupling_[fill[a]++] = v.hundredths();
      neighbor_[fill[b]] = a;
      coupling_[fill[b]++] = v.hundredths();
    }
  }

  std::size_t size() const noexcept { return n_; }

  std::int64_t energy(const Bits& bits) const {
    std::int64_t e = offset_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!bits[i]) continue;
      e += linear_[i];
      for (auto k = start_[i]; k < start_[i + 1]; ++k)
        if (neighbor_[k] > i && bits[neighbor_[k]]) e += coupling_[k];
    }
    return e;
  }

  /// linear_i + sum_j q_ij x_j
  std::int64_t local_field(const Bits& bits, std::size_t i) const {
    std::int64_t h = linear_[i];
    for (auto k = start_[i]; k < start_[i + 1]; ++k)
      if (bits[neighbor_[k]]) h += coupling_[k];
    return h;
  }

  /// Energy change (hundredths) of flipping bit i (0-based).
  std::int64_t flip_delta(const Bits& bits, std::size_t i) const {
    const auto h = local_field(bits, i);
    return bits[i] ? -h : h;
  }

  std::vector<std::int64_t> local_fields(const Bits& bits) const {
    std::vector<std::int64_t> h(n_);
    for (std::size_t i = 0; i < n_; ++i) h[i] = local_field(bits, i);
    return h;
  }

  /// Flips bit i and keeps `fields` consistent.
  void flip(Bits& bits, std::vector<std::int64_t>& fields, std::size_t i) const {
    const std::int64_t sign = bits[i] ? -1 : 1;
    bits[i] ^= 1;
    for (auto k = start_[i]; k < start_[i + 1]; ++k)
      fields[neighbor_[k]] += sign * coupling_[k];
  }

 private:
  std::size_t n_;
  std::int64_t offset_;
  std::vector<std::int64_t> linear_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> neighbor_;
  std::vector<std::int64_t> coupling_;
};

// ---------------------------------------------------------------------------
// Exhaustive minimiser

inline constexpr std::size_t kExhaustiveMaxVars = 25;

/// Global minimum over all 2^n assignments via a Gray-code walk. Ties go to
/// the smallest assignment read as a little-endian integer (x_1 = bit 0).
inline Sample exhaustive_minimize(const Bqm& bqm) {
  const std::size_t n = bqm.num_vars();
  if (n > kExhaustiveMaxVars)
    throw InvalidArgument("exhaustive_minimize: " + std::to_string(n) +
                          " variables exceeds the cap of " +
                          std::to_string(kExhaustiveMaxVars) +
                          "; use the simulated annealer instead");
  const BqmKernel kernel(bqm);
  Bits bits(n, 0);
  auto fields = kernel.local_fields(bits);
  std::int64_t e = kernel.energy(bits);
  std::uint64_t code = 0;
  std::int64_t best_e = e;
  std::uint64_t best_code = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < count; ++step) {
    const auto i = static_cast<std::size_t>(std::countr_zero(step));
    e += bits[i] ? -fields[i] : fields[i];
    kernel.flip(bits, fields, i);
    code ^= std::uint64_t{1} << i;
    if (e < best_e || (e == best_e && code < best_code)) {
      best_e = e;
      best_code = code;
    }
  }
  Sample s{Bits(n, 0), Decimal::from_hundredths(best_e)};
  for (std::size_t i = 0; i < n; ++i) s.bits[i] = (best_code >> i) & 1;
  return s;
}

// ---------------------------------------------------------------------------
// Simulated annealing

struct AnnealParams {
  std::size_t num_reads = 64;
  std::size_t sweeps_per_read = 2000;
  double beta_hot = 0.01;
  double beta_cold = 10.0;
  std::uint64_t seed = 1;
  /// Worker threads; 0 picks the hardware concurrency. Results do not
  /// depend on this value.
  std::size_t threads = 0;
  /// Runs the pair-flip local search on each read's best state after the
  /// Metropolis sweeps.
  bool polish = true;

  void validate() const {
    if (num_reads == 0) throw InvalidArgument("anneal: num_reads must be positive");
    if (!(beta_hot > 0.0))
      throw InvalidArgument("anneal: beta_hot must be positive");
    if (!(beta_cold > beta_hot))
      throw InvalidArgument("anneal: beta_cold must exceed beta_hot");
  }
};

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Fisher-Yates with two 32-bit bounded draws per engine call (Lemire's
/// multiply-shift reduction).
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  std::uint64_t word = 0;
  bool have_half = false;
  for (std::size_t k = v.size(); k > 1; --k) {
    if (!have_half) word = rng();
    const auto half = static_cast<std::uint32_t>(have_half ? word >> 32 : word);
    have_half = !have_half;
    const auto j = static_cast<std::size_t>(
        (static_cast<std::uint64_t>(half) * static_cast<std::uint64_t>(k)) >> 32);
    std::swap(v[k - 1], v[j]);
  }
}

struct NoVisit {
  void operator()(const Bits&, std::int64_t) const noexcept {}
};

/// One restart. `on_visit(bits, energy_hundredths)` sees the initial state
/// and every state reached by an accepted flip.
template <class OnVisit = NoVisit>
Sample anneal_read(const BqmKernel& kernel, const AnnealParams& params,
                   std::uint64_t read_seed, OnVisit&& on_visit = {}) {
  const std::size_t n = kernel.size();
  std::mt19937_64 rng(read_seed);
  Bits bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
  auto fields = kernel.local_fields(bits);
  std::int64_t e = kernel.energy(bits);
  Bits best = bits;
  std::int64_t best_e = e;
  bool at_best = false;  // current bits have energy best_e but are not in `best`
  on_visit(bits, e);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  const std::size_t sweeps = params.sweeps_per_read;
  const double ratio = params.beta_cold / params.beta_hot;
  for (std::size_t s = 0; s < sweeps; ++s) {
    const double beta =
        sweeps == 1 ? params.beta_cold
                    : params.beta_hot *
                          std::pow(ratio, static_cast<double>(s) /
                                              static_cast<double>(sweeps - 1));
    shuffle(order, rng);
    for (std::size_t i : order) {
      const std::int64_t delta = bits[i] ? -fields[i] : fields[i];
      if (delta > 0) {
        const double x = beta * static_cast<double>(delta) /
                         static_cast<double>(Decimal::kScale);
        // exp(-x) is below the uniform's 2^-53 resolution past x = 37.
        if (x > 37.0 || unit_uniform(rng) >= std::exp(-x)) continue;
        // Leaving a best-seen state: snapshot it first.
        if (at_best) {
          best = bits;
          at_best = false;
        }
      }
      kernel.flip(bits, fields, i);
      e += delta;
      on_visit(bits, e);
      if (e < best_e) {
        best_e = e;
        at_best = true;
      }
    }
  }
  if (at_best) best = std::move(bits);
  return {std::move(best), Decimal::from_hundredths(best_e)};
}

/// Steepest single-flip descent; returns the final energy.
inline std::int64_t greedy_descent(const BqmKernel& kernel, Bits& bits,
                                   std::vector<std::int64_t>& fields,
                                   std::int64_t e,
                                   std::vector<std::size_t>* flipped = nullptr) {
  while (true) {
    std::size_t best_i = 0;
    std::int64_t best_d = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const auto d = bits[i] ? -fields[i] : fields[i];
      if (d < best_d) {
        best_d = d;
        best_i = i;
      }
    }
    if (best_d >= 0) return e;
    kernel.flip(bits, fields, best_i);
    if (flipped) flipped->push_back(best_i);
    e += best_d;
  }
}

/// Local search over swap moves: flip a pair (i, j) with x_i != x_j, then
/// descend by single flips; keep the result if it lowers the energy,
/// otherwise undo. Passes repeat until one makes no improvement. Moving a
/// player between feasible line-ups crosses a penalty barrier two flips
/// wide, which cold single-flip Metropolis rarely does.
inline std::int64_t pair_polish(const BqmKernel& kernel, Bits& bits,
                                std::int64_t e) {
  auto fields = kernel.local_fields(bits);
  e = greedy_descent(kernel, bits, fields, e);
  const std::size_t n = bits.size();
  std::vector<std::size_t> flipped;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (bits[i] == bits[j]) continue;
        flipped.clear();
        std::int64_t trial = e;
        trial += bits[i] ? -fields[i] : fields[i];
        kernel.flip(bits, fields, i);
        trial += bits[j] ? -fields[j] : fields[j];
        kernel.flip(bits, fields, j);
        flipped = {i, j};
        trial = greedy_descent(kernel, bits, fields, trial, &flipped);
        if (trial < e) {
          e = trial;
          improved = true;
        } else {
          for (auto it = flipped.rbegin(); it != flipped.rend(); ++it)
            kernel.flip(bits, fields, *it);
        }
      }
    }
  }
  return e;
}

}  // namespace detail

/// Independent Metropolis restarts under a geometric beta schedule; read r
/// is seeded with seed + r. Each read reports its best-seen state, refined
/// by pair_polish when `params.polish` is set. Samples come back sorted by
/// energy (ties keep read order).
inline std::vector<Sample> simulated_anneal(const Bqm& bqm,
                                            const AnnealParams& params) {
  params.validate();
  const BqmKernel kernel(bqm);
  std::vector<Sample> samples(params.num_reads);
  std::size_t workers =
      params.threads ? params.threads
                     : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, params.num_reads);
  auto parallel_for = [workers](std::size_t count, auto&& body) {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w)
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < count; r += workers) body(r);
      });
  };

  parallel_for(params.num_reads, [&](std::size_t r) {
    samples[r] = detail::anneal_read(kernel, params, params.seed + r);
  });

  if (params.polish) {
    // Reads often finish in the same state; polish each distinct one once.
    std::map<Bits, std::size_t> slot_of;
    std::vector<std::size_t> slot(samples.size());
    std::vector<Sample> distinct;
    for (std::size_t r = 0; r < samples.size(); ++r) {
      const auto [it, inserted] = slot_of.emplace(samples[r].bits, distinct.size());
      if (inserted) distinct.push_back(samples[r]);
      slot[r] = it->second;
    }
    parallel_for(distinct.size(), [&](std::size_t k) {
      distinct[k].energy = Decimal::from_hundredths(detail::pair_polish(
          kernel, distinct[k].bits, distinct[k].energy.hundredths()));
    });
    for (std::size_t r = 0; r < samples.size(); ++r) samples[r] = distinct[slot[r]];
  }

  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
  return samples;
}

}  // namespace lineup
