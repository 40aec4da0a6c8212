#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "lineup/lineup.hpp"
#include "oracle.hpp"

using namespace lineup;
using namespace lineup::literals;

namespace {

std::vector<VarId> ids(const LineupSolution& s) {
  std::vector<VarId> out;
  for (const auto& p : s.picks) out.push_back(p.variable);
  return out;
}

Bqm random_bqm(std::mt19937_64& rng, std::size_t n) {
  Bqm b(n);
  for (VarId i = 1; i <= n; ++i)
    b.add_linear(i, Decimal::from_hundredths(static_cast<std::int64_t>(rng() % 2001) - 1000));
  for (VarId i = 1; i <= n; ++i)
    for (VarId j = i + 1; j <= n; ++j)
      if (rng() % 2)
        b.add_quadratic(i, j, Decimal::from_hundredths(static_cast<std::int64_t>(rng() % 2001) - 1000));
  return b;
}

AnnealParams quick(std::uint64_t seed) {
  AnnealParams p;
  p.seed = seed;
  p.num_reads = 16;
  p.sweeps_per_read = 500;
  p.polish = false;
  return p;
}

}  // namespace

TEST(ExactLineup, FourThreeThree) {
  const auto& t = fixtures::figure1();
  const auto idx = build_variable_index(t);
  for (auto mode : {ConflictMode::paper_exact, ConflictMode::auto_detect}) {
    const auto s = exact_lineup(t, *builtin_formation("4-3-3"), conflict_constraints(idx, mode));
    EXPECT_EQ(s.total_rating, 82.67_dec);
    EXPECT_EQ(ids(s), (std::vector<VarId>{1, 6, 7, 8, 11, 18, 21, 28, 34, 37, 39}));
  }
}

TEST(ExactLineup, FourTwoThreeOne) {
  const auto& t = fixtures::figure1();
  const auto idx = build_variable_index(t);
  const auto s = exact_lineup(t, *builtin_formation("4-2-3-1"),
                              conflict_constraints(idx, ConflictMode::paper_exact));
  EXPECT_EQ(s.total_rating, 80.04_dec);
  EXPECT_EQ(ids(s), (std::vector<VarId>{1, 6, 7, 8, 11, 14, 16, 29, 31, 32, 42}));
}

TEST(ExactLineup, InfeasibleNamesAGroup) {
  // One player who can only fill one of the two required slots.
  const auto t = parse_roster("player,position,rating\nA,GK,1.00\nA,DC,2.00\n");
  FormationSpec spec{"two", {{Position::GK, 1}, {Position::DC, 1}}, 2};
  try {
    exact_lineup(t, spec, {});
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.label(), "1 central defender");
  }
  FormationSpec none{"none", {{Position::AM, 1}}, 1};
  EXPECT_THROW(exact_lineup(t, none, {}), InfeasibleError);
}

TEST(ExactLineup, ForcedSquad) {
  std::string csv = "player,position,rating\n";
  const std::vector<std::string> slots = {"GK", "DC", "DC", "DL", "DR", "CM", "CM", "CM", "FWL", "FWR", "FW"};
  for (std::size_t k = 0; k < slots.size(); ++k)
    csv += "P" + std::to_string(k) + "," + slots[k] + "," + std::to_string(5 + k % 3) + ".00\n";
  const auto t = parse_roster(csv);
  const auto s = exact_lineup(t, *builtin_formation("4-3-3"), {});
  EXPECT_EQ(s.picks.size(), 11u);
  EXPECT_EQ(s.total_rating, Decimal::from_integer(65));
}

TEST(ExactLineup, TieBreakIsLexicographic) {
  const auto t = parse_roster("player,position,rating\nA,GK,5.00\nB,GK,5.00\nC,GK,5.00\n");
  const auto s = exact_lineup(t, FormationSpec{"k", {{Position::GK, 1}}, 1}, {});
  EXPECT_EQ(ids(s), std::vector<VarId>{1});
}

// Invariants on random rosters, cross-checked against a brute force.
TEST(ExactLineup, MatchesBruteForceOnRandomRosters) {
  std::mt19937_64 rng(99);
  const std::vector<Position> pos = {Position::GK, Position::DC, Position::CM, Position::FW};
  int feasible = 0;
  for (int t = 0; t < 150; ++t) {
    const auto table = oracle::random_roster(rng, 3 + rng() % 8, pos, 14);
    FormationSpec spec{"toy", {}, 0};
    for (auto p : pos) {
      const std::int64_t q = rng() % 3;
      if (q) spec.quotas[p] = q;
      spec.total += q;
    }
    if (spec.total == 0) continue;
    const auto want = oracle::brute_lineup_hundredths(table, spec);
    const auto index = build_variable_index(table);
    std::vector<LinearConstraint> conflicts;
    try {
      conflicts = conflict_constraints(index, ConflictMode::auto_detect);
      const auto s = exact_lineup(table, spec, conflicts);
      ASSERT_EQ(s.total_rating.hundredths(), want);
      ++feasible;
      EXPECT_EQ(static_cast<std::int64_t>(s.picks.size()), spec.total);
      std::set<std::string> players;
      std::map<Position, std::int64_t> count;
      for (const auto& p : s.picks) {
        EXPECT_TRUE(players.insert(p.player).second);
        ++count[p.position];
        EXPECT_EQ(table.find(p.player, p.position), p.rating);
      }
      for (const auto& [p, q] : spec.quotas) EXPECT_EQ(count[p], q);
    } catch (const InfeasibleError&) {
      EXPECT_EQ(want, -1);
    }
  }
  EXPECT_GE(feasible, 20);
}

TEST(Exhaustive, GoalkeeperPairPicksFirst) {
  const auto b = encode_equality(make_selection_constraint({1, 2}, Comparator::equal, 1, "gk"));
  const auto s = exhaustive_minimize(b);
  EXPECT_EQ(s.bits, (Bits{1, 0}));
  EXPECT_EQ(s.energy, Decimal{});
}

TEST(Exhaustive, SingleLinear) {
  Bqm b(1);
  b.add_linear(1, -5.00_dec);
  const auto s = exhaustive_minimize(b);
  EXPECT_EQ(s.bits, Bits{1});
  EXPECT_EQ(s.energy, -5.00_dec);
}

TEST(Exhaustive, ToyRoster) {
  const auto t = parse_roster(
      "player,position,rating\nA,GK,6.00\nB,GK,5.00\nC,DC,7.00\nA,DC,9.00\nD,DC,4.00\nC,GK,8.00\n");
  FormationSpec spec{"toy", {{Position::GK, 1}, {Position::DC, 1}}, 2};
  const auto index = build_variable_index(t);
  ASSERT_EQ(index.size(), 6u);
  const auto eqs = formation_constraints(spec, index);
  const auto ineqs = conflict_constraints(index, ConflictMode::auto_detect);
  const auto m = assemble(objective_coefficients(index, t), eqs, ineqs,
                          PenaltyWeight(100.00_dec), ConflictMode::auto_detect);
  const auto s = exhaustive_minimize(m.bqm);
  // Best: C in goal (8) with A in defence (9).
  EXPECT_EQ(s.energy, -17.00_dec);
  EXPECT_EQ(s.energy.hundredths(), oracle::brute_min_hundredths(m.bqm));
  const Bits decision(s.bits.begin(), s.bits.begin() + 6);
  EXPECT_EQ(decode_lineup(decision, index, t).total_rating, 17.00_dec);
}

// 2 GK, 2 DC, 2 FW with quotas 1/1/1: ground state is the best exact line-up.
TEST(Exhaustive, SixVariableRosterMatchesExact) {
  const auto t = parse_roster(
      "player,position,rating\nG1,GK,6.10\nG2,GK,6.40\nD1,DC,7.00\nD2,DC,6.90\nF1,FW,8.20\nF2,FW,8.25\n");
  FormationSpec spec{"1-1-1", {{Position::GK, 1}, {Position::DC, 1}, {Position::FW, 1}}, 3};
  const auto index = build_variable_index(t);
  const auto m = assemble(objective_coefficients(index, t), formation_constraints(spec, index),
                          {}, PenaltyWeight(kDefaultLambda), ConflictMode::auto_detect);
  ASSERT_EQ(m.bqm.num_vars(), 6u);
  const auto exact = exact_lineup(t, spec, {});
  EXPECT_EQ(exact.total_rating, 21.65_dec);
  EXPECT_EQ(exhaustive_minimize(m.bqm).energy, -exact.total_rating);
}

TEST(Exhaustive, RefusesLargeModels) {
  Bqm b(kExhaustiveMaxVars + 1);
  try {
    exhaustive_minimize(b);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("anneal"), std::string::npos);
  }
}

TEST(Exhaustive, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto b = random_bqm(rng, 1 + rng() % 12);
    const auto s = exhaustive_minimize(b);
    EXPECT_EQ(s.energy.hundredths(), oracle::brute_min_hundredths(b));
    EXPECT_EQ(energy(b, s.bits), s.energy);
  }
}

TEST(Kernel, FlipDeltaMatchesRecomputation) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    const auto b = random_bqm(rng, 2 + rng() % 15);
    const BqmKernel k(b);
    Bits x(b.num_vars());
    for (auto& v : x) v = rng() & 1;
    auto fields = k.local_fields(x);
    for (int step = 0; step < 40; ++step) {
      const std::size_t i = rng() % x.size();
      const auto before = oracle::direct_energy_hundredths(b, x);
      ASSERT_EQ(k.energy(x), before);
      const auto delta = k.flip_delta(x, i);
      k.flip(x, fields, i);
      ASSERT_EQ(oracle::direct_energy_hundredths(b, x) - before, delta);
      ASSERT_EQ(fields, k.local_fields(x));
    }
  }
}

TEST(Anneal, ZeroSweepsKeepsInitialState) {
  std::mt19937_64 rng(1);
  const auto b = random_bqm(rng, 8);
  auto p = quick(5);
  p.sweeps_per_read = 0;
  const BqmKernel k(b);
  int visits = 0;
  const auto s = detail::anneal_read(k, p, 42, [&](const Bits&, std::int64_t) { ++visits; });
  EXPECT_EQ(visits, 1);
  EXPECT_EQ(energy(b, s.bits), s.energy);
  for (const auto& sample : simulated_anneal(b, p))
    EXPECT_EQ(energy(b, sample.bits), sample.energy);
}

TEST(Anneal, SingleReadZeroSweepsIsInitialAssignment) {
  std::mt19937_64 rng(2);
  const auto b = random_bqm(rng, 9);
  AnnealParams p;
  p.num_reads = 1;
  p.sweeps_per_read = 0;
  p.polish = false;
  p.seed = 77;
  // Read 0 draws its start from a generator seeded with seed + 0, one draw per bit.
  std::mt19937_64 gen(77);
  Bits start(9);
  for (auto& v : start) v = gen() & 1;
  const auto s = simulated_anneal(b, p);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].bits, start);
  EXPECT_EQ(s[0].energy, energy(b, start));
}

TEST(Anneal, BestSeenIsMinimumOfVisited) {
  std::mt19937_64 rng(8);
  const auto b = random_bqm(rng, 12);
  const BqmKernel k(b);
  std::int64_t lowest = INT64_MAX;
  std::size_t visits = 0;
  const auto s = detail::anneal_read(k, quick(1), 7, [&](const Bits& x, std::int64_t e) {
    ASSERT_EQ(e, oracle::direct_energy_hundredths(b, x));
    lowest = std::min(lowest, e);
    ++visits;
  });
  EXPECT_GT(visits, 1u);
  EXPECT_EQ(s.energy.hundredths(), lowest);
  EXPECT_EQ(energy(b, s.bits), s.energy);
}

TEST(Anneal, ReachesExhaustiveOptimumOnSmallModels) {
  std::mt19937_64 rng(123);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    const auto b = random_bqm(rng, 10);
    const auto want = oracle::brute_min_hundredths(b);
    const auto samples = simulated_anneal(b, quick(t + 1));
    if (samples.front().energy.hundredths() == want) ++hits;
  }
  EXPECT_GE(hits, 95);
}

// Toy line-up models up to 20 variables: best over a few seeds matches the
// exhaustive ground state.
TEST(Anneal, MatchesExhaustiveOnToyRosters) {
  std::mt19937_64 rng(31);
  const std::vector<Position> pos = {Position::GK, Position::DC, Position::CM};
  int checked = 0;
  while (checked < 25) {
    const auto table = oracle::random_roster(rng, 3 + rng() % 7, pos, 12);
    FormationSpec spec{"toy", {}, 0};
    for (auto p : pos) {
      const std::int64_t q = 1 + rng() % 2;
      spec.quotas[p] = q;
      spec.total += q;
    }
    const auto index = build_variable_index(table);
    std::vector<LinearConstraint> eqs;
    try {
      eqs = formation_constraints(spec, index);
    } catch (const InfeasibleError&) {
      continue;
    }
    const auto ineqs = conflict_constraints(index, ConflictMode::auto_detect);
    const auto m = assemble(objective_coefficients(index, table), eqs, ineqs,
                            PenaltyWeight(kDefaultLambda), ConflictMode::auto_detect);
    if (m.bqm.num_vars() > 20) continue;
    ++checked;
    const auto want = exhaustive_minimize(m.bqm).energy;
    Decimal best = Decimal::from_integer(1'000'000);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      AnnealParams p;
      p.seed = seed;
      p.num_reads = 16;
      p.sweeps_per_read = 500;
      best = std::min(best, simulated_anneal(m.bqm, p).front().energy);
    }
    EXPECT_EQ(best, want);
  }
}

TEST(Anneal, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(4);
  const auto b = random_bqm(rng, 20);
  auto p = quick(9);
  p.polish = true;
  p.threads = 1;
  const auto a = simulated_anneal(b, p);
  p.threads = 4;
  const auto c = simulated_anneal(b, p);
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].bits, c[i].bits);
    EXPECT_EQ(a[i].energy, c[i].energy);
  }
  p.seed = 10;
  const auto d = simulated_anneal(b, p);
  EXPECT_EQ(d.size(), p.num_reads);
}

TEST(Anneal, SamplesSortedAndConsistent) {
  std::mt19937_64 rng(6);
  const auto b = random_bqm(rng, 15);
  auto p = quick(2);
  p.polish = true;
  const auto s = simulated_anneal(b, p);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(energy(b, s[i].bits), s[i].energy);
    if (i) {
      EXPECT_LE(s[i - 1].energy, s[i].energy);
    }
  }
}

TEST(Anneal, PolishNeverWorsens) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto b = random_bqm(rng, 18);
    auto p = quick(t);
    p.sweeps_per_read = 5;
    const auto raw = simulated_anneal(b, p);
    p.polish = true;
    const auto polished = simulated_anneal(b, p);
    EXPECT_LE(polished.front().energy, raw.front().energy);
  }
}

TEST(Anneal, ParamsValidated) {
  Bqm b(2);
  AnnealParams p;
  p.num_reads = 0;
  EXPECT_THROW(simulated_anneal(b, p), InvalidArgument);
  p = AnnealParams{};
  p.beta_hot = 0;
  EXPECT_THROW(simulated_anneal(b, p), InvalidArgument);
  p = AnnealParams{};
  p.beta_cold = p.beta_hot;
  EXPECT_THROW(simulated_anneal(b, p), InvalidArgument);
}
