#include <doctest.h>

#include "ledgerlab/election/difficulty.hpp"
#include "ledgerlab/election/lottery.hpp"
#include "ledgerlab/election/pow.hpp"
#include "ledgerlab/election/stake.hpp"
#include "ledgerlab/lattice/ledger.hpp"
#include "support.hpp"

using namespace ledgerlab;
using namespace ledgerlab::election;
using testing::acct;
using testing::random_digest;

namespace {

// Work digest recomputed from its definition, and a bit count written out
// by hand, so the oracle does not share code with check_pow.
int oracle_zero_bits(const Digest& header, std::uint64_t nonce) {
  Bytes in(header.bytes.begin(), header.bytes.end());
  for (int shift = 56; shift >= 0; shift -= 8) in.push_back(static_cast<std::uint8_t>(nonce >> shift));
  const Digest d = digest(in);
  int bits = 0;
  for (auto byte : d.bytes) {
    for (int b = 7; b >= 0; --b) {
      if ((byte >> b) & 1) return bits;
      ++bits;
    }
  }
  return bits;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::validation;
}

}  // namespace

TEST_CASE("check_pow boundary cases") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) CHECK(check_pow(random_digest(rng), rng.next(), 0));

  // Find a nonce whose work digest starts with 0xFF.
  const Digest header = random_digest(rng);
  std::uint64_t nonce = 0;
  while (work_digest(header, nonce).bytes[0] != 0xFF) ++nonce;
  CHECK_FALSE(check_pow(header, nonce, 1));
  CHECK(check_pow(header, nonce, 0));
}

TEST_CASE("exhaustive nonce search at 16 bits agrees with check_pow") {
  const Digest header = digest("difficulty-16 fixture");
  std::uint64_t found = 0;
  while (oracle_zero_bits(header, found) < 16) ++found;
  CHECK(check_pow(header, found, 16));
  CHECK(oracle_zero_bits(header, found) == leading_zero_bits(work_digest(header, found)));
  // Every nonce skipped by the search fails the puzzle.
  for (std::uint64_t n = 0; n < found; n += 97) CHECK_FALSE(check_pow(header, n, 16));
}

TEST_CASE("mine at zero bits returns the first enumerated nonce") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) CHECK(mine(digest("h"), 0, seed) == first_nonce(seed));
}

TEST_CASE("mine at 8 bits averages about 256 attempts") {
  Rng rng(2);
  WorkCounter counter;
  const int trials = 400;
  for (int i = 0; i < trials; ++i) {
    const Digest h = random_digest(rng);
    const auto nonce = mine(h, 8, rng.next(), {.counter = &counter});
    REQUIRE(check_pow(h, nonce, 8));
  }
  // Attempts are geometric with p = 1/256: sd per trial ~256.
  const double mean = static_cast<double>(counter.evaluations) / trials;
  const double se = 256.0 / std::sqrt(trials);
  CHECK(mean > 256.0 - 4 * se);
  CHECK(mean < 256.0 + 4 * se);
}

TEST_CASE("mine is deterministic in seed and header") {
  const Digest h = digest("same");
  CHECK(mine(h, 10, 5) == mine(h, 10, 5));
}

TEST_CASE("mine guards") {
  CHECK(code_of([] { mine(digest("x"), kMaxGrindBits + 1, 0); }) == ErrorCode::config);
  CHECK(code_of([] { mine(digest("x"), 20, 0, {.budget = 10}); }) == ErrorCode::mining_budget);
}

TEST_CASE("property: mined nonces always verify") {
  Rng rng(3);
  for (int i = 0; i < 60; ++i) {
    const Digest h = random_digest(rng);
    const int d = static_cast<int>(rng.below(17));
    REQUIRE(check_pow(h, mine(h, d, rng.next()), d));
  }
}

TEST_CASE("retarget rules") {
  DifficultySchedule s{600.0, 16, 1e6};
  const double window = 600.0 * 16;
  CHECK(retarget(s, window).expected_hashes == doctest::Approx(1e6));
  CHECK(retarget(s, 2 * window).expected_hashes == doctest::Approx(5e5));
  CHECK(retarget(s, window / 100).expected_hashes == doctest::Approx(4e6));
  CHECK(retarget(s, window * 100).expected_hashes == doctest::Approx(2.5e5));
  CHECK(DifficultySchedule{600, 16, 256}.leading_zero_bits() == 8);
  CHECK(DifficultySchedule{600, 16, 1}.leading_zero_bits() == 0);
}

TEST_CASE("property: retargeting converges to the target interval") {
  // Honest hash rate is fixed; the starting difficulty is off by 30x. After
  // ten windows of adjustment the mean interval must sit within 10%.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const double hash_rate = 1e4;
    DifficultySchedule s{600.0, 16, 600.0 * hash_rate / 30.0};
    auto run_window = [&] {
      double elapsed = 0.0;
      for (std::uint32_t i = 0; i < s.retarget_window; ++i) elapsed += rng.exponential(hash_rate / s.expected_hashes);
      return elapsed;
    };
    for (int w = 0; w < 10; ++w) s = retarget(s, run_window());
    double total = 0.0;
    const int measured = 40;
    for (int w = 0; w < measured; ++w) {
      const double elapsed = run_window();
      total += elapsed;
      s = retarget(s, elapsed);
    }
    const double mean = total / (measured * s.retarget_window);
    CAPTURE(seed);
    CHECK(std::abs(mean - 600.0) / 600.0 < 0.10);
  }
}

TEST_CASE("lottery single miner and zero rates") {
  for (std::uint64_t r = 0; r < 20; ++r) CHECK(lottery_next_leader({{acct(7), 3.0}}, 1, r) == acct(7));
  CHECK(code_of([] { lottery_next_leader({{acct(1), 0.0}, {acct(2), 0.0}}, 1, 0); }) == ErrorCode::no_leader);
  CHECK(lottery_next_leader({{acct(1), 1.0}, {acct(2), 2.0}}, 4, 9) ==
        lottery_next_leader({{acct(1), 1.0}, {acct(2), 2.0}}, 4, 9));
}

TEST_CASE("lottery frequencies fall inside binomial bounds") {
  const std::uint64_t n = 10'000;
  auto frequency_of_a = [&](double ra, double rb) {
    std::uint64_t wins = 0;
    for (std::uint64_t r = 0; r < n; ++r)
      if (lottery_next_leader({{acct(1), ra}, {acct(2), rb}}, 42, r) == acct(1)) ++wins;
    return wins;
  };
  const auto even = frequency_of_a(1, 1);
  CHECK(std::abs(static_cast<double>(even) - 5000.0) <= 3 * std::sqrt(n * 0.25));
  const double p = static_cast<double>(frequency_of_a(3, 1)) / n;
  CHECK(std::abs(p - 0.75) <= 3 * std::sqrt(0.75 * 0.25 / n));
}

TEST_CASE("lottery passes chi-square at 0.001") {
  const std::map<AccountId, double> rates{{acct(1), 1}, {acct(2), 2}, {acct(3), 3}, {acct(4), 4}};
  std::map<AccountId, std::uint64_t> counts;
  const std::uint64_t n = 10'000;
  for (std::uint64_t r = 0; r < n; ++r) ++counts[lottery_next_leader(rates, 77, r)];
  std::map<AccountId, double> prob;
  for (auto [k, v] : rates) prob[k] = v / 10.0;
  CHECK(testing::chi_square(counts, prob, n) < testing::chi_square_critical_001(3));
}

TEST_CASE("pos_select basics") {
  StakeRegistry one(100);
  one.deposit(acct(3), 10);
  for (std::uint64_t r = 0; r < 20; ++r) CHECK(pos_select(one, 1, r) == acct(3));

  StakeRegistry zero(100);
  zero.deposit(acct(1), 0);
  zero.deposit(acct(2), 5);
  for (std::uint64_t r = 0; r < 2000; ++r) REQUIRE(pos_select(zero, 9, r) == acct(2));

  CHECK(code_of([] { pos_select(StakeRegistry(5), 1, 0); }) == ErrorCode::no_validator);
  StakeRegistry broke(5);
  CHECK(code_of([&] { broke.deposit(acct(1), 6); }) == ErrorCode::insufficient_balance);
}

TEST_CASE("pos_select frequencies and chi-square") {
  const std::uint64_t n = 10'000;
  StakeRegistry r(1000);
  r.deposit(acct(1), 90);
  r.deposit(acct(2), 10);
  std::map<AccountId, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < n; ++i) ++counts[pos_select(r, 5, i)];
  const double p = static_cast<double>(counts[acct(1)]) / n;
  CHECK(std::abs(p - 0.9) <= 3 * std::sqrt(0.9 * 0.1 / n));
  CHECK(testing::chi_square(counts, std::map<AccountId, double>{{acct(1), 0.9}, {acct(2), 0.1}}, n) <
        testing::chi_square_critical_001(1));

  StakeRegistry many(1000);
  const std::uint64_t stakes[] = {5, 10, 20, 25, 40};
  std::map<AccountId, double> prob;
  for (std::uint64_t i = 0; i < 5; ++i) {
    many.deposit(acct(i + 1), stakes[i]);
    prob[acct(i + 1)] = stakes[i] / 100.0;
  }
  std::map<AccountId, std::uint64_t> c2;
  for (std::uint64_t i = 0; i < n; ++i) ++c2[pos_select(many, 6, i)];
  CHECK(testing::chi_square(c2, prob, n) < testing::chi_square_critical_001(4));
}

TEST_CASE("slashing burns the whole deposit given invalid evidence") {
  testing::ChainFixture f(2, 10);
  StakeRegistry reg(1000);
  reg.deposit(acct(1), 100);
  reg.deposit(acct(2), 50);
  const auto supply_before = reg.total_supply();

  // acct(1) signs a block spending 11 from a balance of 10.
  auto bad = f.child(f.store.genesis_id(), {}, 1);
  bad.transactions.push_back(f.tx(1, 2, 11, 1));
  bad = chain::seal_block(bad, f.keys, f.keys.identity(acct(1)));
  REQUIRE_FALSE(chain::validate_block(f.store, bad).accepted());

  const auto after = pos_slash(reg, acct(1), bad, f.store);
  CHECK(after.stake_of(acct(1)) == 0);
  CHECK(after.burned() == 100);
  CHECK(after.total_supply() == supply_before - 100);
  CHECK(after.total_supply() + after.burned() == reg.total_supply() + reg.burned());
  for (std::uint64_t r = 0; r < 500; ++r) REQUIRE(pos_select(after, 3, r) == acct(2));

  CHECK(code_of([&] { pos_slash(after, acct(1), bad, f.store); }) == ErrorCode::not_found);
  // Someone else's invalid block is not evidence against acct(2).
  CHECK(code_of([&] { pos_slash(reg, acct(2), bad, f.store); }) == ErrorCode::slash_rejected);
  const auto good = f.child(f.store.genesis_id(), {}, 1);
  CHECK(code_of([&] { pos_slash(reg, acct(1), good, f.store); }) == ErrorCode::slash_rejected);
}

TEST_CASE("property: supply plus burned is constant under deposits and slashes") {
  testing::ChainFixture f(2, 10);
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    StakeRegistry reg(10'000);
    const auto invariant = reg.total_supply() + reg.burned();
    for (int op = 0; op < 30; ++op) {
      const AccountId v = acct(1 + rng.below(2));
      if (rng.bernoulli(0.7)) {
        if (reg.liquid() > 0) reg.deposit(v, rng.below(reg.liquid() / 4 + 1));
      } else if (reg.deposits().contains(v)) {
        auto bad = f.child(f.store.genesis_id(), {}, raw(v));
        bad.transactions.push_back(f.tx(raw(v), 3, 11, 1));
        bad = chain::seal_block(bad, f.keys, f.keys.identity(v));
        reg = pos_slash(reg, v, bad, f.store);
      }
      REQUIRE(reg.total_supply() + reg.burned() == invariant);
    }
  }
}

TEST_CASE("anti-spam work costs about 256 evaluations per block at 8 bits") {
  CHECK(antispam_pow(digest("tx"), 0, 3) == first_nonce(3));

  const std::size_t n = 200;
  WorkCounter counter;
  Rng rng(10);
  for (std::size_t i = 0; i < n; ++i) {
    const Digest tx = random_digest(rng);
    REQUIRE(check_pow(tx, antispam_pow(tx, 8, i, {.counter = &counter}), 8));
  }
  const double expected = 256.0 * n;
  const double sd = 256.0 * std::sqrt(static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(counter.evaluations) - expected) < 4 * sd);
}

TEST_CASE("lattice validation rejects blocks without valid anti-spam work") {
  Keyring keys(1);
  lattice::LatticeParams params;
  params.spam_difficulty_bits = 12;
  lattice::Ledger ledger(params, keys, {{acct(1), 100, acct(1)}});
  auto send = lattice::create_send(ledger, keys.identity(acct(1)), acct(2), 5);
  CHECK(ledger.validate(send).accepted());
  // Find a nonce that fails and re-sign nothing: the signature covers content only.
  while (check_pow(send.id(), send.antispam_nonce, 12)) ++send.antispam_nonce;
  CHECK(ledger.validate(send).rule == lattice::LatticeRule::bad_pow);
}
