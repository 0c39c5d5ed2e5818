#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "stid/error.hpp"
#include "stid/numdiff.hpp"
#include "stid/rng.hpp"

using namespace stid;

TEST_SUITE("core_math") {

TEST_CASE("xoshiro256** stream for seed 42 matches the reference vector") {
  // Produced by tests/oracles/reference_values.py, an independent implementation.
  const std::uint64_t expected[] = {
      0x15780b2e0c2ec716ULL, 0x6104d9866d113a7eULL, 0xae17533239e499a1ULL,
      0xecb8ad4703b360a1ULL, 0xfde6dc7fe2ec5e64ULL, 0xc50da53101795238ULL,
      0xb82154855a65ddb2ULL, 0xd99a2743ebe60087ULL};
  Rng rng(42);
  for (std::uint64_t e : expected) CHECK(rng.next_u64() == e);
}

TEST_CASE("uniform stays in range and below() is unbiased enough") {
  Rng rng(7);
  std::size_t counts[5] = {};
  for (int i = 0; i < 50000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    ++counts[rng.below(5)];
  }
  for (std::size_t c : counts) CHECK(std::abs(static_cast<double>(c) - 10000.0) < 400.0);
}

TEST_CASE("substreams depend on seed and name only") {
  Rng a = Rng::substream(1, "emb_weight");
  Rng b = Rng::substream(1, "emb_weight");
  Rng c = Rng::substream(1, "reg_weight");
  Rng d = Rng::substream(2, "emb_weight");
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
}

TEST_CASE("shuffle is a deterministic permutation") {
  std::vector<int> v1(20), v2(20);
  for (int i = 0; i < 20; ++i) v1[i] = v2[i] = i;
  Rng r1(9), r2(9);
  r1.shuffle(std::span<int>(v1));
  r2.shuffle(std::span<int>(v2));
  CHECK(v1 == v2);
  std::vector<int> sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 20; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("glorot uniform bound, determinism and mean") {
  Rng rng(1);
  const Matrix m = init_glorot_uniform(3, 3, rng);
  CHECK(m.rows() == 3);
  for (double v : m.values()) CHECK(std::abs(v) <= 1.0);

  Rng r1(99), r2(99);
  CHECK(init_glorot_uniform(5, 7, r1) == init_glorot_uniform(5, 7, r2));

  Rng big(2024);
  const Matrix draws = init_glorot_uniform(500, 200, big);  // 1e5 entries
  double sum = 0.0;
  for (double v : draws.values()) sum += v;
  CHECK(std::abs(sum / static_cast<double>(draws.size())) < 0.01);

  CHECK_THROWS_AS(init_glorot_uniform(0, 3, rng), ConfigError);
}

TEST_CASE("finite_diff_grad on analytic functions") {
  const auto square = [](std::span<const double> w) { return w[0] * w[0]; };
  const double w3[] = {3.0};
  CHECK(std::abs(finite_diff_grad(square, w3, 1e-6)[0] - 6.0) < 1e-6);

  const auto absval = [](std::span<const double> w) { return std::abs(w[0]); };
  const double w2[] = {2.0};
  CHECK(std::abs(finite_diff_grad(absval, w2, 1e-6)[0] - 1.0) < 1e-9);

  const auto constant = [](std::span<const double>) { return 4.0; };
  const double w[] = {1.0, -2.0, 0.5};
  for (double g : finite_diff_grad(constant, w, 1e-6)) CHECK(g == 0.0);
}

TEST_CASE("finite_diff_grad errors") {
  const auto blowup = [](std::span<const double> w) { return w[0] > 0 ? INFINITY : 0.0; };
  const double w[] = {0.0};
  CHECK_THROWS_AS(finite_diff_grad(blowup, w, 1e-6), NumericError);
  CHECK_THROWS_AS(finite_diff_grad(blowup, w, 0.0), ConfigError);
}

}  // TEST_SUITE
