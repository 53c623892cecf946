#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "rlvm/prng.hpp"

using rlvm::Prng;

TEST_CASE("same seed gives the same stream") {
  Prng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform_int stays in range and covers it") {
  Prng rng(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t v = rng.uniform_int(10);
    CHECK(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
  CHECK(rng.uniform_int(1) == 0);
  CHECK(rng.uniform_int(0) == 0);
}

TEST_CASE("next_double lies in [0,1)") {
  Prng rng(3);
  for (int i = 0; i < 10000; ++i) {
    double d = rng.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("split children are independent of later parent draws") {
  Prng a(11);
  Prng child = a.split();
  double first = child.next_double();
  // Redo: the child state derives only from the parent's position at split.
  Prng b(11);
  Prng child2 = b.split();
  b.next_u64();  // extra parent draw must not affect the already-made child
  CHECK(child2.next_double() == first);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  Prng rng(5);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7};
  Prng rng2(5);
  rng2.shuffle(w);
  CHECK(v == w);
}
