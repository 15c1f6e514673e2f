#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "affmap/core.hpp"

using namespace affmap;

TEST_CASE("vocabulary presets", "[core]") {
  Vocabulary easy = Vocabulary::easy();
  CHECK(easy.size() == 20);
  CHECK(easy.index_of("take") == 0);
  CHECK(easy.index_of("scoop") == 19);
  CHECK(easy.contains("turn-on"));
  CHECK(easy.index_of("juggle") == -1);

  Vocabulary complex = Vocabulary::complex();
  CHECK(complex.size() == 43);
  // The complex preset extends the easy one in place.
  for (int k = 0; k < easy.size(); ++k) CHECK(complex.name(k) == easy.name(k));
}

TEST_CASE("vocabularies reject duplicates and empties", "[core]") {
  CHECK_THROWS_AS(Vocabulary(std::vector<std::string>{}), Error);
  CHECK_THROWS_AS(Vocabulary({"a", "b", "a"}), Error);
}

TEST_CASE("worker count resolution", "[core]") {
  unsetenv("AFFMAP_THREADS");
  CHECK(worker_count(3) == 3);
  CHECK(worker_count(0) >= 1);  // hardware concurrency
  setenv("AFFMAP_THREADS", "2", 1);
  CHECK(worker_count(7) == 2);  // env wins
  setenv("AFFMAP_THREADS", "garbage", 1);
  CHECK(worker_count(7) == 7);  // unparsable env is ignored
  unsetenv("AFFMAP_THREADS");
}

TEST_CASE("parallel_for covers every index once and propagates errors", "[core]") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](size_t i) { hits[i] += 1; });
  for (int h : hits) REQUIRE(h == 1);

  CHECK_THROWS_AS(parallel_for(10, 4,
                               [&](size_t i) {
                                 if (i == 7) fail(errc::domain_error, "boom");
                               }),
                  Error);
}

TEST_CASE("class planes index row-major by class, row, column", "[core]") {
  auto planes = ClassPlanes<int>::zeros({"a", "b"}, 2, 3);
  planes.at(1, 1, 2) = 42;
  CHECK(planes.values[1 * 6 + 1 * 3 + 2] == 42);
  CHECK(planes.plane(1)[5] == 42);
  CHECK(planes.plane_size() == 6);
}
