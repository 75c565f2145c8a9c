#include <doctest.h>

#include <set>
#include <string>

#include "dinerdash/config.hpp"
#include "dinerdash/errors.hpp"
#include "dinerdash/rng.hpp"
#include "test_support.hpp"

using namespace dinerdash;

namespace {

// Straight transcription of the published generators, kept apart from the
// library code.
struct ReferenceRng {
  uint64_t s;
  static uint64_t mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  ReferenceRng(uint64_t seed, uint64_t stream) : s(mix(seed ^ (stream * 0x9E3779B97F4A7C15ULL))) {
    if (s == 0) s = 0x9E3779B97F4A7C15ULL;
  }
  uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545F4914F6CDD1DULL;
  }
};

}  // namespace

TEST_CASE("splitmix64 matches the reference first output for seed 0") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("rng streams follow the reference generator") {
  for (uint64_t seed : {0ULL, 1ULL, 42ULL, 10000ULL, ~0ULL}) {
    for (uint64_t s = 0; s <= stream::kPolicy; ++s) {
      Rng rng(seed, s);
      ReferenceRng ref(seed, s);
      for (int i = 0; i < 100; ++i) REQUIRE(rng.next_u64() == ref.next());
    }
  }
}

TEST_CASE("rng streams are distinct for one seed") {
  std::set<uint64_t> firsts;
  for (uint64_t s = 0; s <= stream::kPolicy; ++s) firsts.insert(Rng(7, s).next_u64());
  CHECK(firsts.size() == 7);
}

TEST_CASE("uniform stays in [0, 1) and uniform_int in its range") {
  Rng rng(3, stream::kArrivals);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const int k = rng.uniform_int(-2, 4);
    REQUIRE(k >= -2);
    REQUIRE(k <= 4);
  }
  CHECK_THROWS_AS(rng.uniform_int(3, 2), std::invalid_argument);
}

TEST_CASE("default config constants") {
  const EnvConfig c;
  CHECK(c.table_sizes == std::array<int, 6>{2, 2, 4, 4, 6, 6});
  CHECK(c.queue_capacity == 7);
  CHECK(c.max_lives == 5);
  CHECK(c.arrival_prob == 0.10);
  CHECK(c.happiness_max == 5.0);
  CHECK(c.cook_steps == 15);
  CHECK(c.eat_steps == 20);
  CHECK(c.max_steps == 2000);
  CHECK(c.rewards.leave == -100);
  CHECK(c.rewards.illegal == -1);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("hard preset raises arrivals and queue decay only") {
  EnvConfig base = preset_config("base");
  EnvConfig hard = preset_config("hard");
  CHECK(hard.arrival_prob == 0.14);
  CHECK(hard.decay_queue == 0.03);
  base.arrival_prob = hard.arrival_prob;
  base.decay_queue = hard.decay_queue;
  CHECK(base == hard);
  CHECK(std::string(kDefaultPreset) == "hard");
  CHECK_THROWS_AS(preset_config("easy"), ConfigError);
}

TEST_CASE("validate names the offending field") {
  EnvConfig c;
  c.arrival_prob = 1.5;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("arrival_prob"), ConfigError);
  c = EnvConfig{};
  c.cook_steps = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("cook_steps"), ConfigError);
  c = EnvConfig{};
  c.decay_queue = -0.1;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("decay_queue"), ConfigError);
}

TEST_CASE("config text round-trips and the hash follows the text") {
  EnvConfig c = preset_config("hard");
  c.table_sizes = {1, 2, 3, 4, 5, 6};
  c.rewards.leave = -250.5;
  const EnvConfig back = parse_config(c.to_text());
  CHECK(back == c);
  CHECK(back.hash() == c.hash());
  CHECK(c.hash().size() == 16);
  CHECK(c.hash() != preset_config("hard").hash());
}

TEST_CASE("parse_config applies the preset first and rejects bad input") {
  const EnvConfig c = parse_config("arrival_prob = 0.2\npreset = hard\n# comment\nr_leave = -50\n");
  CHECK(c.arrival_prob == 0.2);
  CHECK(c.decay_queue == 0.03);
  CHECK(c.rewards.leave == -50);
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("cook_steps = 3\ncook_steps = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("cook_steps = many\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("table_sizes = 2,2,4,4,6\n"), doctest::Contains("table_sizes must have 6 entries"),
                       ConfigError);
}

TEST_CASE("load_config_file reports a missing file") {
  CHECK_THROWS_AS(load_config_file("/nonexistent/dinerdash.cfg"), ConfigError);
  testing::TempDir dir("cfg");
  const std::string path = dir.file("env.cfg");
  {
    std::ofstream out(path);
    out << "preset = base\nmax_steps = 300\n";
  }
  const EnvConfig c = load_config_file(path);
  CHECK(c.max_steps == 300);
  CHECK(c.arrival_prob == 0.10);
}
