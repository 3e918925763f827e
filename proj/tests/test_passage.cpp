#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "fpp/distributions.hpp"
#include "fpp/lattice.hpp"
#include "fpp/passage.hpp"

using namespace fpp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int l1(const Site& a, const Site& b, int d) {
  int s = 0;
  for (int i = 0; i < d; ++i) s += std::abs(a.x[i] - b.x[i]);
  return s;
}

// A connected random site cluster grown from the origin. Shape randomness
// (mt19937) is independent of the weight randomness (keyed hashes).
std::vector<Site> random_cluster(std::mt19937& gen, int d, int max_sites) {
  std::vector<Site> sites{Site{}};
  std::set<u128> seen{encode_site(Site{}, d)};
  std::uniform_int_distribution<std::size_t> pick(0, 1u << 20);
  while (static_cast<int>(sites.size()) < max_sites) {
    const Site& from = sites[pick(gen) % sites.size()];
    auto ns = neighbors(from, d);
    const Site& cand = ns[pick(gen) % ns.size()];
    if (seen.insert(encode_site(cand, d)).second) sites.push_back(cand);
  }
  return sites;
}

}  // namespace

TEST_CASE("path_time sums edge weights") {
  Environment env = make_environment(2, make_degenerate(1.0), 5);
  std::vector<Site> path = {make_site(0, 0), make_site(1, 0), make_site(1, 1),
                            make_site(1, 2)};
  CHECK(path_time(env, path) == 3.0);
  CHECK(path_time(env, {make_site(7, 7)}) == 0.0);
  CHECK_THROWS_AS(path_time(env, {make_site(0, 0), make_site(1, 1)}),
                  std::domain_error);
  CHECK_THROWS_AS(path_time(env, {}), std::domain_error);

  Environment wb = make_environment(2, make_weibull(1.0, 0.5), 5);
  double expect = weight(wb, edge_between(path[0], path[1], 2)) +
                  weight(wb, edge_between(path[1], path[2], 2)) +
                  weight(wb, edge_between(path[2], path[3], 2));
  CHECK(path_time(wb, path) == expect);
}

TEST_CASE("degenerate weights make passage time the l1 distance") {
  Environment env = make_environment(2, make_degenerate(1.0), 3);
  PassageQuery q = make_query(env, {0, 0}, {5, -3});
  q.want_geodesic = true;
  PassageResult res = passage_time(q);
  CHECK(res.time == 8.0);
  CHECK(!res.truncated);
  REQUIRE(res.geodesic.has_value());
  const auto& g = *res.geodesic;
  REQUIRE(g.size() == 9);
  CHECK(g.front() == q.source);
  CHECK(g.back() == q.target);
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    CHECK(l1(g[i], g[i + 1], 2) == 1);
  CHECK(path_time(env, g) == res.time);

  Environment env3 = make_environment(3, make_degenerate(0.25), 3);
  PassageQuery q3 = make_query(env3, {0, 0, 0}, {2, 2, 2});
  CHECK(passage_time(q3).time == 1.5);
}

TEST_CASE("source equals target") {
  Environment env = make_environment(2, make_weibull(1.0, 1.0), 9);
  PassageQuery q = make_query(env, {4, 4}, {4, 4});
  q.want_geodesic = true;
  PassageResult res = passage_time(q);
  CHECK(res.time == 0.0);
  REQUIRE(res.geodesic.has_value());
  REQUIRE(res.geodesic->size() == 1);
  CHECK(res.geodesic->front() == make_site(4, 4));
}

TEST_CASE("dijkstra equals exhaustive path enumeration on small regions") {
  std::mt19937 gen(2024);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    int d = 2 + (trial % 2);
    auto cluster = random_cluster(gen, d, 12);
    Region region = Region::vertex_set(cluster, d);
    Environment env =
        make_environment(d, make_weibull(1.0, trial % 3 == 0 ? 0.5 : 1.0),
                         1000 + static_cast<std::uint64_t>(trial));
    Site source = cluster.front();
    Site target = cluster.back();
    PassageQuery q;
    q.env = env;
    q.source = source;
    q.target = target;
    q.region = region;
    double fast = passage_time(q).time;
    double slow = brute_force_oracle(env, source, target, region, 12);
    CHECK(fast == slow);
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("unreachable targets give infinite time in both engines") {
  Environment env = make_environment(2, make_weibull(1.0, 1.0), 77);
  // Two islands: the origin and a far site with no connecting vertices.
  Region region =
      Region::vertex_set({make_site(0, 0), make_site(5, 5)}, 2);
  PassageQuery q;
  q.env = env;
  q.source = make_site(0, 0);
  q.target = make_site(5, 5);
  q.region = region;
  q.want_geodesic = true;
  PassageResult res = passage_time(q);
  CHECK(res.time == kInf);
  CHECK(!res.geodesic.has_value());
  CHECK(!res.truncated);
  CHECK(brute_force_oracle(env, q.source, q.target, region, 12) == kInf);
}

TEST_CASE("region restriction is monotone in the region") {
  Environment env = make_environment(2, make_weibull(1.0, 1.0), 31);
  Site src = make_site(0, 0);
  Site dst = make_site(6, 0);

  PassageQuery q_full = make_query(env, {0, 0}, {6, 0});
  double t_full = passage_time(q_full).time;

  PassageQuery q_slab = q_full;
  q_slab.region = Region::slab({0}, 2, 6);
  double t_slab = passage_time(q_slab).time;

  std::vector<Site> line;
  for (int i = 0; i <= 6; ++i) line.push_back(make_site(i, 0));
  PassageQuery q_line = q_full;
  q_line.region = Region::vertex_set(line, 2);
  double t_line = passage_time(q_line).time;

  CHECK(t_full <= t_slab);
  CHECK(t_slab <= t_line);
  // The line region admits exactly one path, so the restricted passage time
  // must equal that path's time exactly.
  CHECK(t_line == path_time(env, line));
  CHECK(std::isfinite(t_full));
  (void)src;
  (void)dst;
}

TEST_CASE("excluded edges remove paths") {
  Environment env = make_environment(2, make_degenerate(1.0), 8);
  Site a = make_site(0, 0);
  Site b = make_site(1, 0);
  EdgeId direct = edge_between(a, b, 2);

  PassageResult round = passage_time_excluding(env, a, b, {direct});
  CHECK(round.time == 3.0);

  PassageQuery q;
  q.env = env;
  q.source = a;
  q.target = b;
  q.excluded_edges = {direct};
  CHECK(passage_time(q).time == 3.0);

  PassageResult blocked =
      passage_time_excluding(env, a, b, origin_edges(2));
  CHECK(blocked.time == kInf);
}

TEST_CASE("edge-complement regions match excluded edges") {
  Environment env = make_environment(2, make_weibull(1.0, 1.0), 12);
  Site a = make_site(0, 0);
  Site b = make_site(3, 2);
  EdgeId cut = edge_between(a, make_site(1, 0), 2);

  PassageQuery q1;
  q1.env = env;
  q1.source = a;
  q1.target = b;
  q1.excluded_edges = {cut};

  PassageQuery q2;
  q2.env = env;
  q2.source = a;
  q2.target = b;
  q2.region = Region::edge_complement({cut}, 2);

  CHECK(passage_time(q1).time == passage_time(q2).time);
}

TEST_CASE("overrides replace selected edge weights") {
  Environment env = make_environment(2, make_degenerate(1.0), 2);
  Site a = make_site(0, 0);
  Site b = make_site(1, 0);
  EdgeId direct = edge_between(a, b, 2);

  PassageQuery q = make_query(env, {0, 0}, {1, 0});
  q.overrides = {{direct, 99.0}};
  CHECK(passage_time(q).time == 3.0);

  q.overrides = {{direct, 0.125}};
  CHECK(passage_time(q).time == 0.125);
}

TEST_CASE("stop threshold truncates provably slower searches") {
  Environment env = make_environment(2, make_degenerate(1.0), 4);
  PassageQuery q = make_query(env, {0, 0}, {5, 0});

  q.stop_threshold = 3.0;
  PassageResult cut = passage_time(q);
  CHECK(cut.truncated);
  CHECK(cut.time == kInf);

  q.stop_threshold = 10.0;
  PassageResult full = passage_time(q);
  CHECK(!full.truncated);
  CHECK(full.time == 5.0);

  // The threshold must not perturb the exact answer.
  q.stop_threshold = kInf;
  CHECK(passage_time(q).time == 5.0);
}

TEST_CASE("multi-target times equal individual queries") {
  Environment env = make_environment(2, make_weibull(1.0, 0.5), 21);
  Site src = make_site(0, 0);
  std::vector<Site> targets = {make_site(3, 0), make_site(0, 3),
                               make_site(-2, 2), make_site(4, -1)};
  std::vector<double> multi = passage_times_multi(env, src, targets);
  REQUIRE(multi.size() == targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    PassageQuery q;
    q.env = env;
    q.source = src;
    q.target = targets[i];
    CHECK(multi[i] == passage_time(q).time);
  }
}

TEST_CASE("floor_site and make_query floor real coordinates") {
  Site f = floor_site({1.7, -0.2});
  CHECK(f == make_site(1, -1));
  CHECK(floor_site({0.0, 0.999, -3.0}) == make_site(0, 0, -3));

  Environment env = make_environment(2, make_degenerate(1.0), 1);
  PassageQuery q = make_query(env, {0.5, 0.9}, {2.5, 0.1});
  CHECK(q.source == make_site(0, 0));
  CHECK(q.target == make_site(2, 0));
  CHECK(passage_time(q).time == 2.0);
}

TEST_CASE("repeated queries are bit-identical and geodesics re-sum") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    Environment env = make_environment(2, make_weibull(1.3, 0.7), seed);
    PassageQuery q = make_query(env, {0, 0}, {7, 4});
    q.want_geodesic = true;
    PassageResult r1 = passage_time(q);
    PassageResult r2 = passage_time(q);
    CHECK(r1.time == r2.time);
    CHECK(r1.settled_count == r2.settled_count);
    REQUIRE(r1.geodesic.has_value());
    REQUIRE(r2.geodesic.has_value());
    CHECK(*r1.geodesic == *r2.geodesic);
    double resum = path_time(env, *r1.geodesic);
    CHECK(std::abs(resum - r1.time) <= 1e-9 * r1.time);
    CHECK(r1.geodesic->front() == q.source);
    CHECK(r1.geodesic->back() == q.target);
  }
}

TEST_CASE("search statistics are populated") {
  Environment env = make_environment(2, make_weibull(1.0, 1.0), 55);
  PassageQuery q = make_query(env, {0, 0}, {10, 0});
  PassageResult res = passage_time(q);
  CHECK(res.settled_count >= 11);
  CHECK(res.max_frontier >= 1);
}

TEST_CASE("oracle rejects oversized regions") {
  Environment env = make_environment(2, make_weibull(1.0, 1.0), 1);
  Region big = Region::box(make_site(0, 0), 4);  // 81 sites
  CHECK_THROWS_AS(
      brute_force_oracle(env, make_site(0, 0), make_site(1, 0), big, 20),
      std::invalid_argument);
}
