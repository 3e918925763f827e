#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fpp/lattice.hpp"

namespace fpp {

// Componentwise floor map onto Z^d. x.size() determines d.
Site floor_site(const std::vector<double>& x);

// A shortest-passage-time query. Real endpoints must be floored (floor_site)
// before constructing the query. `region` restricts vertices (or edges, for
// edge-kind regions); `excluded_edges` removes a finite edge set.
// `overrides` substitute fixed weights for selected edges (importance
// sampling plumbing). `stop_threshold`, when finite, lets the search stop as
// soon as the minimum over unexplored paths provably exceeds it.
struct PassageQuery {
  Environment env;
  Site source{};
  Site target{};
  Region region = Region::full();
  std::vector<EdgeId> excluded_edges;
  std::vector<std::pair<EdgeId, double>> overrides;
  bool want_geodesic = false;
  double stop_threshold = std::numeric_limits<double>::infinity();
};

PassageQuery make_query(const Environment& env,
                        const std::vector<double>& source,
                        const std::vector<double>& target);

// time is +inf when the target is unreachable, or when the search stopped at
// stop_threshold (then truncated = true and the true time is provably larger
// than stop_threshold). When finite and requested, geodesic is a path inside
// the region avoiding excluded edges whose weights re-sum to time within
// 1e-9 relative.
struct PassageResult {
  double time = std::numeric_limits<double>::infinity();
  std::optional<std::vector<Site>> geodesic;
  std::int64_t settled_count = 0;
  std::int64_t max_frontier = 0;
  bool truncated = false;
};

// Sum of edge weights along an explicit path. Consecutive sites must be
// nearest neighbors; a single-site path has time 0.
double path_time(const Environment& env, const std::vector<Site>& path);

// Exact shortest passage time by Dijkstra over the implicit graph, querying
// edge weights lazily. Tie-breaking is deterministic: nodes settle in
// (distance, discovery index) order and the first relaxation reaching a
// node's final distance fixes its predecessor, with neighbors scanned in the
// documented +axis0, -axis0, +axis1, ... order.
PassageResult passage_time(const PassageQuery& q);

// Shortest time using no edge from `excluded`.
PassageResult passage_time_excluding(const Environment& env,
                                     const Site& source, const Site& target,
                                     const std::vector<EdgeId>& excluded);

// Minimum of path_time over every simple path inside the region, by
// exhaustive depth-first enumeration; +inf if none. The reachable part of
// the region must not exceed max_sites (<= 20).
double brute_force_oracle(const Environment& env, const Site& source,
                          const Site& target, const Region& region,
                          int max_sites);

// One Dijkstra run reporting the passage time to each target
// (time-constant plumbing: the targets share a single exploration).
std::vector<double> passage_times_multi(const Environment& env,
                                        const Site& source,
                                        const std::vector<Site>& targets);

}  // namespace fpp
