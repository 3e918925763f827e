#include "fpp/passage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int32_t kNoPred = -1;

struct Node {
  Site site;
  double dist;
  std::int32_t pred;
  std::uint8_t settled;
  std::uint8_t is_target;
};

struct Slot {
  std::uint64_t lo;
  std::uint64_t hi;
  std::uint32_t idx;
  std::uint32_t epoch;
};

// Scratch reused across queries within a thread; cleared by epoch bump.
struct Workspace {
  std::vector<Slot> slots;
  std::size_t mask = 0;
  std::uint32_t epoch = 0;
  std::vector<Node> nodes;
  std::vector<std::pair<double, std::uint32_t>> heap;
};

thread_local Workspace tl_ws;

std::uint64_t slot_hash(std::uint64_t hi, std::uint64_t lo) {
  return rng::mix64(lo ^ rng::mix64(hi ^ 0x5bf03635ull));
}

void ws_reset(Workspace& ws) {
  ws.nodes.clear();
  ws.heap.clear();
  if (ws.slots.empty()) {
    ws.slots.resize(std::size_t{1} << 14);
    ws.mask = ws.slots.size() - 1;
  }
  if (++ws.epoch == 0) {
    std::fill(ws.slots.begin(), ws.slots.end(), Slot{});
    ws.epoch = 1;
  }
}

void ws_grow(Workspace& ws, int d) {
  std::vector<Slot> old = std::move(ws.slots);
  ws.slots.assign(old.size() * 2, Slot{});
  ws.mask = ws.slots.size() - 1;
  for (std::uint32_t i = 0; i < ws.nodes.size(); ++i) {
    u128 key = encode_site(ws.nodes[i].site, d);
    auto hi = static_cast<std::uint64_t>(key >> 64);
    auto lo = static_cast<std::uint64_t>(key);
    std::size_t pos = slot_hash(hi, lo) & ws.mask;
    while (ws.slots[pos].epoch == ws.epoch) pos = (pos + 1) & ws.mask;
    ws.slots[pos] = Slot{lo, hi, i, ws.epoch};
  }
}

std::uint32_t find_or_create(Workspace& ws, const Site& s, int d) {
  u128 key = encode_site(s, d);
  auto hi = static_cast<std::uint64_t>(key >> 64);
  auto lo = static_cast<std::uint64_t>(key);
  std::size_t pos = slot_hash(hi, lo) & ws.mask;
  while (true) {
    Slot& slot = ws.slots[pos];
    if (slot.epoch != ws.epoch) {
      std::uint32_t idx = static_cast<std::uint32_t>(ws.nodes.size());
      ws.nodes.push_back(Node{s, kInf, kNoPred, 0, 0});
      slot = Slot{lo, hi, idx, ws.epoch};
      if (ws.nodes.size() * 2 > ws.slots.size()) ws_grow(ws, d);
      return idx;
    }
    if (slot.lo == lo && slot.hi == hi) return slot.idx;
    pos = (pos + 1) & ws.mask;
  }
}

double edge_weight(const PassageQuery& q, const EdgeId& e) {
  for (const auto& [oe, ow] : q.overrides)
    if (oe == e) return ow;
  return weight(q.env, e);
}

bool edge_excluded(const PassageQuery& q, const EdgeId& e) {
  for (const auto& x : q.excluded_edges)
    if (x == e) return true;
  return false;
}

std::vector<Site> reconstruct(const Workspace& ws, std::uint32_t idx) {
  std::vector<Site> path;
  for (std::int32_t i = static_cast<std::int32_t>(idx); i != kNoPred;
       i = ws.nodes[static_cast<std::uint32_t>(i)].pred)
    path.push_back(ws.nodes[static_cast<std::uint32_t>(i)].site);
  std::reverse(path.begin(), path.end());
  return path;
}

// Core search shared by passage_time and passage_times_multi.
PassageResult dijkstra(const PassageQuery& q, const Site* targets,
                       std::size_t n_targets, std::vector<double>* out_times) {
  const int d = q.env.d;
  Workspace& ws = tl_ws;
  ws_reset(ws);

  PassageResult res;
  std::uint32_t src = find_or_create(ws, q.source, d);
  ws.nodes[src].dist = 0.0;
  std::size_t remaining = 0;
  std::uint32_t single_target = 0;
  for (std::size_t i = 0; i < n_targets; ++i) {
    std::uint32_t ti = find_or_create(ws, targets[i], d);
    if (!ws.nodes[ti].is_target) {
      ws.nodes[ti].is_target = 1;
      ++remaining;
    }
    single_target = ti;
  }

  ws.heap.emplace_back(0.0, src);
  const auto cmp = std::greater<>{};
  std::int64_t max_frontier = 1;

  while (!ws.heap.empty()) {
    auto [dv, vi] = ws.heap.front();
    std::pop_heap(ws.heap.begin(), ws.heap.end(), cmp);
    ws.heap.pop_back();
    Node& v = ws.nodes[vi];
    if (v.settled || dv > v.dist) continue;
    if (dv > q.stop_threshold) {
      res.truncated = true;
      break;
    }
    v.settled = 1;
    ++res.settled_count;
    if (v.is_target && --remaining == 0) break;

    // find_or_create below may reallocate ws.nodes; v must not be used past
    // this copy.
    const Site vs = v.site;
    for (int a = 0; a < d; ++a) {
      for (int dir = 0; dir < 2; ++dir) {
        Site w = vs;
        w.x[a] += dir == 0 ? 1 : -1;
        if (!q.region.contains_site(w, d)) continue;
        EdgeId e = dir == 0 ? EdgeId{vs, a} : EdgeId{w, a};
        if (!q.region.allows_edge(e, d)) continue;
        if (!q.excluded_edges.empty() && edge_excluded(q, e)) continue;
        double nd = dv + edge_weight(q, e);
        std::uint32_t wi = find_or_create(ws, w, d);
        Node& wn = ws.nodes[wi];
        if (!wn.settled && nd < wn.dist) {
          wn.dist = nd;
          wn.pred = static_cast<std::int32_t>(vi);
          ws.heap.emplace_back(nd, wi);
          std::push_heap(ws.heap.begin(), ws.heap.end(), cmp);
        }
      }
    }
    max_frontier = std::max(max_frontier,
                            static_cast<std::int64_t>(ws.heap.size()));
  }

  res.max_frontier = max_frontier;
  if (out_times) {
    out_times->clear();
    for (std::size_t i = 0; i < n_targets; ++i) {
      std::uint32_t ti = find_or_create(ws, targets[i], d);
      out_times->push_back(ws.nodes[ti].settled ? ws.nodes[ti].dist : kInf);
    }
    return res;
  }
  const Node& tgt = ws.nodes[single_target];
  if (tgt.settled) {
    res.time = tgt.dist;
    if (q.want_geodesic) res.geodesic = reconstruct(ws, single_target);
  }
  return res;
}

}  // namespace

Site floor_site(const std::vector<double>& x) {
  int d = static_cast<int>(x.size());
  if (d < 2 || d > kMaxDim)
    throw std::invalid_argument("floor_site: dimension must lie in [2,5]");
  Site s{};
  for (int i = 0; i < d; ++i) {
    double f = std::floor(x[static_cast<std::size_t>(i)]);
    if (!(std::abs(f) < static_cast<double>(kCoordLimit)))
      throw std::overflow_error("floor_site: coordinate outside |x_i| < 2^20");
    s.x[i] = static_cast<std::int32_t>(f);
  }
  return s;
}

PassageQuery make_query(const Environment& env,
                        const std::vector<double>& source,
                        const std::vector<double>& target) {
  if (static_cast<int>(source.size()) != env.d ||
      static_cast<int>(target.size()) != env.d)
    throw std::invalid_argument("make_query: endpoint dimension mismatch");
  PassageQuery q;
  q.env = env;
  q.source = floor_site(source);
  q.target = floor_site(target);
  return q;
}

double path_time(const Environment& env, const std::vector<Site>& path) {
  if (path.empty()) throw std::domain_error("path_time: empty site list");
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i)
    total += weight(env, edge_between(path[i - 1], path[i], env.d));
  return total;
}

PassageResult passage_time(const PassageQuery& q) {
  if (q.source == q.target) {
    PassageResult res;
    res.time = 0.0;
    if (q.want_geodesic) res.geodesic = std::vector<Site>{q.source};
    return res;
  }
  if (!q.region.contains_site(q.source, q.env.d) ||
      !q.region.contains_site(q.target, q.env.d))
    return PassageResult{};
  return dijkstra(q, &q.target, 1, nullptr);
}

PassageResult passage_time_excluding(const Environment& env,
                                     const Site& source, const Site& target,
                                     const std::vector<EdgeId>& excluded) {
  PassageQuery q;
  q.env = env;
  q.source = source;
  q.target = target;
  q.excluded_edges = excluded;
  return passage_time(q);
}

double brute_force_oracle(const Environment& env, const Site& source,
                          const Site& target, const Region& region,
                          int max_sites) {
  if (max_sites < 1 || max_sites > 20)
    throw std::invalid_argument("brute_force_oracle: max_sites must be <= 20");
  if (source == target) return 0.0;
  if (!region.contains_site(source, env.d) ||
      !region.contains_site(target, env.d))
    return kInf;

  // Enumerate the region component reachable from the source.
  std::vector<Site> sites{source};
  for (std::size_t head = 0; head < sites.size(); ++head) {
    for (const Site& w : neighbors(sites[head], env.d)) {
      if (!region.contains_site(w, env.d)) continue;
      if (std::find(sites.begin(), sites.end(), w) != sites.end()) continue;
      sites.push_back(w);
      if (static_cast<int>(sites.size()) > max_sites)
        throw std::invalid_argument("brute_force_oracle: region too large");
    }
  }
  int m = static_cast<int>(sites.size());
  int tgt = -1;
  for (int i = 0; i < m; ++i)
    if (sites[static_cast<std::size_t>(i)] == target) tgt = i;
  if (tgt < 0) return kInf;

  // Adjacency with weights, then exhaustive simple-path DFS.
  std::vector<std::vector<std::pair<int, double>>> adj(
      static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (const Site& w : neighbors(sites[static_cast<std::size_t>(i)],
                                   env.d)) {
      for (int j = 0; j < m; ++j) {
        if (sites[static_cast<std::size_t>(j)] == w) {
          EdgeId e =
              edge_between(sites[static_cast<std::size_t>(i)], w, env.d);
          adj[static_cast<std::size_t>(i)].emplace_back(j, weight(env, e));
        }
      }
    }
  }
  double best = kInf;
  struct Frame {
    int node;
    double acc;
  };
  std::vector<Frame> stack{{0, 0.0}};
  std::vector<std::uint32_t> masks{1u};
  while (!stack.empty()) {
    auto [v, acc] = stack.back();
    stack.pop_back();
    std::uint32_t mask = masks.back();
    masks.pop_back();
    if (v == tgt) {
      best = std::min(best, acc);
      continue;
    }
    for (const auto& [w, wt] : adj[static_cast<std::size_t>(v)]) {
      if (mask & (1u << w)) continue;
      double nacc = acc + wt;
      if (nacc >= best) continue;
      stack.push_back(Frame{w, nacc});
      masks.push_back(mask | (1u << w));
    }
  }
  return best;
}

std::vector<double> passage_times_multi(const Environment& env,
                                        const Site& source,
                                        const std::vector<Site>& targets) {
  PassageQuery q;
  q.env = env;
  q.source = source;
  std::vector<double> times;
  dijkstra(q, targets.data(), targets.size(), &times);
  return times;
}

}  // namespace fpp
