#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "fpp/distributions.hpp"
#include "fpp/rng.hpp"

namespace fpp {

inline constexpr int kMaxDim = 5;
// Coordinates are confined to |x_i| < 2^20 so that zig-zag packing below is
// collision-free; searches enforce this as a safety box.
inline constexpr std::int32_t kCoordLimit = 1 << 20;

using u128 = unsigned __int128;

struct Site {
  std::array<std::int32_t, kMaxDim> x{};
  friend bool operator==(const Site&, const Site&) = default;
};

template <class... Args>
Site make_site(Args... coords) {
  static_assert(sizeof...(coords) <= kMaxDim);
  Site s{};
  int i = 0;
  ((s.x[i++] = static_cast<std::int32_t>(coords)), ...);
  return s;
}

// Canonical id of the undirected edge <base, base + e_axis>. base is the
// endpoint with the smaller coordinate on axis, so every nearest-neighbor
// edge has exactly one id.
struct EdgeId {
  Site base;
  int axis = 0;
  friend bool operator==(const EdgeId&, const EdgeId&) = default;
};

// Zig-zag packs the first d coordinates into 21 bits each (site), plus 3 low
// bits for the axis (edge). Injective for |x_i| < 2^20, d <= 5; the high
// 64-bit word of an edge key stays below 2^44, clear of the rng domain tags.
u128 encode_site(const Site& s, int d);
u128 encode_edge(const EdgeId& e, int d);

// All sites at l1-distance 1, in the fixed order
// +axis0, -axis0, +axis1, -axis1, ...
std::vector<Site> neighbors(const Site& s, int d);

// The 2d edges incident to the origin, ordered like neighbors(0).
std::vector<EdgeId> origin_edges(int d);

// The unit l1 sphere around the origin, ordered like neighbors(0).
std::vector<Site> origin_sphere(int d);

// Canonical id of the edge joining two adjacent sites.
EdgeId edge_between(const Site& a, const Site& b, int d);

// Membership predicate over sites or edges. Vertex kinds restrict sites and
// allow all edges; edge kinds restrict edges and allow all sites.
class Region {
 public:
  enum class Kind { full, box, slab, vertex_set, edge_set, edge_complement };

  static Region full();
  // center + [-k,k]^d
  static Region box(const Site& center, int k);
  // sites with 0 <= x_0 <= n and (x_1..x_{d-1}) in v + [-K,K]^{d-1}
  static Region slab(std::vector<std::int32_t> v, int K, int n);
  static Region vertex_set(const std::vector<Site>& sites, int d);
  static Region edge_set(const std::vector<EdgeId>& edges, int d);
  static Region edge_complement(const std::vector<EdgeId>& edges, int d);

  Kind kind() const { return kind_; }
  bool contains_site(const Site& s, int d) const;
  bool allows_edge(const EdgeId& e, int d) const;

 private:
  Region() = default;
  Kind kind_ = Kind::full;
  Site center_{};
  int k_ = 0;
  std::vector<std::int32_t> v_;
  int K_ = 0;
  int n_ = 0;
  std::vector<u128> keys_;  // sorted, for the explicit-set kinds
};

// Deterministic disorder: (d, model, seed) define a pure weight for every
// edge, independent of query order.
struct Environment {
  int d;
  EdgeWeightModel model;
  std::uint64_t seed;
};

Environment make_environment(int d, EdgeWeightModel model, std::uint64_t seed);

// u = (hash(seed, encode_edge(e)) + 0.5) / 2^64, strictly inside (0,1).
double uniform_for_edge(const Environment& env, const EdgeId& e);

// sample(env.model, uniform_for_edge(env, e)); bit-identical across calls.
double weight(const Environment& env, const EdgeId& e);

// All (d-1)-vectors with every coordinate a multiple of 3K in [-M, M],
// in lexicographic order.
std::vector<std::vector<std::int32_t>> transverse_grid(int K, int M, int d);

// ((0, v), (n, v)) in dimension v.size() + 1.
std::pair<Site, Site> slab_endpoints(const std::vector<std::int32_t>& v,
                                     int n);

}  // namespace fpp
