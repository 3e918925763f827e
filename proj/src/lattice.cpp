#include "fpp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpp {

namespace {

std::uint32_t zigzag(std::int32_t v) {
  return (static_cast<std::uint32_t>(v) << 1) ^
         static_cast<std::uint32_t>(v >> 31);
}

void check_coord(std::int32_t v) {
  if (v <= -kCoordLimit || v >= kCoordLimit)
    throw std::overflow_error("site coordinate outside |x_i| < 2^20");
}

void check_dim(int d) {
  if (d < 2 || d > kMaxDim)
    throw std::invalid_argument("dimension must lie in [2,5]");
}

void check_axis(int axis, int d) {
  if (axis < 0 || axis >= d)
    throw std::domain_error("edge axis outside [0,d)");
}

}  // namespace

u128 encode_site(const Site& s, int d) {
  u128 key = 0;
  for (int i = d - 1; i >= 0; --i) {
    check_coord(s.x[i]);
    key = (key << 21) | zigzag(s.x[i]);
  }
  return key;
}

u128 encode_edge(const EdgeId& e, int d) {
  check_axis(e.axis, d);
  return (encode_site(e.base, d) << 3) | static_cast<unsigned>(e.axis);
}

std::vector<Site> neighbors(const Site& s, int d) {
  std::vector<Site> out;
  out.reserve(2 * d);
  for (int a = 0; a < d; ++a) {
    Site p = s;
    p.x[a] += 1;
    out.push_back(p);
    Site q = s;
    q.x[a] -= 1;
    out.push_back(q);
  }
  return out;
}

std::vector<EdgeId> origin_edges(int d) {
  check_dim(d);
  std::vector<EdgeId> out;
  out.reserve(2 * d);
  for (int a = 0; a < d; ++a) {
    out.push_back(EdgeId{Site{}, a});
    Site m{};
    m.x[a] = -1;
    out.push_back(EdgeId{m, a});
  }
  return out;
}

std::vector<Site> origin_sphere(int d) {
  check_dim(d);
  return neighbors(Site{}, d);
}

EdgeId edge_between(const Site& a, const Site& b, int d) {
  int axis = -1;
  for (int i = 0; i < d; ++i) {
    if (a.x[i] != b.x[i]) {
      if (axis >= 0 || std::abs(a.x[i] - b.x[i]) != 1)
        throw std::domain_error("edge_between: sites are not adjacent");
      axis = i;
    }
  }
  if (axis < 0) throw std::domain_error("edge_between: sites coincide");
  return (a.x[axis] < b.x[axis]) ? EdgeId{a, axis} : EdgeId{b, axis};
}

Region Region::full() {
  Region r;
  r.kind_ = Kind::full;
  return r;
}

Region Region::box(const Site& center, int k) {
  if (k < 0) throw std::invalid_argument("box: k must be >= 0");
  Region r;
  r.kind_ = Kind::box;
  r.center_ = center;
  r.k_ = k;
  return r;
}

Region Region::slab(std::vector<std::int32_t> v, int K, int n) {
  if (K < 0 || n < 0) throw std::invalid_argument("slab: K, n must be >= 0");
  Region r;
  r.kind_ = Kind::slab;
  r.v_ = std::move(v);
  r.K_ = K;
  r.n_ = n;
  return r;
}

Region Region::vertex_set(const std::vector<Site>& sites, int d) {
  check_dim(d);
  Region r;
  r.kind_ = Kind::vertex_set;
  r.keys_.reserve(sites.size());
  for (const auto& s : sites) r.keys_.push_back(encode_site(s, d));
  std::sort(r.keys_.begin(), r.keys_.end());
  return r;
}

Region Region::edge_set(const std::vector<EdgeId>& edges, int d) {
  check_dim(d);
  Region r;
  r.kind_ = Kind::edge_set;
  r.keys_.reserve(edges.size());
  for (const auto& e : edges) r.keys_.push_back(encode_edge(e, d));
  std::sort(r.keys_.begin(), r.keys_.end());
  return r;
}

Region Region::edge_complement(const std::vector<EdgeId>& edges, int d) {
  Region r = edge_set(edges, d);
  r.kind_ = Kind::edge_complement;
  return r;
}

bool Region::contains_site(const Site& s, int d) const {
  switch (kind_) {
    case Kind::full:
    case Kind::edge_set:
    case Kind::edge_complement:
      return true;
    case Kind::box:
      for (int i = 0; i < d; ++i)
        if (std::abs(s.x[i] - center_.x[i]) > k_) return false;
      return true;
    case Kind::slab: {
      if (s.x[0] < 0 || s.x[0] > n_) return false;
      for (int i = 1; i < d; ++i)
        if (std::abs(s.x[i] - v_[static_cast<std::size_t>(i) - 1]) > K_)
          return false;
      return true;
    }
    case Kind::vertex_set:
      return std::binary_search(keys_.begin(), keys_.end(),
                                encode_site(s, d));
  }
  return false;
}

bool Region::allows_edge(const EdgeId& e, int d) const {
  switch (kind_) {
    case Kind::edge_set:
      return std::binary_search(keys_.begin(), keys_.end(),
                                encode_edge(e, d));
    case Kind::edge_complement:
      return !std::binary_search(keys_.begin(), keys_.end(),
                                 encode_edge(e, d));
    default:
      return true;
  }
}

Environment make_environment(int d, EdgeWeightModel model,
                             std::uint64_t seed) {
  check_dim(d);
  if (const auto* deg = std::get_if<DegenerateModel>(&model)) {
    if (!(deg->value > 0.0))
      throw std::invalid_argument(
          "environment: degenerate weight must be > 0");
  }
  return Environment{d, std::move(model), seed};
}

double uniform_for_edge(const Environment& env, const EdgeId& e) {
  u128 key = encode_edge(e, env.d);
  return rng::uniform_for(env.seed, static_cast<std::uint64_t>(key >> 64),
                          static_cast<std::uint64_t>(key));
}

double weight(const Environment& env, const EdgeId& e) {
  return sample(env.model, uniform_for_edge(env, e));
}

std::vector<std::vector<std::int32_t>> transverse_grid(int K, int M, int d) {
  check_dim(d);
  if (K < 1 || M < 0)
    throw std::invalid_argument("transverse_grid: need K >= 1, M >= 0");
  int step = 3 * K;
  std::vector<std::int32_t> line;
  for (int m = -(M / step); m <= M / step; ++m)
    line.push_back(static_cast<std::int32_t>(m * step));
  std::vector<std::vector<std::int32_t>> out{{}};
  for (int i = 0; i < d - 1; ++i) {
    std::vector<std::vector<std::int32_t>> next;
    next.reserve(out.size() * line.size());
    for (const auto& prefix : out) {
      for (std::int32_t v : line) {
        auto vec = prefix;
        vec.push_back(v);
        next.push_back(std::move(vec));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::pair<Site, Site> slab_endpoints(const std::vector<std::int32_t>& v,
                                     int n) {
  int d = static_cast<int>(v.size()) + 1;
  check_dim(d);
  Site a{}, b{};
  b.x[0] = n;
  for (int i = 1; i < d; ++i) {
    a.x[i] = v[static_cast<std::size_t>(i) - 1];
    b.x[i] = v[static_cast<std::size_t>(i) - 1];
  }
  return {a, b};
}

}  // namespace fpp
