#pragma once

// Entropy and cost functionals of a cluster tree. All logarithms are base 2,
// and 0 * log(0) is taken as 0 (isolated vertices and zero-volume clusters
// contribute nothing).

#include <cmath>
#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "hcse/cluster_tree.hpp"
#include "hcse/errors.hpp"
#include "hcse/graph.hpp"

namespace hcse {

namespace detail {

inline void require_volume(const Graph& g) {
  if (!(g.total_volume() > 0.0)) throw DomainError("graph has no edges (vol(V) = 0)");
}

inline void require_match(const Graph& g, const ClusterTree& t) {
  if (t.num_vertices() != g.num_vertices()) {
    throw DomainError("tree covers " + std::to_string(t.num_vertices()) +
                      " vertices, graph has " + std::to_string(g.num_vertices()));
  }
}

// -(p / vol) * log2(child / parent), zero when either factor vanishes.
inline double entropy_term(double weight, double total, double child_vol, double parent_vol) {
  if (weight <= 0.0 || child_vol <= 0.0) return 0.0;
  return weight / total * std::log2(parent_vol / child_vol);
}

}  // namespace detail

inline double one_level_entropy(const Graph& g) {
  detail::require_volume(g);
  const double vol = g.total_volume();
  double h = 0.0;
  for (double d : g.degrees()) h += detail::entropy_term(d, vol, d, vol);
  return h;
}

// H^T(G): sum over non-root nodes of (g_a / vol(V)) * log2(vol(parent) / vol(a)).
inline double structural_entropy(const Graph& g, const ClusterTree& t) {
  detail::require_volume(g);
  detail::require_match(g, t);
  const double vol = g.total_volume();
  double h = 0.0;
  for (NodeId id = 0; id < t.arena_size(); ++id) {
    const TreeNode& nd = t.node(id);
    if (!nd.alive || id == t.root()) continue;
    h += detail::entropy_term(nd.cut, vol, nd.volume, t.node(nd.parent).volume);
  }
  return h;
}

// sum over edges of w(u,v) * log2 vol(lca(u,v)).
inline double cost_se(const Graph& g, const ClusterTree& t) {
  detail::require_match(g, t);
  double c = 0.0;
  for (const auto& e : g.edges()) c += e.weight * std::log2(t.node(t.lca(e.u, e.v)).volume);
  return c;
}

// Dasgupta's cost: sum over edges of w(u,v) * |lca(u,v)|.
inline double cost_dasgupta(const Graph& g, const ClusterTree& t) {
  detail::require_match(g, t);
  double c = 0.0;
  for (const auto& e : g.edges()) {
    c += e.weight * static_cast<double>(t.node(t.lca(e.u, e.v)).size);
  }
  return c;
}

// sum over edges of w(u,v) * f(|lca(u,v)|) for a function of cluster size.
template <typename F>
  requires std::invocable<F&, double>
double cost_concave(const Graph& g, const ClusterTree& t, F&& f) {
  detail::require_match(g, t);
  double c = 0.0;
  for (const auto& e : g.edges()) {
    const auto size = static_cast<double>(t.node(t.lca(e.u, e.v)).size);
    const double fx = static_cast<double>(f(size));
    if (!std::isfinite(fx)) {
      throw DomainError("cost function undefined at cluster size " + std::to_string(size));
    }
    c += e.weight * fx;
  }
  return c;
}

// H^T(G) minus (1/vol) * (-sum_u d_u log2 d_u + 2 * cost_se). Zero up to
// rounding for every graph and tree.
inline double theorem21_identity_residual(const Graph& g, const ClusterTree& t) {
  detail::require_volume(g);
  const double vol = g.total_volume();
  double self = 0.0;
  for (double d : g.degrees()) {
    if (d > 0.0) self += d * std::log2(d);
  }
  return structural_entropy(g, t) - (-self + 2.0 * cost_se(g, t)) / vol;
}

struct CostReport {
  double structural_entropy = 0.0;
  double cost_se = 0.0;
  double cost_dasgupta = 0.0;
  double one_level_entropy = 0.0;
};

inline CostReport cost_report(const Graph& g, const ClusterTree& t) {
  return {structural_entropy(g, t), cost_se(g, t), cost_dasgupta(g, t), one_level_entropy(g)};
}

// Shortest text that reads back to the same double.
inline std::string format_real(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string to_key_value(const CostReport& r) {
  std::ostringstream out;
  out << "structural_entropy=" << format_real(r.structural_entropy) << '\n'
      << "one_level_entropy=" << format_real(r.one_level_entropy) << '\n'
      << "cost_se=" << format_real(r.cost_se) << '\n'
      << "cost_dasgupta=" << format_real(r.cost_dasgupta) << '\n';
  return out.str();
}

}  // namespace hcse
