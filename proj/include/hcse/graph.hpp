#pragma once

// Weighted undirected graphs, edge-list ingestion and cluster contraction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hcse/errors.hpp"

namespace hcse {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u;
  Vertex v;
  double weight;
};

struct Neighbor {
  Vertex to;
  double weight;
};

// Immutable weighted undirected graph. Every edge weight is positive, there
// are no self-loops and no parallel edges. Vertices are dense 0-based ids; an
// optional label per vertex keeps the external name it was read under.
class Graph {
 public:
  Graph() = default;

  // Builds a graph over `n` vertices. Parallel edges are merged by summing
  // their weights. Throws DomainError on self-loops, non-positive or
  // non-finite weights and out-of-range endpoints.
  static Graph from_edges(std::size_t n, std::vector<Edge> edges,
                          std::vector<std::string> labels = {}) {
    Graph g;
    g.n_ = n;
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n) {
        throw DomainError("edge endpoint out of range");
      }
      if (e.u == e.v) {
        throw DomainError("self-loop on vertex " + std::to_string(e.u));
      }
      if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
        throw DomainError("edge weight must be positive and finite");
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (const auto& e : edges) {
      if (!g.edges_.empty() && g.edges_.back().u == e.u && g.edges_.back().v == e.v) {
        g.edges_.back().weight += e.weight;
      } else {
        g.edges_.push_back(e);
      }
    }

    g.degree_.assign(n, 0.0);
    g.adjacency_.assign(n, {});
    for (const auto& e : g.edges_) {
      g.adjacency_[e.u].push_back({e.v, e.weight});
      g.adjacency_[e.v].push_back({e.u, e.weight});
    }
    for (std::size_t u = 0; u < n; ++u) {
      auto& adj = g.adjacency_[u];
      std::sort(adj.begin(), adj.end(),
                [](const Neighbor& a, const Neighbor& b) { return a.to < b.to; });
      double d = 0.0;
      for (const auto& nb : adj) d += nb.weight;
      g.degree_[u] = d;
      g.total_volume_ += d;
    }

    if (labels.empty()) {
      labels.reserve(n);
      for (std::size_t u = 0; u < n; ++u) labels.push_back(std::to_string(u));
    }
    if (labels.size() != n) throw DomainError("label count does not match vertex count");
    g.labels_ = std::move(labels);
    for (std::size_t u = 0; u < n; ++u) {
      if (!g.index_.emplace(g.labels_[u], static_cast<Vertex>(u)).second) {
        throw DomainError("duplicate vertex label '" + g.labels_[u] + "'");
      }
    }
    return g;
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(Vertex u) const { return adjacency_.at(u); }
  double degree(Vertex u) const { return degree_.at(u); }
  std::span<const double> degrees() const noexcept { return degree_; }
  double total_volume() const noexcept { return total_volume_; }

  double total_weight() const noexcept {
    double s = 0.0;
    for (const auto& e : edges_) s += e.weight;
    return s;
  }

  const std::string& label(Vertex u) const { return labels_.at(u); }
  std::span<const std::string> labels() const noexcept { return labels_; }

  // Dense id for an external label, or npos.
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t find_vertex(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? npos : it->second;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> degree_;
  double total_volume_ = 0.0;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Vertex> index_;
};

// Reads "u v" or "u v w" lines. Tokens are arbitrary strings mapped to dense
// ids in order of first appearance; lines starting with '#' and blank lines
// are skipped. A line holding a single token declares a (possibly isolated)
// vertex, which is how write_edge_list preserves zero-degree vertices.
inline Graph load_edge_list(std::istream& in) {
  std::unordered_map<std::string, Vertex> ids;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  auto intern = [&](const std::string& tok) {
    auto [it, inserted] = ids.emplace(tok, static_cast<Vertex>(labels.size()));
    if (inserted) labels.push_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(std::move(t));
    if (tok.size() == 1) {
      intern(tok[0]);
      continue;
    }
    if (tok.size() != 2 && tok.size() != 3) {
      throw ParseError("expected 'u v' or 'u v w', got " + std::to_string(tok.size()) +
                           " fields",
                       lineno);
    }
    double w = 1.0;
    if (tok.size() == 3) {
      std::size_t used = 0;
      try {
        w = std::stod(tok[2], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok[2].size()) throw ParseError("bad weight '" + tok[2] + "'", lineno);
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw DomainError("line " + std::to_string(lineno) + ": weight must be positive");
      }
    }
    if (tok[0] == tok[1]) {
      throw DomainError("line " + std::to_string(lineno) + ": self-loop on '" + tok[0] + "'");
    }
    Vertex u = intern(tok[0]);
    Vertex v = intern(tok[1]);
    edges.push_back({u, v, w});
  }
  const std::size_t n = labels.size();
  return Graph::from_edges(n, std::move(edges), std::move(labels));
}

inline Graph load_edge_list_from_string(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in);
}

// Writes edges grouped by their larger endpoint so that reloading the file
// reproduces the same dense ids. A vertex without a lower-numbered neighbor
// gets a declaration line first.
inline void write_edge_list(std::ostream& out, const Graph& g) {
  auto old = out.precision(17);
  for (std::size_t i = 0; i < g.num_vertices(); ++i) {
    const auto v = static_cast<Vertex>(i);
    auto nbs = g.neighbors(v);
    if (nbs.empty() || nbs.front().to > v) out << g.label(v) << '\n';
    for (const auto& nb : nbs) {
      if (nb.to > v) break;
      out << g.label(nb.to) << ' ' << g.label(v);
      if (nb.weight != 1.0) out << ' ' << nb.weight;
      out << '\n';
    }
  }
  out.precision(old);
}

inline double subset_volume(const Graph& g, std::span<const Vertex> subset) {
  double vol = 0.0;
  for (Vertex u : subset) {
    if (u >= g.num_vertices()) throw DomainError("vertex id out of range");
    vol += g.degree(u);
  }
  return vol;
}

// The graph obtained by shrinking each cluster to a single super-vertex.
// Edges internal to a cluster are dropped; edges leaving the covered set only
// show up in cluster_cut.
struct QuotientGraph {
  struct Link {
    std::size_t to;
    double weight;
  };

  std::vector<std::vector<Link>> adjacency;  // sorted by `to`, weights > 0
  std::vector<double> cluster_volume;
  std::vector<double> cluster_cut;

  std::size_t size() const noexcept { return cluster_volume.size(); }

  double weight(std::size_t a, std::size_t b) const {
    const auto& adj = adjacency.at(a);
    auto it = std::lower_bound(adj.begin(), adj.end(), b,
                               [](const Link& l, std::size_t x) { return l.to < x; });
    return it != adj.end() && it->to == b ? it->weight : 0.0;
  }
};

inline QuotientGraph quotient(const Graph& g, std::span<const std::vector<Vertex>> clusters) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  const std::size_t m = clusters.size();
  std::vector<std::size_t> owner(g.num_vertices(), kNone);
  for (std::size_t a = 0; a < m; ++a) {
    if (clusters[a].empty()) throw DomainError("quotient: empty cluster");
    for (Vertex x : clusters[a]) {
      if (x >= g.num_vertices()) throw DomainError("quotient: vertex id out of range");
      if (owner[x] != kNone) {
        throw DomainError("quotient: vertex " + std::to_string(x) + " in two clusters");
      }
      owner[x] = a;
    }
  }

  QuotientGraph q;
  q.adjacency.assign(m, {});
  q.cluster_volume.assign(m, 0.0);
  q.cluster_cut.assign(m, 0.0);

  // Each unordered cluster pair is accumulated once (from the smaller id) so
  // that weight(a, b) and weight(b, a) are bitwise identical.
  std::vector<double> acc(m, 0.0);
  std::vector<std::size_t> touched;
  for (std::size_t a = 0; a < m; ++a) {
    double vol = 0.0, cut = 0.0;
    for (Vertex x : clusters[a]) {
      vol += g.degree(x);
      for (const auto& nb : g.neighbors(x)) {
        std::size_t b = owner[nb.to];
        if (b == a) continue;
        cut += nb.weight;
        if (b != kNone && b > a) {
          if (acc[b] == 0.0) touched.push_back(b);
          acc[b] += nb.weight;
        }
      }
    }
    q.cluster_volume[a] = vol;
    q.cluster_cut[a] = cut;
    std::sort(touched.begin(), touched.end());
    for (std::size_t b : touched) {
      q.adjacency[a].push_back({b, acc[b]});
      q.adjacency[b].push_back({a, acc[b]});
      acc[b] = 0.0;
    }
    touched.clear();
  }
  for (auto& adj : q.adjacency) {
    std::sort(adj.begin(), adj.end(),
              [](const QuotientGraph::Link& l, const QuotientGraph::Link& r) { return l.to < r.to; });
  }
  return q;
}

}  // namespace hcse
