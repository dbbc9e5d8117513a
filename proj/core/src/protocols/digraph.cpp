#include "shieldrep/protocols/digraph.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace shieldrep::protocols {

Digraph Digraph::complete(std::size_t n) {
  Digraph g(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u != v) g.add_edge(u, v);
    }
  }
  return g;
}

void Digraph::add_edge(std::size_t from, std::size_t to) {
  if (!has_edge(from, to)) adj_[from].push_back(to);
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const {
  const auto& s = adj_[from];
  return std::find(s.begin(), s.end(), to) != s.end();
}

// Unit-capacity max flow on the split graph (v_in = 2v, v_out = 2v+1).
std::size_t Digraph::disjoint_paths(std::size_t s, std::size_t t) const {
  const std::size_t n = adj_.size();
  const std::size_t m = 2 * n;
  std::vector<std::vector<int>> cap(m, std::vector<int>(m, 0));
  for (std::size_t v = 0; v < n; ++v) {
    cap[2 * v][2 * v + 1] = (v == s || v == t) ? static_cast<int>(n) : 1;
    for (std::size_t w : adj_[v]) cap[2 * v + 1][2 * w] = 1;
  }
  const std::size_t src = 2 * s + 1;
  const std::size_t dst = 2 * t;
  std::size_t flow = 0;
  for (;;) {
    std::vector<std::size_t> parent(m, std::numeric_limits<std::size_t>::max());
    parent[src] = src;
    std::queue<std::size_t> q;
    q.push(src);
    while (!q.empty() && parent[dst] == std::numeric_limits<std::size_t>::max()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < m; ++v) {
        if (cap[u][v] > 0 && parent[v] == std::numeric_limits<std::size_t>::max()) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    if (parent[dst] == std::numeric_limits<std::size_t>::max()) break;
    for (std::size_t v = dst; v != src; v = parent[v]) {
      --cap[parent[v]][v];
      ++cap[v][parent[v]];
    }
    ++flow;
  }
  return flow;
}

std::size_t Digraph::vertex_connectivity() const {
  const std::size_t n = adj_.size();
  if (n <= 1) return 0;
  std::size_t best = n - 1;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      const std::size_t k = disjoint_paths(s, t);
      best = std::min(best, k);
    }
  }
  return best;
}

}  // namespace shieldrep::protocols
