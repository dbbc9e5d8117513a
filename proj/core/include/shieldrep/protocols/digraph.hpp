#pragma once

#include <cstddef>
#include <vector>

namespace shieldrep::protocols {

/// Directed overlay graph over member slots 0..n-1.
class Digraph {
 public:
  explicit Digraph(std::size_t n) : adj_(n) {}

  static Digraph complete(std::size_t n);

  void add_edge(std::size_t from, std::size_t to);
  bool has_edge(std::size_t from, std::size_t to) const;
  std::size_t size() const { return adj_.size(); }
  const std::vector<std::size_t>& successors(std::size_t v) const { return adj_[v]; }

  /// Minimum over ordered pairs of the number of vertex-disjoint paths;
  /// n-1 for the complete digraph.
  std::size_t vertex_connectivity() const;
  /// Whether f vertex failures cannot disconnect the survivors.
  bool tolerates(std::size_t f) const { return vertex_connectivity() >= f + 1; }

 private:
  std::size_t disjoint_paths(std::size_t s, std::size_t t) const;

  std::vector<std::vector<std::size_t>> adj_;
};

}  // namespace shieldrep::protocols
