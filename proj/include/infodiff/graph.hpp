#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace infodiff::net {

// Simple undirected graph with CSR adjacency, immutable after construction.
// Node ids are dense 0..N-1; graphs loaded from edge lists keep the original
// external ids in a side table.
class Graph {
 public:
  Graph() = default;

  // Builds from undirected edges (any endpoint order). Rejects self-loops,
  // duplicate edges, and endpoints >= n. n may exceed the largest endpoint,
  // leaving isolated nodes.
  static Graph from_edges(uint32_t n, const std::vector<std::pair<uint32_t, uint32_t>>& edges);

  uint32_t node_count() const { return n_; }
  uint64_t edge_count() const { return m_; }
  uint32_t degree(uint32_t v) const {
    return static_cast<uint32_t>(offsets_[v + 1] - offsets_[v]);
  }
  std::span<const uint32_t> neighbors(uint32_t v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  bool has_edge(uint32_t u, uint32_t v) const;  // binary search in sorted adjacency

  // Unique edges as (u,v) with u < v, ascending.
  std::vector<std::pair<uint32_t, uint32_t>> edges() const;

  // External ids for graphs built by load_edge_list (ascending, so dense
  // order == sorted id order). Empty for generated graphs (identity mapping).
  const std::vector<int64_t>& original_ids() const { return original_ids_; }

 private:
  uint32_t n_ = 0;
  uint64_t m_ = 0;
  std::vector<uint64_t> offsets_;     // size n_+1
  std::vector<uint32_t> adj_;         // size 2*m_, sorted per node
  std::vector<int64_t> original_ids_;
  friend Graph load_edge_list(std::istream&, struct LoadReport*);
};

struct DegreeStats {
  double mean_degree = 0.0;
  double second_moment = 0.0;
  std::map<uint32_t, uint32_t> degree_histogram;
  std::optional<double> exponent_hint;  // power-law exponent, scale-free generation only
  double kappa() const { return second_moment / mean_degree; }  // E[k^2]/E[k]
};

// Random k-regular graph via the configuration model with bounded pair
// rewiring to remove self-loops/multi-edges (full restart if rewiring stalls).
Graph build_regular(uint32_t n, uint32_t k, uint64_t seed);

// G(n,p) with p = mean_degree/(n-1), sampled with geometric skips.
// mean_degree may equal n-1 (p = 1, complete graph).
Graph build_erdos_renyi(uint32_t n, double mean_degree, uint64_t seed);

// Preferential attachment from a K_m seed clique; each new node attaches m
// edges to distinct existing nodes with probability proportional to degree.
Graph build_barabasi_albert(uint32_t n, uint32_t m, uint64_t seed);

struct LoadReport {
  uint64_t dropped_self_loops = 0;
  uint64_t dropped_duplicates = 0;
  uint64_t dropped() const { return dropped_self_loops + dropped_duplicates; }
};

// Edge-list text: two whitespace-separated non-negative integer ids per line;
// '#' comment lines and blank lines ignored. Ids are remapped to dense
// 0..N-1 preserving sorted id order. Malformed lines raise std::runtime_error
// with the line number.
Graph load_edge_list(std::istream& in, LoadReport* report = nullptr);
Graph load_edge_list_file(const std::string& path, LoadReport* report = nullptr);

// Writes "u v" per line, sorted ascending; uses original ids when present.
void write_edge_list(const Graph& g, std::ostream& out);

DegreeStats degree_stats(const Graph& g);

}  // namespace infodiff::net
