#include <infodiff/graph.hpp>
#include <infodiff/rng.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace infodiff::net {

namespace {

constexpr uint64_t kRegularStream = 0x7265670aULL;
constexpr uint64_t kErStream = 0x65720a0aULL;
constexpr uint64_t kBaStream = 0x62610a0aULL;

inline uint64_t edge_key(uint32_t u, uint32_t v) {
  if (u > v) std::swap(u, v);
  return (static_cast<uint64_t>(u) << 32) | v;
}

}  // namespace

Graph Graph::from_edges(uint32_t n, const std::vector<std::pair<uint32_t, uint32_t>>& edges) {
  if (n == 0) throw std::invalid_argument("graph needs at least one node");
  Graph g;
  g.n_ = n;
  g.m_ = edges.size();
  std::vector<uint64_t> deg(n + 1, 0);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loop not allowed");
    ++deg[u];
    ++deg[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (uint32_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.adj_.resize(2 * g.m_);
  std::vector<uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : edges) {
    g.adj_[cursor[u]++] = v;
    g.adj_[cursor[v]++] = u;
  }
  for (uint32_t v = 0; v < n; ++v) {
    auto first = g.adj_.begin() + static_cast<ptrdiff_t>(g.offsets_[v]);
    auto last = g.adj_.begin() + static_cast<ptrdiff_t>(g.offsets_[v + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last)
      throw std::invalid_argument("duplicate edge not allowed");
  }
  return g;
}

bool Graph::has_edge(uint32_t u, uint32_t v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<uint32_t, uint32_t>> Graph::edges() const {
  std::vector<std::pair<uint32_t, uint32_t>> out;
  out.reserve(m_);
  for (uint32_t u = 0; u < n_; ++u)
    for (uint32_t v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph build_regular(uint32_t n, uint32_t k, uint64_t seed) {
  if (k < 3) throw std::invalid_argument("regular generator requires k >= 3");
  if (k >= n) throw std::invalid_argument("regular generator requires k < n");
  if ((static_cast<uint64_t>(n) * k) % 2 != 0)
    throw std::invalid_argument("regular generator requires n*k even");

  auto rng = rng::make_engine(rng::derive_seed(seed, {kRegularStream}));
  const uint64_t m = static_cast<uint64_t>(n) * k / 2;
  std::vector<uint32_t> stubs;
  stubs.reserve(2 * m);
  for (uint32_t v = 0; v < n; ++v)
    for (uint32_t i = 0; i < k; ++i) stubs.push_back(v);

  constexpr int kMaxRestarts = 64;
  for (int attempt = 0; attempt < kMaxRestarts; ++attempt) {
    for (uint64_t i = stubs.size() - 1; i > 0; --i) {
      uint64_t j = rng::uniform_below(rng, i + 1);
      std::swap(stubs[i], stubs[j]);
    }
    std::vector<std::pair<uint32_t, uint32_t>> edges(m);
    std::unordered_set<uint64_t> present;
    present.reserve(2 * m);
    std::vector<uint64_t> defects;
    for (uint64_t i = 0; i < m; ++i) {
      uint32_t u = stubs[2 * i], v = stubs[2 * i + 1];
      edges[i] = {u, v};
      if (u == v || !present.insert(edge_key(u, v)).second) defects.push_back(i);
    }

    // Double-edge swaps: exchange a defective pair (u,v) with a random valid
    // edge (x,y) to form (u,x),(v,y) or (u,y),(v,x); degrees are preserved and
    // each accepted swap removes one defect.
    std::vector<char> is_defect(m, 0);
    for (uint64_t i : defects) is_defect[i] = 1;
    uint64_t budget = 400 * (defects.size() + 16);
    while (!defects.empty() && budget-- > 0) {
      uint64_t i = defects.back();
      auto [u, v] = edges[i];
      uint64_t j = rng::uniform_below(rng, m);
      if (is_defect[j]) continue;
      auto [x, y] = edges[j];
      if (rng::uniform_below(rng, 2) == 1) std::swap(x, y);
      if (u == x || v == y) continue;
      uint64_t k1 = edge_key(u, x), k2 = edge_key(v, y);
      if (k1 == k2 || present.count(k1) || present.count(k2)) continue;
      present.erase(edge_key(edges[j].first, edges[j].second));
      present.insert(k1);
      present.insert(k2);
      edges[i] = {u, x};
      edges[j] = {v, y};
      is_defect[i] = 0;
      defects.pop_back();
    }
    if (defects.empty()) return Graph::from_edges(n, edges);
  }
  throw std::runtime_error("regular generator failed to produce a simple graph");
}

Graph build_erdos_renyi(uint32_t n, double mean_degree, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("er generator requires n >= 2");
  if (!(mean_degree > 0.0) || mean_degree > static_cast<double>(n - 1))
    throw std::invalid_argument("er generator requires 0 < mean_degree <= n-1");

  const double p = mean_degree / static_cast<double>(n - 1);
  std::vector<std::pair<uint32_t, uint32_t>> edges;
  edges.reserve(static_cast<size_t>(mean_degree * n / 2 * 1.1) + 16);
  if (p >= 1.0) {
    for (uint32_t v = 1; v < n; ++v)
      for (uint32_t w = 0; w < v; ++w) edges.emplace_back(w, v);
    return Graph::from_edges(n, edges);
  }

  // Geometric skip sampling over the lower triangle (Batagelj & Brandes 2005).
  auto rng = rng::make_engine(rng::derive_seed(seed, {kErStream}));
  const double log1mp = std::log1p(-p);
  int64_t v = 1, w = -1;
  while (v < static_cast<int64_t>(n)) {
    double r = rng::uniform01(rng);
    w += 1 + static_cast<int64_t>(std::floor(std::log1p(-r) / log1mp));
    while (w >= v && v < static_cast<int64_t>(n)) {
      w -= v;
      ++v;
    }
    if (v < static_cast<int64_t>(n))
      edges.emplace_back(static_cast<uint32_t>(w), static_cast<uint32_t>(v));
  }
  return Graph::from_edges(n, edges);
}

Graph build_barabasi_albert(uint32_t n, uint32_t m, uint64_t seed) {
  if (m < 2) throw std::invalid_argument("ba generator requires m >= 2");
  if (m >= n) throw std::invalid_argument("ba generator requires m < n");

  auto rng = rng::make_engine(rng::derive_seed(seed, {kBaStream}));
  std::vector<std::pair<uint32_t, uint32_t>> edges;
  edges.reserve(static_cast<size_t>(m) * (m - 1) / 2 + static_cast<size_t>(m) * (n - m));
  std::vector<uint32_t> bag;  // one entry per edge endpoint => degree-proportional draws
  bag.reserve(2 * edges.capacity());
  for (uint32_t u = 1; u < m; ++u)
    for (uint32_t w = 0; w < u; ++w) {
      edges.emplace_back(w, u);
      bag.push_back(w);
      bag.push_back(u);
    }

  std::vector<uint32_t> chosen;
  chosen.reserve(m);
  for (uint32_t t = m; t < n; ++t) {
    chosen.clear();
    while (chosen.size() < m) {
      uint32_t cand = bag[rng::uniform_below(rng, bag.size())];
      if (std::find(chosen.begin(), chosen.end(), cand) == chosen.end())
        chosen.push_back(cand);
    }
    for (uint32_t c : chosen) {
      edges.emplace_back(c, t);
      bag.push_back(c);
      bag.push_back(t);
    }
  }
  return Graph::from_edges(n, edges);
}

Graph load_edge_list(std::istream& in, LoadReport* report) {
  std::vector<std::pair<int64_t, int64_t>> raw;
  std::string line;
  uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    const char* s = line.c_str() + pos;
    char* end = nullptr;
    errno = 0;
    long long a = std::strtoll(s, &end, 10);
    bool ok = end != s && errno == 0;
    if (ok) {
      s = end;
      long long b = std::strtoll(s, &end, 10);
      ok = end != s && errno == 0;
      if (ok) {
        while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
        ok = *end == '\0';
        if (ok && (a < 0 || b < 0)) ok = false;
        if (ok) raw.emplace_back(a, b);
      }
    }
    if (!ok)
      throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                               ": expected two non-negative integers");
  }
  if (raw.empty()) throw std::runtime_error("edge list contains no edges");

  std::vector<int64_t> ids;
  ids.reserve(2 * raw.size());
  for (auto [a, b] : raw) {
    ids.push_back(a);
    ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto dense = [&](int64_t id) {
    return static_cast<uint32_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  LoadReport rep;
  std::vector<std::pair<uint32_t, uint32_t>> edges;
  edges.reserve(raw.size());
  std::unordered_set<uint64_t> present;
  present.reserve(2 * raw.size());
  for (auto [a, b] : raw) {
    if (a == b) {
      ++rep.dropped_self_loops;
      continue;
    }
    uint32_t u = dense(a), v = dense(b);
    if (!present.insert(edge_key(u, v)).second) {
      ++rep.dropped_duplicates;
      continue;
    }
    edges.emplace_back(u, v);
  }
  if (report) *report = rep;

  Graph g = Graph::from_edges(static_cast<uint32_t>(ids.size()), edges);
  g.original_ids_ = std::move(ids);
  return g;
}

Graph load_edge_list_file(const std::string& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list file: " + path);
  return load_edge_list(in, report);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  const auto& ids = g.original_ids();
  for (auto [u, v] : g.edges()) {
    if (ids.empty())
      out << u << ' ' << v << '\n';
    else
      out << ids[u] << ' ' << ids[v] << '\n';
  }
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats st;
  const uint32_t n = g.node_count();
  double sum = 0.0, sum2 = 0.0;
  for (uint32_t v = 0; v < n; ++v) {
    double d = g.degree(v);
    sum += d;
    sum2 += d * d;
    ++st.degree_histogram[g.degree(v)];
  }
  st.mean_degree = sum / n;
  st.second_moment = sum2 / n;
  return st;
}

}  // namespace infodiff::net
