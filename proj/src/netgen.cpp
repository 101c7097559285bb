#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "thetanet/error.hpp"
#include "thetanet/network.hpp"

namespace thetanet {

namespace {

std::uint64_t edge_key(std::int32_t src, std::int32_t dst) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
         static_cast<std::uint32_t>(dst);
}

Edge canonical(Edge e, bool directed) {
  if (!directed && e.src > e.dst) std::swap(e.src, e.dst);
  return e;
}

template <typename T>
void fisher_yates(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

long long sum_of(std::span<const int> v) { return std::accumulate(v.begin(), v.end(), 0LL); }

// Moves `deficit` units into the sequence, one randomly chosen entry at a time,
// keeping every entry inside [lo, hi].
void absorb_deficit(std::vector<int>& seq, long long deficit, int lo, int hi, Rng& rng) {
  int guard = 0;
  while (deficit != 0) {
    if (++guard > 100 * static_cast<int>(seq.size()) + 1000)
      throw ConfigError("degree deficit cannot be absorbed within the support");
    int& d = seq[uniform_index(rng, seq.size())];
    const long long room = deficit > 0 ? hi - d : lo - d;
    const long long step = deficit > 0 ? std::min(deficit, room) : std::max(deficit, room);
    d += static_cast<int>(step);
    deficit -= step;
  }
}

std::pair<int, int> integer_support(const DegreeDistribution& p) {
  const int lo = std::max(1, static_cast<int>(std::lround(p.support_lo())));
  const int hi = std::max(lo, static_cast<int>(std::lround(p.support_hi())));
  return {lo, hi};
}

}  // namespace

Network::Network(int n, bool directed, std::vector<Edge> edges)
    : n_(n), directed_(directed), edges_(std::move(edges)) {
  if (n <= 0) throw ConfigError("network must have at least one node");
  for (auto& e : edges_) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
      throw ConfigError("edge endpoint out of range");
    e = canonical(e, directed_);
  }
  std::sort(edges_.begin(), edges_.end());

  in_degrees_.assign(static_cast<std::size_t>(n), 0);
  out_degrees_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& e : edges_) {
    if (directed_) {
      ++out_degrees_[e.src];
      ++in_degrees_[e.dst];
    } else {
      ++in_degrees_[e.src];
      ++in_degrees_[e.dst];
    }
  }
  if (!directed_) out_degrees_ = in_degrees_;

  in_offset_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) in_offset_[i + 1] = in_offset_[i] + in_degrees_[i];
  in_index_.resize(static_cast<std::size_t>(in_offset_[n]));
  std::vector<std::int32_t> fill(in_offset_.begin(), in_offset_.end() - 1);
  for (const auto& e : edges_) {
    in_index_[fill[e.dst]++] = e.src;
    if (!directed_) in_index_[fill[e.src]++] = e.dst;
  }
  for (int i = 0; i < n; ++i)
    std::sort(in_index_.begin() + in_offset_[i], in_index_.begin() + in_offset_[i + 1]);
}

double Network::mean_degree() const {
  return static_cast<double>(in_offset_.back()) / static_cast<double>(n_);
}

std::size_t Network::self_loops() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.src == e.dst; }));
}

std::size_t Network::duplicate_edges() const {
  std::size_t dup = 0;
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (edges_[i] == edges_[i - 1]) ++dup;
  return dup;
}

DegreeSequences sample_degree_sequences(const DegreeDistribution& p_in,
                                        const DegreeDistribution& p_out, int n, Rng& rng,
                                        const DegreeSequenceOptions& options) {
  if (n <= 0) throw ConfigError("network size must be positive");
  DegreeSequences seq;
  if (options.mode == SumMatch::repair) {
    seq.in = p_in.sample_integer(static_cast<std::size_t>(n), rng);
    seq.out = p_out.sample_integer(static_cast<std::size_t>(n), rng);
    const auto [lo, hi] = integer_support(p_out);
    absorb_deficit(seq.out, sum_of(seq.in) - sum_of(seq.out), lo, hi, rng);
    return seq;
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    seq.in = p_in.sample_integer(static_cast<std::size_t>(n), rng);
    seq.out = p_out.sample_integer(static_cast<std::size_t>(n), rng);
    if (sum_of(seq.in) == sum_of(seq.out)) return seq;
  }
  throw ConfigError("in/out degree sums did not match after " +
                    std::to_string(options.max_attempts) +
                    " attempts; raise the attempt limit or use repair mode");
}

std::vector<int> sample_degree_sequence(const DegreeDistribution& p, int n, Rng& rng,
                                        const DegreeSequenceOptions& options) {
  if (n <= 0) throw ConfigError("network size must be positive");
  std::vector<int> seq;
  if (options.mode == SumMatch::repair) {
    seq = p.sample_integer(static_cast<std::size_t>(n), rng);
    if (sum_of(seq) % 2 != 0) {
      const auto [lo, hi] = integer_support(p);
      absorb_deficit(seq, hi > lo ? 1 : -1, lo, hi, rng);
    }
    return seq;
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    seq = p.sample_integer(static_cast<std::size_t>(n), rng);
    if (sum_of(seq) % 2 == 0) return seq;
  }
  throw ConfigError("no even-sum degree sequence after " + std::to_string(options.max_attempts) +
                    " attempts; use repair mode");
}

Network configuration_model(std::span<const int> in_degrees, std::span<const int> out_degrees,
                            Rng& rng) {
  if (in_degrees.size() != out_degrees.size())
    throw ConfigError("in- and out-degree sequences differ in length");
  if (sum_of(in_degrees) != sum_of(out_degrees))
    throw ConfigError("in- and out-degree sums differ");
  const int n = static_cast<int>(in_degrees.size());
  std::vector<std::int32_t> out_stubs;
  std::vector<std::int32_t> in_stubs;
  for (int i = 0; i < n; ++i) {
    if (in_degrees[i] < 0 || out_degrees[i] < 0) throw ConfigError("negative degree");
    out_stubs.insert(out_stubs.end(), static_cast<std::size_t>(out_degrees[i]), i);
    in_stubs.insert(in_stubs.end(), static_cast<std::size_t>(in_degrees[i]), i);
  }
  fisher_yates(out_stubs, rng);
  std::vector<Edge> edges(in_stubs.size());
  for (std::size_t s = 0; s < edges.size(); ++s) edges[s] = {out_stubs[s], in_stubs[s]};
  return Network(n, true, std::move(edges));
}

Network configuration_model(std::span<const int> degrees, Rng& rng) {
  if (sum_of(degrees) % 2 != 0) throw ConfigError("undirected degree sum must be even");
  const int n = static_cast<int>(degrees.size());
  std::vector<std::int32_t> stubs;
  for (int i = 0; i < n; ++i) {
    if (degrees[i] < 0) throw ConfigError("negative degree");
    stubs.insert(stubs.end(), static_cast<std::size_t>(degrees[i]), i);
  }
  fisher_yates(stubs, rng);
  std::vector<Edge> edges(stubs.size() / 2);
  for (std::size_t s = 0; s < edges.size(); ++s) edges[s] = {stubs[2 * s], stubs[2 * s + 1]};
  return Network(n, false, std::move(edges));
}

Network repair_defects(const Network& net, Rng& rng, long max_swaps) {
  if (net.is_simple()) return net;
  const bool directed = net.directed();
  std::vector<Edge> edges(net.edges().begin(), net.edges().end());
  if (edges.size() < 2) throw NumericalError("too few edges to rewire defects");

  std::unordered_map<std::uint64_t, int> count;
  count.reserve(edges.size() * 2);
  for (const auto& e : edges) ++count[edge_key(e.src, e.dst)];

  auto defective = [&](const Edge& e) {
    return e.src == e.dst || count[edge_key(e.src, e.dst)] > 1;
  };
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (defective(edges[i])) pending.push_back(i);

  long attempts = 0;
  while (!pending.empty()) {
    const std::size_t i = pending.back();
    if (!defective(edges[i])) {
      pending.pop_back();
      continue;
    }
    if (++attempts > max_swaps)
      throw NumericalError("defect repair did not converge after " + std::to_string(max_swaps) +
                           " swap attempts");
    const std::size_t j = uniform_index(rng, edges.size());
    if (j == i) continue;
    const Edge e = edges[i];
    Edge f = edges[j];
    if (!directed && uniform01(rng) < 0.5) std::swap(f.src, f.dst);
    // Directed: a->b, c->d becomes a->d, c->b. Undirected: {a,b},{c,d} -> {a,d},{c,b}.
    const Edge ne = canonical({e.src, f.dst}, directed);
    const Edge nf = canonical({f.src, e.dst}, directed);
    if (ne.src == ne.dst || nf.src == nf.dst || ne == nf) continue;
    const auto ke = edge_key(ne.src, ne.dst);
    const auto kf = edge_key(nf.src, nf.dst);
    if (count[ke] > 0 || count[kf] > 0) continue;
    --count[edge_key(edges[i].src, edges[i].dst)];
    --count[edge_key(edges[j].src, edges[j].dst)];
    ++count[ke];
    ++count[kf];
    edges[i] = ne;
    edges[j] = nf;
  }
  Network out(net.size(), directed, std::move(edges));
  if (!out.is_simple()) throw NumericalError("defect repair left a non-simple graph");
  return out;
}

Network make_directed_network(const DegreeDistribution& p_in, const DegreeDistribution& p_out,
                              int n, Rng& rng, const DegreeSequenceOptions& options) {
  const auto seq = sample_degree_sequences(p_in, p_out, n, rng, options);
  for (int i = 0; i < n; ++i)
    if (seq.in[i] >= n || seq.out[i] >= n)
      throw ConfigError("sampled degree " + std::to_string(std::max(seq.in[i], seq.out[i])) +
                        " cannot be realized by a simple graph on " + std::to_string(n) +
                        " nodes");
  return repair_defects(configuration_model(seq.in, seq.out, rng), rng);
}

Network make_undirected_network(const DegreeDistribution& p, int n, Rng& rng,
                                const DegreeSequenceOptions& options) {
  const auto seq = sample_degree_sequence(p, n, rng, options);
  for (int k : seq)
    if (k >= n)
      throw ConfigError("sampled degree " + std::to_string(k) +
                        " cannot be realized by a simple graph on " + std::to_string(n) +
                        " nodes");
  return repair_defects(configuration_model(seq, rng), rng);
}

void write_edge_list(std::ostream& os, const Network& net) {
  os << "# thetanet-edgelist n=" << net.size() << " directed=" << (net.directed() ? 1 : 0)
     << '\n';
  for (const auto& e : net.edges()) os << e.src << ' ' << e.dst << '\n';
}

Network read_edge_list(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty edge list");
  int n = -1;
  int directed = -1;
  {
    std::istringstream header(line);
    std::string hash, tag, field;
    header >> hash >> tag;
    if (hash != "#" || tag != "thetanet-edgelist") throw ConfigError("missing edge-list header");
    while (header >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw ConfigError("malformed edge-list header field");
      const auto key = field.substr(0, eq);
      const int value = std::stoi(field.substr(eq + 1));
      if (key == "n") n = value;
      else if (key == "directed") directed = value;
      else throw ConfigError("unknown edge-list header field '" + key + "'");
    }
  }
  if (n <= 0 || (directed != 0 && directed != 1))
    throw ConfigError("edge-list header needs n and directed");
  std::vector<Edge> edges;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    Edge e{};
    if (!(row >> e.src >> e.dst)) throw ConfigError("malformed edge line '" + line + "'");
    edges.push_back(e);
  }
  return Network(n, directed == 1, std::move(edges));
}

}  // namespace thetanet
