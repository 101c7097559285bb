#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "thetanet/distributions.hpp"
#include "thetanet/random.hpp"

namespace thetanet {

struct Edge {
  std::int32_t src;
  std::int32_t dst;
  auto operator<=>(const Edge&) const = default;
};

// Adjacency of a directed (synaptic) or undirected (gap-junction) graph.
//
// Directed: edge src->dst means A[dst][src] = 1, i.e. dst receives input from
// src. Undirected edges are stored once with src <= dst. The incoming lists
// (CSR) are what the simulators consume; for an undirected graph they hold the
// full neighbourhood of each node.
class Network {
 public:
  Network(int n, bool directed, std::vector<Edge> edges);

  int size() const { return n_; }
  bool directed() const { return directed_; }
  std::span<const Edge> edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  std::span<const int> in_degrees() const { return in_degrees_; }
  std::span<const int> out_degrees() const { return out_degrees_; }
  // Undirected alias of in_degrees().
  std::span<const int> degrees() const { return in_degrees_; }

  // Directed: edges / n. Undirected: sum of degrees / n.
  double mean_degree() const;

  std::span<const std::int32_t> in_offsets() const { return in_offset_; }
  std::span<const std::int32_t> in_neighbors() const { return in_index_; }
  std::span<const std::int32_t> in_neighbors(int node) const {
    return std::span<const std::int32_t>(in_index_).subspan(
        static_cast<std::size_t>(in_offset_[node]),
        static_cast<std::size_t>(in_offset_[node + 1] - in_offset_[node]));
  }

  std::size_t self_loops() const;
  std::size_t duplicate_edges() const;
  bool is_simple() const { return self_loops() == 0 && duplicate_edges() == 0; }

  bool operator==(const Network& other) const {
    return n_ == other.n_ && directed_ == other.directed_ && edges_ == other.edges_;
  }

 private:
  int n_;
  bool directed_;
  std::vector<Edge> edges_;  // sorted
  std::vector<int> in_degrees_;
  std::vector<int> out_degrees_;
  std::vector<std::int32_t> in_offset_;
  std::vector<std::int32_t> in_index_;
};

enum class SumMatch {
  resample,  // redraw both sequences until the sums agree
  repair,    // draw once, then absorb the deficit into randomly chosen degrees
};

struct DegreeSequenceOptions {
  SumMatch mode = SumMatch::resample;
  int max_attempts = 10'000;
};

struct DegreeSequences {
  std::vector<int> in;
  std::vector<int> out;
};

DegreeSequences sample_degree_sequences(const DegreeDistribution& p_in,
                                        const DegreeDistribution& p_out, int n, Rng& rng,
                                        const DegreeSequenceOptions& options = {});

// Undirected sequence with an even sum (same resample/repair semantics).
std::vector<int> sample_degree_sequence(const DegreeDistribution& p, int n, Rng& rng,
                                        const DegreeSequenceOptions& options = {});

// Uniform stub matching. The result may contain self-loops and multi-edges.
Network configuration_model(std::span<const int> in_degrees, std::span<const int> out_degrees,
                            Rng& rng);
Network configuration_model(std::span<const int> degrees, Rng& rng);

// Degree-preserving double-edge swaps applied to defective edges until the
// graph is simple. Throws NumericalError after `max_swaps` attempts.
Network repair_defects(const Network& net, Rng& rng, long max_swaps = 100'000);

// Sampling, stub matching and repair in one call.
Network make_directed_network(const DegreeDistribution& p_in, const DegreeDistribution& p_out,
                              int n, Rng& rng, const DegreeSequenceOptions& options = {});
Network make_undirected_network(const DegreeDistribution& p, int n, Rng& rng,
                                const DegreeSequenceOptions& options = {});

// Text edge list: a `# thetanet-edgelist n=<n> directed=<0|1>` header, then
// one `src dst` pair per line.
void write_edge_list(std::ostream& os, const Network& net);
Network read_edge_list(std::istream& is);

}  // namespace thetanet
