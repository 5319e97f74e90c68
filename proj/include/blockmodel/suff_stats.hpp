#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockmodel/graph.hpp"
#include "blockmodel/mat.hpp"

namespace blockmodel {

// Expected counts under the current posterior. Two modes share the struct:
//
// node mode (single-membership models; lambda_v is a K-simplex per node)
//   n[k]      expected number of assigned nodes with role k
//   d[k1][k2] expected number of binary links from role k1 to role k2
//   S[k1][k2] sum_v lambda_v[k1] * lambda_v[k2]; second moment used to turn
//             role occupancies into block pair counts exactly
//   f[v][k]   expected links from v into assigned nodes of role k
//   g[v][k]   expected links into v from assigned nodes of role k
//   m[c][k]   expected number of labeled assigned nodes of class c in role k
//
// interaction mode (mixed-membership model; lambda_i is a K x K simplex)
//   d[k1][k2] expected number of interactions with role pair (k1, k2)
//   f[v][k]   expected number of interactions sent by v as role k
//   g[v][k]   expected number of interactions received by v as role k
//   f_tot[k]  sum_v f[v][k];   g_tot[k]  sum_v g[v][k]
//   n_inter[v] number of assigned interaction endpoints at v
//
// All updates are O(K^2 + deg * K) per node or O(K^2) per interaction.
// Incremental drift is cancelled by periodic batch recounts; a count that
// goes below -1e-6 on removal signals corrupted bookkeeping and throws.
struct SuffStats {
  enum class Mode { node, interaction };

  Mode mode = Mode::node;
  int K = 0, C = 0, N = 0;
  bool include_self_pairs = false;  // node mode: count (v,v) pairs in the likelihood

  std::vector<double> n;      // K (node mode)
  Mat d;                      // K x K
  Mat S;                      // K x K (node mode)
  Mat f, g;                   // N x K
  Mat m;                      // C x K (node mode)
  std::vector<double> f_tot, g_tot;  // K (interaction mode)
  std::vector<double> n_inter;       // N (interaction mode)
  std::vector<uint8_t> assigned;     // per node / per interaction
  double assigned_count = 0.0;

  static SuffStats for_nodes(int K, int C, int N, bool include_self_pairs = false);
  static SuffStats for_interactions(int K, int N, int I);

  // label is a class id or LabelTable::kUnknown; only labeled nodes feed m.
  void add_node(int v, std::span<const double> lambda, const DirectedGraph& g,
                int label);
  void remove_node(int v, std::span<const double> lambda, const DirectedGraph& g,
                   int label);

  // lambda is a row-major K*K simplex over ordered role pairs.
  void add_interaction(int i, std::span<const double> lambda, int sender, int receiver);
  void remove_interaction(int i, std::span<const double> lambda, int sender, int receiver);

  // Expected number of ordered node pairs in block (k1, k2), under the
  // configured diagonal convention. Exact for hard assignments.
  double pair_count(int k1, int k2) const;

  // Rebuild from scratch; used every few sweeps to cancel float drift.
  static SuffStats recount_nodes(const Mat& lambda, const std::vector<uint8_t>& present,
                                 const DirectedGraph& g, const std::vector<int>& labels,
                                 int K, int C, bool include_self_pairs);

  // Returns a description of the first violated internal invariant, if any.
  std::optional<std::string> check_consistency(double tol = 1e-6) const;

  void dump_csv(std::ostream& out) const;
};

SuffStats parse_stats_csv(std::istream& in);

}  // namespace blockmodel
