#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "blockmodel/graph.hpp"
#include "blockmodel/mat.hpp"
#include "blockmodel/sbm.hpp"
#include "blockmodel/softmax_objective.hpp"
#include "blockmodel/suff_stats.hpp"

namespace blockmodel {

struct SmmbHyper {
  double alpha_pair = 1.0;  // symmetric Dirichlet over the K*K role pairs
  double beta = 1.0;        // symmetric Dirichlet over nodes, per role
};

// Per-interaction posterior over ordered role pairs, stored flat (K*K per
// interaction, row = sender role). Every edge of the multigraph is one
// interaction; duplicates and self-loops stay.
struct InteractionPosterior {
  int K = 0, N = 0;
  std::vector<int> senders, receivers;
  std::vector<double> lam;  // I * K * K
  Mat bar_raw;              // N x K running sums of position marginals
  std::vector<double> n_pos;  // positions per node; a self-interaction counts twice
  // (interaction, side) pairs per node; side 0 = sender, 1 = receiver.
  std::vector<std::vector<std::pair<int, int>>> positions;

  static InteractionPosterior make(const DirectedGraph& g, int K);

  int num_interactions() const { return static_cast<int>(senders.size()); }
  std::span<double> lambda(int i) {
    return {lam.data() + static_cast<size_t>(i) * K * K, static_cast<size_t>(K) * K};
  }
  std::span<const double> lambda(int i) const {
    return {lam.data() + static_cast<size_t>(i) * K * K, static_cast<size_t>(K) * K};
  }
  void row_marginal(int i, std::span<double> out) const;  // sender-role marginal
  void col_marginal(int i, std::span<double> out) const;  // receiver-role marginal
  void marginal(int i, int side, std::span<double> out) const;
  // Average role usage over the node's positions; zeros when it has none.
  void lambda_bar(int v, std::span<double> out) const;
  void refresh_bar();
};

// Per node and class, the running log product of position factors
//   sum_j log sum_k marginal_j[k] * exp(eta[c][k] / n_v)
// over every position j the node occupies. Updates divide the touched
// factors out and multiply the new ones in; a full rebuild happens whenever
// eta moves and on the periodic recount, which also cancels drift.
class HCache {
 public:
  HCache() = default;
  HCache(int N, int C) : log_products_(N, C) {}

  void rebuild(const InteractionPosterior& post, const Mat& eta);
  void apply_update(const InteractionPosterior& post, const Mat& eta, int i,
                    std::span<const double> old_row, std::span<const double> old_col,
                    std::span<const double> new_row, std::span<const double> new_col);

  // h vector for endpoint (v, side) of interaction i, excluding every
  // position of v inside i, scaled by exp(-shift) with the shift returned.
  // Throws on a corrupted cache (non-finite or nonpositive denominator).
  std::vector<double> h_shifted(const InteractionPosterior& post, const Mat& eta, int i,
                                int v, double& shift) const;

  const Mat& log_products() const { return log_products_; }

 private:
  Mat log_products_;  // N x C
};

// Straight evaluation of the h vector from the stored marginals: for each
// role k, sum_c exp(eta[c][k] / n_v) times the product over the other
// interactions at v of their class-tilted mixture weights.
std::vector<double> compute_h(const InteractionPosterior& post, const Mat& eta, int v,
                              int i);

// Collapsed conditional over the K*K role pairs for interaction i, given
// stats with i removed. Labeled endpoints (label >= 0) contribute the
// class-coupling factor exp(eta[y][k]/n - h_k / (h . old marginal)).
std::vector<double> update_interaction(int i, const SuffStats& stats,
                                       const SmmbHyper& hyper, const Mat& eta,
                                       const HCache& cache,
                                       const InteractionPosterior& post, int sender_label,
                                       int receiver_label);

struct SmmbOptions {
  bool freeze_eta = false;  // skip the eta optimization entirely
  bool use_labels = true;   // false fits the purely structural model
  int max_outer = 100;      // alternations of sweep + eta step
  double l2_eta = 0.0;
  MaximizeOptions cg;
  std::ostream* opt_trace = nullptr;
};

struct SmmbFitResult {
  InteractionPosterior posterior;
  Mat eta;  // C x K
  SuffStats stats;
  FitInfo info;
};

// Alternates one full shuffled sweep over all interactions with a conjugate
// gradient pass on eta (initialized at zero), stopping when the relative
// change of the class objective drops below the schedule tolerance scale
// (1e-6) or after max_outer rounds. With eta frozen or labels unused the
// stop rule falls back to the posterior-change tolerance.
SmmbFitResult fit_smmb(const DirectedGraph& g, const LabelTable& labels,
                       const SmmbHyper& hyper, int K, const FitSchedule& schedule,
                       uint64_t seed, const SmmbOptions& options = {});

// Extra sweeps restricted to interactions touching non-Train nodes, with the
// class coupling kept only on Train endpoints. Refines fit.posterior in
// place; eta does not move.
void infer_heldout(SmmbFitResult& fit, const DirectedGraph& g, const LabelTable& labels,
                   const SmmbHyper& hyper, const FitSchedule& schedule);

// argmax_c eta[c] . lambda_bar_v; ties resolve to the lowest class.
int predict_smmb(const InteractionPosterior& post, const Mat& eta, int v);

// Position marginals of the Train nodes, as consumed by the eta objective.
std::vector<NodeMixtures> build_node_mixtures(const InteractionPosterior& post,
                                              const LabelTable& labels);

// Plug-in collapsed evidence of the pair assignments and endpoint draws plus
// the posterior entropy; the structural convergence diagnostic.
double interaction_model_free_energy(const SuffStats& stats, const SmmbHyper& hyper,
                                     const InteractionPosterior& post);

}  // namespace blockmodel
