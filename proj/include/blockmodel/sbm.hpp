#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockmodel/graph.hpp"
#include "blockmodel/mat.hpp"
#include "blockmodel/suff_stats.hpp"

namespace blockmodel {

// alpha: symmetric Dirichlet over roles; beta1/beta2: Beta prior on each
// block's link probability (pseudo-link / pseudo-non-link).
struct NodeModelHyper {
  double alpha = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
};

struct FitSchedule {
  double tol = 1e-6;       // max |change in any posterior entry| per sweep
  int max_sweeps = 200;
  int recount_every = 10;  // batch recount cadence, in sweeps
};

// Per-node role posterior. Rows of clamped nodes are held fixed by the fits.
struct RolePosterior {
  Mat lambda;                    // N x K, rows on the simplex
  std::vector<uint8_t> clamped;  // per node

  int num_nodes() const { return lambda.rows; }
  int num_roles() const { return lambda.cols; }
};

struct SweepTrace {
  int sweep = 0;
  double max_delta = 0.0;
  double free_energy = 0.0;
};

struct FitInfo {
  int sweeps = 0;
  bool converged = false;
  double free_energy = 0.0;
  int restart = 0;  // index of the kept restart, when restarts are used
  std::vector<SweepTrace> trace;
  std::vector<std::string> warnings;
};

// Collapsed conditional for assigning node v, given stats with v removed.
// Each candidate role scores the exact Beta-Bernoulli evidence change of
// every affected block plus the Dirichlet role-occupancy term; evaluated in
// log space and normalized. With hard neighbors this reproduces the exact
// collapsed Gibbs conditional.
std::vector<double> update_node_sbm(int v, const SuffStats& stats,
                                    const NodeModelHyper& hyper, const DirectedGraph& g);

// Same, with the class-evidence factor (m[y][k] + eta_dir) / (m[.][k] + C eta_dir)
// multiplied in when label != kUnknown.
std::vector<double> update_node_ssmb(int v, const SuffStats& stats,
                                     const NodeModelHyper& hyper, double eta_dir,
                                     const DirectedGraph& g, int label);

// Plug-in evidence of the current expected counts plus the posterior entropy.
// Used as the per-sweep diagnostic and for restart selection.
double node_model_free_energy(const SuffStats& stats, const NodeModelHyper& hyper,
                              const RolePosterior& posterior, bool with_class_term,
                              double eta_dir);

struct SbmOptions {
  bool include_self_pairs = false;  // count (v,v) pairs in every diagonal block
};

struct SbmFitResult {
  RolePosterior posterior;
  SuffStats stats;
  FitInfo info;
};

// Roles are identified with classes (K must equal the number of classes);
// Train rows are clamped one-hot, Test rows are inferred.
SbmFitResult fit_sbm(const DirectedGraph& g, const LabelTable& labels,
                     const NodeModelHyper& hyper, int K, const FitSchedule& schedule,
                     uint64_t seed, const SbmOptions& options = {});

// Most probable role; ties resolve to the lowest index.
int predict_sbm(const RolePosterior& posterior, int v);

}  // namespace blockmodel
