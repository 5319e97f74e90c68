#pragma once

#include <cstdint>

#include "blockmodel/sbm.hpp"

namespace blockmodel {

struct SsmbHyper {
  NodeModelHyper node;     // alpha, beta1, beta2
  double eta_dir = 1.0;    // symmetric Dirichlet over classes, per role
};

// Posterior mean of each role's class distribution; columns sum to one.
struct ClassRoleModel {
  Mat mu;  // C x K
};

struct SsmbOptions {
  bool include_self_pairs = false;
  int restarts = 5;  // independent fits; the best free energy wins
};

struct SsmbFitResult {
  RolePosterior posterior;
  ClassRoleModel model;
  SuffStats stats;
  FitInfo info;
};

// Roles decouple from classes (K >= C is the useful regime; K < C only
// draws a warning). Every node's role is inferred; Train labels contribute
// the class-role evidence.
SsmbFitResult fit_ssmb(const DirectedGraph& g, const LabelTable& labels,
                       const SsmbHyper& hyper, int K, const FitSchedule& schedule,
                       uint64_t seed, const SsmbOptions& options = {});

ClassRoleModel estimate_mu(const SuffStats& stats, double eta_dir);

// argmax_c of mu row c dotted with the node's role posterior.
int predict_ssmb(const RolePosterior& posterior, const ClassRoleModel& model, int v);

}  // namespace blockmodel
