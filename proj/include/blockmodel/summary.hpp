#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blockmodel/graph.hpp"
#include "blockmodel/mat.hpp"
#include "blockmodel/sbm.hpp"
#include "blockmodel/smmb.hpp"
#include "blockmodel/suff_stats.hpp"

namespace blockmodel {

// The K-node role-interaction graph with posterior-mean intensities. For the
// node models the weights are per-block link probabilities in [0,1]; for the
// interaction model they form a distribution over the K*K ordered pairs.
struct SummaryNetwork {
  int K = 0;
  Mat weights;                    // K x K
  std::vector<double> role_size;  // expected nodes (or endpoint draws) per role
  double default_threshold = 0.0;
};

// Node models: weight = (d + beta1) / (pair_count + beta1 + beta2); default
// threshold is the prior mean beta1 / (beta1 + beta2).
SummaryNetwork build_summary(const SuffStats& stats, const NodeModelHyper& hyper);

// Interaction model: weight = (d + alpha) / (I + K^2 alpha); default
// threshold is the uniform baseline 1 / K^2.
SummaryNetwork build_summary(const SuffStats& stats, const SmmbHyper& hyper);

// One node per role labeled with its size; a directed edge per weight >=
// threshold, shaded linearly from light gray at the threshold to black at
// the maximum weight. Output ordering is fixed, so identical inputs give
// byte-identical text.
std::string export_dot(const SummaryNetwork& summary, double threshold);

// Rows = nodes sorted by (class, node id) with unlabeled nodes last,
// columns = roles. `mixture` is the per-node role distribution (the
// posterior for node models, the position average for the interaction one).
void export_node_role_matrix(const Mat& mixture, const DirectedGraph& g,
                             const LabelTable& labels, std::ostream& out,
                             const std::vector<std::string>& header_lines = {});

// Per-role class distribution p(c|k), one row per role. Either the columns
// of a fitted C x K class-role matrix, or the label-weighted empirical
// estimate from a node mixture. Roles with zero mass emit a uniform row and
// a raised zero_support flag.
Mat role_class_from_mu(const Mat& mu);
Mat role_class_empirical(const Mat& mixture, const LabelTable& labels,
                         std::vector<uint8_t>* zero_support = nullptr);
void export_role_class_dists(const Mat& dists, const std::vector<uint8_t>& zero_support,
                             std::ostream& out,
                             const std::vector<std::string>& header_lines = {});

}  // namespace blockmodel
