#pragma once

#include <iosfwd>
#include <vector>

#include "blockmodel/mat.hpp"

namespace blockmodel {

// One labeled node as seen by the class-weight objective: the role mixture
// of each interaction endpoint the node occupies (a K-simplex per position)
// plus their average. n() is the number of positions; a self-interaction
// contributes two.
struct NodeMixtures {
  int label = 0;
  std::vector<std::vector<double>> factors;  // n x K position marginals
  std::vector<double> lambda_bar;            // K, average of factors

  double n() const { return static_cast<double>(factors.size()); }

  static NodeMixtures make(int label, std::vector<std::vector<double>> factors);
};

// F(eta) = sum_v [ eta_{y_v} . lambda_bar_v
//                  - log sum_c prod_j sum_k factors[j][k] exp(eta[c][k] / n_v) ]
// over the given (training) nodes, evaluated in log space. A node with no
// positions contributes the constant -log C.
double softmax_objective(const Mat& eta, const std::vector<NodeMixtures>& nodes);

Mat softmax_gradient(const Mat& eta, const std::vector<NodeMixtures>& nodes);

struct MaximizeOptions {
  double grad_tol = 1e-5;   // infinity norm
  int max_iters = 200;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double l2 = 0.0;          // optional ridge penalty on eta
  std::ostream* trace = nullptr;
};

struct MaximizeResult {
  Mat eta;
  double objective = 0.0;
  int iters = 0;
  int accepted_steps = 0;
  bool line_search_failed = false;
};

// Polak-Ribiere conjugate gradient ascent with Armijo backtracking. The
// direction restarts to steepest ascent every rows*cols iterations, whenever
// it stops being an ascent direction, and once more after a failed line
// search; a second failure returns the best point found with the flag set.
// The objective never decreases across accepted steps.
MaximizeResult maximize_softmax(const Mat& eta0, const std::vector<NodeMixtures>& nodes,
                                const MaximizeOptions& options = {});

}  // namespace blockmodel
