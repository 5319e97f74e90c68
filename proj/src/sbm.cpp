#include "blockmodel/sbm.hpp"

#include <cmath>
#include <stdexcept>

#include "blockmodel/rng.hpp"

namespace blockmodel {

namespace {

// Unnormalized log Beta-Bernoulli evidence of a block holding `links` links
// out of `pairs` ordered pairs. The Beta normalization constant cancels in
// every ratio and in the posterior normalization, so it is left out.
inline double log_block_evidence(double links, double pairs, double beta1, double beta2) {
  double non_links = std::max(pairs - links, 0.0);
  return std::lgamma(links + beta1) + std::lgamma(non_links + beta2) -
         std::lgamma(links + non_links + beta1 + beta2);
}

}  // namespace

namespace {

// Unnormalized log weights of the collapsed conditional for node v, given
// stats with v removed.
std::vector<double> collapsed_node_log_weights(int v, const SuffStats& stats,
                                               const NodeModelHyper& hyper,
                                               const DirectedGraph& g) {
  const int K = stats.K;
  if (K < 2) throw std::invalid_argument("node update needs K >= 2");
  if (stats.mode != SuffStats::Mode::node)
    throw std::invalid_argument("node update needs node-mode stats");
  if (stats.assigned[v])
    throw std::runtime_error("update of node " + std::to_string(v) +
                             " requires it to be removed from the stats first");

  const double b1 = hyper.beta1, b2 = hyper.beta2;
  auto fv = stats.f.row(v);
  auto gv = stats.g.row(v);
  const bool self_link = stats.include_self_pairs && g.has_self_loop(v);

  std::vector<double> lw(K);
  for (int k = 0; k < K; ++k) {
    double acc = std::log(stats.n[k] + hyper.alpha);
    for (int k2 = 0; k2 < K; ++k2) {
      if (k2 == k) {
        // Diagonal block: v contributes its links in both directions and
        // 2 n_k (+1 with self-pairs) new ordered pairs.
        double pairs0 = stats.pair_count(k, k);
        double dpairs = 2.0 * stats.n[k] + (stats.include_self_pairs ? 1.0 : 0.0);
        double links0 = stats.d(k, k);
        double dlinks = fv[k] + gv[k] + (self_link ? 1.0 : 0.0);
        acc += log_block_evidence(links0 + dlinks, pairs0 + dpairs, b1, b2) -
               log_block_evidence(links0, pairs0, b1, b2);
      } else {
        // Sender block (k, k2): v adds n_k2 pairs and its links into role k2.
        double pairs0 = stats.pair_count(k, k2);
        acc += log_block_evidence(stats.d(k, k2) + fv[k2], pairs0 + stats.n[k2], b1, b2) -
               log_block_evidence(stats.d(k, k2), pairs0, b1, b2);
        // Receiver block (k2, k): symmetric with the in-link counts.
        double pairs1 = stats.pair_count(k2, k);
        acc += log_block_evidence(stats.d(k2, k) + gv[k2], pairs1 + stats.n[k2], b1, b2) -
               log_block_evidence(stats.d(k2, k), pairs1, b1, b2);
      }
    }
    if (!std::isfinite(acc))
      throw std::runtime_error("non-finite update weight for node " + std::to_string(v));
    lw[k] = acc;
  }
  return lw;
}

}  // namespace

std::vector<double> update_node_sbm(int v, const SuffStats& stats,
                                    const NodeModelHyper& hyper, const DirectedGraph& g) {
  std::vector<double> lw = collapsed_node_log_weights(v, stats, hyper, g);
  softmax_in_place(lw);
  return lw;
}

std::vector<double> update_node_ssmb(int v, const SuffStats& stats,
                                     const NodeModelHyper& hyper, double eta_dir,
                                     const DirectedGraph& g, int label) {
  std::vector<double> lw = collapsed_node_log_weights(v, stats, hyper, g);
  if (label != LabelTable::kUnknown) {
    const int K = stats.K, C = stats.C;
    if (label < 0 || label >= C) throw std::invalid_argument("label out of range");
    // Dirichlet-categorical predictive of observing class `label` under each
    // role, with v itself held out of the class-role counts.
    for (int k = 0; k < K; ++k) {
      double col = 0.0;
      for (int c = 0; c < C; ++c) col += stats.m(c, k);
      lw[k] += std::log(stats.m(label, k) + eta_dir) - std::log(col + C * eta_dir);
      if (!std::isfinite(lw[k]))
        throw std::runtime_error("non-finite update weight for node " + std::to_string(v));
    }
  }
  softmax_in_place(lw);
  return lw;
}

double node_model_free_energy(const SuffStats& stats, const NodeModelHyper& hyper,
                              const RolePosterior& posterior, bool with_class_term,
                              double eta_dir) {
  const int K = stats.K, C = stats.C;
  double fe = std::lgamma(K * hyper.alpha) -
              std::lgamma(stats.assigned_count + K * hyper.alpha);
  for (int k = 0; k < K; ++k)
    fe += std::lgamma(stats.n[k] + hyper.alpha) - std::lgamma(hyper.alpha);
  const double lb0 = std::lgamma(hyper.beta1) + std::lgamma(hyper.beta2) -
                     std::lgamma(hyper.beta1 + hyper.beta2);
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = 0; k2 < K; ++k2)
      fe += log_block_evidence(stats.d(k1, k2), stats.pair_count(k1, k2), hyper.beta1,
                               hyper.beta2) -
            lb0;
  if (with_class_term) {
    for (int k = 0; k < K; ++k) {
      double col = 0.0;
      for (int c = 0; c < C; ++c) col += stats.m(c, k);
      fe += std::lgamma(C * eta_dir) - std::lgamma(col + C * eta_dir);
      for (int c = 0; c < C; ++c)
        fe += std::lgamma(stats.m(c, k) + eta_dir) - std::lgamma(eta_dir);
    }
  }
  for (int v = 0; v < posterior.num_nodes(); ++v)
    if (stats.assigned[v]) fe += entropy(posterior.lambda.row(v));
  return fe;
}

SbmFitResult fit_sbm(const DirectedGraph& g, const LabelTable& labels,
                     const NodeModelHyper& hyper, int K, const FitSchedule& schedule,
                     uint64_t seed, const SbmOptions& options) {
  const int N = g.num_nodes();
  const int C = labels.num_classes;
  if (K != C)
    throw std::invalid_argument("this model identifies roles with classes: K=" +
                                std::to_string(K) + " but the data has " +
                                std::to_string(C) + " classes");
  if (K < 2) throw std::invalid_argument("need at least two classes");
  if (labels.train_count() == 0) throw std::invalid_argument("no training nodes");

  SbmFitResult res;
  res.posterior.lambda = Mat(N, K);
  res.posterior.clamped.assign(N, 0);

  // Train rows are clamped one-hot; Test rows start near uniform with a
  // small seeded Dirichlet jitter to break symmetry.
  Rng init_rng(derive_seed(seed, "init"));
  std::vector<double> jitter(K);
  std::vector<int> order;
  for (int v = 0; v < N; ++v) {
    auto row = res.posterior.lambda.row(v);
    int y = labels.training_label(v);
    if (y != LabelTable::kUnknown) {
      row[y] = 1.0;
      res.posterior.clamped[v] = 1;
    } else {
      init_rng.dirichlet(jitter, 1.0);
      for (int k = 0; k < K; ++k) row[k] = 0.99 / K + 0.01 * jitter[k];
      order.push_back(v);
    }
  }

  std::vector<int> train_labels(N, LabelTable::kUnknown);  // m unused here
  auto recount = [&]() {
    return SuffStats::recount_nodes(res.posterior.lambda, std::vector<uint8_t>(N, 1), g,
                                    train_labels, K, C, options.include_self_pairs);
  };
  SuffStats stats = recount();

  Rng order_rng(derive_seed(seed, "order"));
  order_rng.shuffle(order);

  for (int sweep = 1; sweep <= schedule.max_sweeps && !order.empty(); ++sweep) {
    double max_delta = 0.0;
    for (int v : order) {
      auto row = res.posterior.lambda.row(v);
      stats.remove_node(v, row, g, LabelTable::kUnknown);
      std::vector<double> next = update_node_sbm(v, stats, hyper, g);
      max_delta = std::max(max_delta, max_abs_diff(row, next));
      std::copy(next.begin(), next.end(), row.begin());
      stats.add_node(v, row, g, LabelTable::kUnknown);
    }
    if (sweep % schedule.recount_every == 0) stats = recount();
    res.info.sweeps = sweep;
    res.info.trace.push_back(
        {sweep, max_delta,
         node_model_free_energy(stats, hyper, res.posterior, false, 0.0)});
    if (max_delta < schedule.tol) {
      res.info.converged = true;
      break;
    }
  }
  if (order.empty()) res.info.converged = true;

  res.stats = recount();
  res.info.free_energy =
      node_model_free_energy(res.stats, hyper, res.posterior, false, 0.0);
  return res;
}

int predict_sbm(const RolePosterior& posterior, int v) {
  return argmax(posterior.lambda.row(v));
}

}  // namespace blockmodel
