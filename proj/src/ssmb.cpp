#include "blockmodel/ssmb.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "blockmodel/rng.hpp"

namespace blockmodel {

namespace {

struct SingleFit {
  RolePosterior posterior;
  SuffStats stats;
  FitInfo info;
};

SingleFit fit_once(const DirectedGraph& g, const LabelTable& labels,
                   const SsmbHyper& hyper, int K, const FitSchedule& schedule,
                   uint64_t seed, bool include_self_pairs) {
  const int N = g.num_nodes();
  const int C = labels.num_classes;

  SingleFit res;
  res.posterior.lambda = Mat(N, K);
  res.posterior.clamped.assign(N, 0);

  // Hard random assignments nucleate block structure far more reliably than
  // near-uniform soft rows, which tend to drain into a single role.
  Rng init_rng(derive_seed(seed, "init"));
  for (int v = 0; v < N; ++v) res.posterior.lambda(v, init_rng.uniform_int(K)) = 1.0;

  std::vector<int> train_labels(N, LabelTable::kUnknown);
  for (int v = 0; v < N; ++v) train_labels[v] = labels.training_label(v);

  auto recount = [&]() {
    return SuffStats::recount_nodes(res.posterior.lambda, std::vector<uint8_t>(N, 1), g,
                                    train_labels, K, C, include_self_pairs);
  };
  SuffStats stats = recount();

  std::vector<int> order(N);
  for (int v = 0; v < N; ++v) order[v] = v;
  Rng order_rng(derive_seed(seed, "order"));
  order_rng.shuffle(order);

  for (int sweep = 1; sweep <= schedule.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (int v : order) {
      auto row = res.posterior.lambda.row(v);
      stats.remove_node(v, row, g, train_labels[v]);
      std::vector<double> next =
          update_node_ssmb(v, stats, hyper.node, hyper.eta_dir, g, train_labels[v]);
      max_delta = std::max(max_delta, max_abs_diff(row, next));
      std::copy(next.begin(), next.end(), row.begin());
      stats.add_node(v, row, g, train_labels[v]);
    }
    if (sweep % schedule.recount_every == 0) stats = recount();
    res.info.sweeps = sweep;
    res.info.trace.push_back(
        {sweep, max_delta,
         node_model_free_energy(stats, hyper.node, res.posterior, true, hyper.eta_dir)});
    if (max_delta < schedule.tol) {
      res.info.converged = true;
      break;
    }
  }

  res.stats = recount();
  res.info.free_energy =
      node_model_free_energy(res.stats, hyper.node, res.posterior, true, hyper.eta_dir);
  return res;
}

}  // namespace

SsmbFitResult fit_ssmb(const DirectedGraph& g, const LabelTable& labels,
                       const SsmbHyper& hyper, int K, const FitSchedule& schedule,
                       uint64_t seed, const SsmbOptions& options) {
  const int C = labels.num_classes;
  if (K < 2) throw std::invalid_argument("need at least two roles");
  if (C < 1) throw std::invalid_argument("need at least one class");
  if (labels.train_count() == 0) throw std::invalid_argument("no training nodes");
  if (options.restarts < 1) throw std::invalid_argument("restarts must be >= 1");

  SsmbFitResult best;
  bool have_best = false;
  std::string warn;
  if (K < C) {
    warn = "K=" + std::to_string(K) + " is below the class count " + std::to_string(C) +
           "; roles cannot separate all classes";
    std::cerr << "warning: " << warn << "\n";
  }
  for (int r = 0; r < options.restarts; ++r) {
    SingleFit fit = fit_once(g, labels, hyper, K, schedule,
                             derive_seed(seed, "restart", static_cast<uint64_t>(r)),
                             options.include_self_pairs);
    if (!have_best || fit.info.free_energy > best.info.free_energy) {
      best.posterior = std::move(fit.posterior);
      best.stats = std::move(fit.stats);
      best.info = std::move(fit.info);
      best.info.restart = r;
      have_best = true;
    }
  }
  if (!warn.empty()) best.info.warnings.push_back(warn);
  best.model = estimate_mu(best.stats, hyper.eta_dir);
  return best;
}

ClassRoleModel estimate_mu(const SuffStats& stats, double eta_dir) {
  const int K = stats.K, C = stats.C;
  if (C < 1) throw std::invalid_argument("class-role counts are empty");
  ClassRoleModel model;
  model.mu = Mat(C, K);
  for (int k = 0; k < K; ++k) {
    double col = 0.0;
    for (int c = 0; c < C; ++c) col += stats.m(c, k);
    for (int c = 0; c < C; ++c)
      model.mu(c, k) = (stats.m(c, k) + eta_dir) / (col + C * eta_dir);
  }
  return model;
}

int predict_ssmb(const RolePosterior& posterior, const ClassRoleModel& model, int v) {
  const int C = model.mu.rows;
  std::vector<double> score(C);
  for (int c = 0; c < C; ++c) score[c] = dot(model.mu.row(c), posterior.lambda.row(v));
  return argmax(score);
}

}  // namespace blockmodel
