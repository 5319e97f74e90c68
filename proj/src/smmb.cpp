#include "blockmodel/smmb.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "blockmodel/rng.hpp"

namespace blockmodel {

namespace {

struct HCacheCorrupt : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// log sum_k marginal[k] * exp(eta_row[k] / n), max-shifted.
double log_factor(std::span<const double> marginal, std::span<const double> eta_row,
                  double n) {
  double m = -std::numeric_limits<double>::infinity();
  for (double e : eta_row) m = std::max(m, e / n);
  double s = 0.0;
  for (size_t k = 0; k < marginal.size(); ++k)
    s += marginal[k] * std::exp(eta_row[k] / n - m);
  return m + std::log(s);
}

}  // namespace

InteractionPosterior InteractionPosterior::make(const DirectedGraph& g, int K) {
  InteractionPosterior p;
  p.K = K;
  p.N = g.num_nodes();
  const auto& edges = g.edges();
  p.senders.reserve(edges.size());
  p.receivers.reserve(edges.size());
  p.positions.assign(p.N, {});
  for (size_t i = 0; i < edges.size(); ++i) {
    p.senders.push_back(edges[i].first);
    p.receivers.push_back(edges[i].second);
    p.positions[edges[i].first].emplace_back(static_cast<int>(i), 0);
    p.positions[edges[i].second].emplace_back(static_cast<int>(i), 1);
  }
  p.lam.assign(edges.size() * static_cast<size_t>(K) * K, 0.0);
  p.bar_raw = Mat(p.N, K);
  p.n_pos.assign(p.N, 0.0);
  for (int v = 0; v < p.N; ++v) p.n_pos[v] = static_cast<double>(p.positions[v].size());
  return p;
}

void InteractionPosterior::row_marginal(int i, std::span<double> out) const {
  auto l = lambda(i);
  for (int k1 = 0; k1 < K; ++k1) {
    double s = 0.0;
    for (int k2 = 0; k2 < K; ++k2) s += l[static_cast<size_t>(k1) * K + k2];
    out[k1] = s;
  }
}

void InteractionPosterior::col_marginal(int i, std::span<double> out) const {
  auto l = lambda(i);
  for (int k2 = 0; k2 < K; ++k2) {
    double s = 0.0;
    for (int k1 = 0; k1 < K; ++k1) s += l[static_cast<size_t>(k1) * K + k2];
    out[k2] = s;
  }
}

void InteractionPosterior::marginal(int i, int side, std::span<double> out) const {
  side == 0 ? row_marginal(i, out) : col_marginal(i, out);
}

void InteractionPosterior::lambda_bar(int v, std::span<double> out) const {
  if (n_pos[v] <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  auto raw = bar_raw.row(v);
  for (int k = 0; k < K; ++k) out[k] = raw[k] / n_pos[v];
}

void InteractionPosterior::refresh_bar() {
  bar_raw.fill(0.0);
  std::vector<double> marg(K);
  for (int i = 0; i < num_interactions(); ++i) {
    row_marginal(i, marg);
    auto bs = bar_raw.row(senders[i]);
    for (int k = 0; k < K; ++k) bs[k] += marg[k];
    col_marginal(i, marg);
    auto br = bar_raw.row(receivers[i]);
    for (int k = 0; k < K; ++k) br[k] += marg[k];
  }
}

void HCache::rebuild(const InteractionPosterior& post, const Mat& eta) {
  const int C = eta.rows;
  log_products_ = Mat(post.N, C);
  std::vector<double> marg(post.K);
  for (int v = 0; v < post.N; ++v) {
    if (post.positions[v].empty()) continue;
    auto row = log_products_.row(v);
    for (const auto& [i, side] : post.positions[v]) {
      post.marginal(i, side, marg);
      for (int c = 0; c < C; ++c) row[c] += log_factor(marg, eta.row(c), post.n_pos[v]);
    }
  }
}

void HCache::apply_update(const InteractionPosterior& post, const Mat& eta, int i,
                          std::span<const double> old_row, std::span<const double> old_col,
                          std::span<const double> new_row, std::span<const double> new_col) {
  const int C = eta.rows;
  int s = post.senders[i], r = post.receivers[i];
  auto rs = log_products_.row(s);
  for (int c = 0; c < C; ++c)
    rs[c] += log_factor(new_row, eta.row(c), post.n_pos[s]) -
             log_factor(old_row, eta.row(c), post.n_pos[s]);
  auto rr = log_products_.row(r);
  for (int c = 0; c < C; ++c)
    rr[c] += log_factor(new_col, eta.row(c), post.n_pos[r]) -
             log_factor(old_col, eta.row(c), post.n_pos[r]);
}

std::vector<double> HCache::h_shifted(const InteractionPosterior& post, const Mat& eta,
                                      int i, int v, double& shift) const {
  const int C = eta.rows, K = post.K;
  const double n = post.n_pos[v];
  std::vector<double> L(log_products_.row(v).begin(), log_products_.row(v).end());
  // Divide out every position v occupies inside interaction i.
  std::vector<double> marg(K);
  if (post.senders[i] == v) {
    post.row_marginal(i, marg);
    for (int c = 0; c < C; ++c) L[c] -= log_factor(marg, eta.row(c), n);
  }
  if (post.receivers[i] == v) {
    post.col_marginal(i, marg);
    for (int c = 0; c < C; ++c) L[c] -= log_factor(marg, eta.row(c), n);
  }
  shift = -std::numeric_limits<double>::infinity();
  for (double l : L) shift = std::max(shift, l);
  if (!std::isfinite(shift)) throw HCacheCorrupt("h cache: non-finite log product");
  std::vector<double> h(K, 0.0);
  for (int c = 0; c < C; ++c) {
    double w = std::exp(L[c] - shift);
    for (int k = 0; k < K; ++k) h[k] += std::exp(eta(c, k) / n) * w;
  }
  for (double x : h)
    if (!std::isfinite(x) || x <= 0.0) throw HCacheCorrupt("h cache: degenerate h vector");
  return h;
}

std::vector<double> compute_h(const InteractionPosterior& post, const Mat& eta, int v,
                              int i) {
  const int C = eta.rows, K = post.K;
  const double n = post.n_pos[v];
  std::vector<double> L(C, 0.0);
  std::vector<double> marg(K);
  for (const auto& [j, side] : post.positions[v]) {
    if (j == i) continue;
    post.marginal(j, side, marg);
    for (int c = 0; c < C; ++c) L[c] += log_factor(marg, eta.row(c), n);
  }
  double shift = -std::numeric_limits<double>::infinity();
  for (double l : L) shift = std::max(shift, l);
  std::vector<double> h(K, 0.0);
  for (int c = 0; c < C; ++c) {
    double w = std::exp(L[c] - shift);
    for (int k = 0; k < K; ++k) h[k] += std::exp(eta(c, k) / n) * w;
  }
  for (double& x : h) x *= std::exp(shift);
  return h;
}

std::vector<double> update_interaction(int i, const SuffStats& stats,
                                       const SmmbHyper& hyper, const Mat& eta,
                                       const HCache& cache,
                                       const InteractionPosterior& post, int sender_label,
                                       int receiver_label) {
  const int K = stats.K;
  if (K < 2) throw std::invalid_argument("interaction update needs K >= 2");
  if (stats.mode != SuffStats::Mode::interaction)
    throw std::invalid_argument("interaction update needs interaction-mode stats");
  if (stats.assigned[i])
    throw std::runtime_error("update of interaction " + std::to_string(i) +
                             " requires it to be removed from the stats first");
  const int s = post.senders[i], r = post.receivers[i];
  const double Nb = stats.N * hyper.beta;

  // Class-coupling log factors per endpoint role, zero for unlabeled
  // endpoints. Each vector is shifted by its own maximum, which keeps the
  // exponentials tame and makes a constant vector contribute exactly nothing.
  std::vector<double> s_log(K, 0.0), r_log(K, 0.0), marg(K);
  auto fill_side = [&](int v, int side, int label, std::vector<double>& out) {
    if (label == LabelTable::kUnknown) return;
    double shift = 0.0;
    std::vector<double> h = cache.h_shifted(post, eta, i, v, shift);
    post.marginal(i, side, marg);
    double denom = dot(h, marg);
    if (!(denom > 0.0) || !std::isfinite(denom))
      throw HCacheCorrupt("h cache: nonpositive denominator");
    const double n = post.n_pos[v];
    for (int k = 0; k < K; ++k) out[k] = eta(label, k) / n - h[k] / denom;
    double mx = out[0];
    for (double x : out) mx = std::max(mx, x);
    for (double& x : out) x -= mx;
  };
  fill_side(s, 0, sender_label, s_log);
  fill_side(r, 1, receiver_label, r_log);

  std::vector<double> lw(static_cast<size_t>(K) * K);
  auto fs = stats.f.row(s);
  auto gr = stats.g.row(r);
  for (int k1 = 0; k1 < K; ++k1) {
    double base = std::log(fs[k1] + hyper.beta) - std::log(stats.f_tot[k1] + Nb) + s_log[k1];
    for (int k2 = 0; k2 < K; ++k2) {
      double w = base + std::log(stats.d(k1, k2) + hyper.alpha_pair) +
                 std::log(gr[k2] + hyper.beta) -
                 std::log(stats.g_tot[k2] + Nb + (k1 == k2 ? 1.0 : 0.0)) + r_log[k2];
      if (!std::isfinite(w))
        throw std::runtime_error("non-finite update weight for interaction " +
                                 std::to_string(i));
      lw[static_cast<size_t>(k1) * K + k2] = w;
    }
  }
  softmax_in_place(lw);
  return lw;
}

std::vector<NodeMixtures> build_node_mixtures(const InteractionPosterior& post,
                                              const LabelTable& labels) {
  std::vector<NodeMixtures> out;
  for (int v = 0; v < post.N; ++v) {
    int y = labels.training_label(v);
    if (y == LabelTable::kUnknown) continue;
    std::vector<std::vector<double>> factors;
    factors.reserve(post.positions[v].size());
    for (const auto& [i, side] : post.positions[v]) {
      std::vector<double> marg(post.K);
      post.marginal(i, side, marg);
      factors.push_back(std::move(marg));
    }
    out.push_back(NodeMixtures::make(y, std::move(factors)));
  }
  return out;
}

double interaction_model_free_energy(const SuffStats& stats, const SmmbHyper& hyper,
                                     const InteractionPosterior& post) {
  const int K = stats.K, N = stats.N;
  const double a = hyper.alpha_pair, b = hyper.beta;
  double fe = std::lgamma(K * K * a) - std::lgamma(stats.assigned_count + K * K * a);
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = 0; k2 < K; ++k2) fe += std::lgamma(stats.d(k1, k2) + a) - std::lgamma(a);
  for (int k = 0; k < K; ++k) {
    fe += std::lgamma(N * b) - std::lgamma(stats.f_tot[k] + N * b);
    fe += std::lgamma(N * b) - std::lgamma(stats.g_tot[k] + N * b);
  }
  for (int v = 0; v < N; ++v)
    for (int k = 0; k < K; ++k)
      fe += std::lgamma(stats.f(v, k) + b) - std::lgamma(b) + std::lgamma(stats.g(v, k) + b) -
            std::lgamma(b);
  for (int i = 0; i < post.num_interactions(); ++i)
    if (stats.assigned[i]) fe += entropy(post.lambda(i));
  return fe;
}

namespace {

SuffStats recount_interactions(const InteractionPosterior& post, int K) {
  SuffStats s = SuffStats::for_interactions(K, post.N, post.num_interactions());
  for (int i = 0; i < post.num_interactions(); ++i)
    s.add_interaction(i, post.lambda(i), post.senders[i], post.receivers[i]);
  return s;
}

}  // namespace

SmmbFitResult fit_smmb(const DirectedGraph& g, const LabelTable& labels,
                       const SmmbHyper& hyper, int K, const FitSchedule& schedule,
                       uint64_t seed, const SmmbOptions& options) {
  if (K < 2) throw std::invalid_argument("need at least two roles");
  const bool supervised = options.use_labels;
  if (supervised && labels.train_count() == 0)
    throw std::invalid_argument("no training nodes");
  const int C = std::max(labels.num_classes, 1);

  SmmbFitResult res;
  res.posterior = InteractionPosterior::make(g, K);
  res.eta = Mat(C, K);
  const int I = res.posterior.num_interactions();
  if (I == 0) throw std::invalid_argument("graph has no interactions");

  // Hard random pair assignments, for the same nucleation reason as the
  // single-membership fit: soft uniform starts collapse into one role pair.
  Rng init_rng(derive_seed(seed, "init"));
  for (int i = 0; i < I; ++i) res.posterior.lambda(i)[init_rng.uniform_int(K * K)] = 1.0;
  res.posterior.refresh_bar();
  SuffStats stats = recount_interactions(res.posterior, K);

  HCache cache;
  if (supervised) {
    cache = HCache(res.posterior.N, C);
    cache.rebuild(res.posterior, res.eta);
  }

  std::vector<int> order(I);
  for (int i = 0; i < I; ++i) order[i] = i;
  Rng order_rng(derive_seed(seed, "order"));
  order_rng.shuffle(order);

  std::vector<int> train_labels(g.num_nodes(), LabelTable::kUnknown);
  if (supervised)
    for (int v = 0; v < g.num_nodes(); ++v) train_labels[v] = labels.training_label(v);

  const bool optimize_eta = supervised && !options.freeze_eta;
  const int cap = optimize_eta ? options.max_outer : schedule.max_sweeps;
  MaximizeOptions cg = options.cg;
  cg.l2 = options.l2_eta;
  cg.trace = options.opt_trace;

  std::vector<double> old_row(K), old_col(K), new_row(K), new_col(K);
  bool warned_cg = false;
  double f_prev = 0.0;
  bool have_f_prev = false;

  for (int sweep = 1; sweep <= cap; ++sweep) {
    double max_delta = 0.0;
    for (int i : order) {
      const int s = res.posterior.senders[i], r = res.posterior.receivers[i];
      auto li = res.posterior.lambda(i);
      std::vector<double> old_lam(li.begin(), li.end());
      res.posterior.row_marginal(i, old_row);
      res.posterior.col_marginal(i, old_col);
      stats.remove_interaction(i, li, s, r);
      std::vector<double> next;
      try {
        next = update_interaction(i, stats, hyper, res.eta, cache, res.posterior,
                                  train_labels[s], train_labels[r]);
      } catch (const HCacheCorrupt&) {
        cache.rebuild(res.posterior, res.eta);
        next = update_interaction(i, stats, hyper, res.eta, cache, res.posterior,
                                  train_labels[s], train_labels[r]);
      }
      max_delta = std::max(max_delta, max_abs_diff(old_lam, next));
      std::copy(next.begin(), next.end(), li.begin());
      stats.add_interaction(i, li, s, r);
      res.posterior.row_marginal(i, new_row);
      res.posterior.col_marginal(i, new_col);
      auto bs = res.posterior.bar_raw.row(s);
      for (int k = 0; k < K; ++k) bs[k] += new_row[k] - old_row[k];
      auto br = res.posterior.bar_raw.row(r);
      for (int k = 0; k < K; ++k) br[k] += new_col[k] - old_col[k];
      if (supervised)
        cache.apply_update(res.posterior, res.eta, i, old_row, old_col, new_row, new_col);
    }

    if (sweep % schedule.recount_every == 0) {
      stats = recount_interactions(res.posterior, K);
      res.posterior.refresh_bar();
      if (supervised) cache.rebuild(res.posterior, res.eta);
    }

    res.info.sweeps = sweep;
    if (optimize_eta) {
      auto mixtures = build_node_mixtures(res.posterior, labels);
      MaximizeResult mr = maximize_softmax(res.eta, mixtures, cg);
      if (mr.line_search_failed && !warned_cg) {
        res.info.warnings.push_back(
            "class-weight line search stalled; kept the best point found");
        std::cerr << "warning: " << res.info.warnings.back() << "\n";
        warned_cg = true;
      }
      res.eta = std::move(mr.eta);
      cache.rebuild(res.posterior, res.eta);
      res.info.trace.push_back({sweep, max_delta, mr.objective});
      if (have_f_prev &&
          std::abs(mr.objective - f_prev) / std::max(std::abs(f_prev), 1e-12) < 1e-6) {
        res.info.converged = true;
        break;
      }
      f_prev = mr.objective;
      have_f_prev = true;
    } else {
      res.info.trace.push_back(
          {sweep, max_delta, interaction_model_free_energy(stats, hyper, res.posterior)});
      if (max_delta < schedule.tol) {
        res.info.converged = true;
        break;
      }
    }
  }

  res.stats = recount_interactions(res.posterior, K);
  res.posterior.refresh_bar();
  res.info.free_energy = interaction_model_free_energy(res.stats, hyper, res.posterior);
  if (optimize_eta) {
    auto mixtures = build_node_mixtures(res.posterior, labels);
    res.info.free_energy += softmax_objective(res.eta, mixtures);
  }
  return res;
}

void infer_heldout(SmmbFitResult& fit, const DirectedGraph& g, const LabelTable& labels,
                   const SmmbHyper& hyper, const FitSchedule& schedule) {
  auto& post = fit.posterior;
  const int K = post.K;
  std::vector<int> train_labels(g.num_nodes(), LabelTable::kUnknown);
  for (int v = 0; v < g.num_nodes(); ++v) train_labels[v] = labels.training_label(v);

  std::vector<int> ids;
  for (int i = 0; i < post.num_interactions(); ++i)
    if (train_labels[post.senders[i]] == LabelTable::kUnknown ||
        train_labels[post.receivers[i]] == LabelTable::kUnknown)
      ids.push_back(i);
  if (ids.empty()) return;

  HCache cache(post.N, fit.eta.rows);
  cache.rebuild(post, fit.eta);
  std::vector<double> old_row(K), old_col(K), new_row(K), new_col(K);
  for (int sweep = 1; sweep <= schedule.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (int i : ids) {
      const int s = post.senders[i], r = post.receivers[i];
      auto li = post.lambda(i);
      std::vector<double> old_lam(li.begin(), li.end());
      post.row_marginal(i, old_row);
      post.col_marginal(i, old_col);
      fit.stats.remove_interaction(i, li, s, r);
      std::vector<double> next;
      try {
        next = update_interaction(i, fit.stats, hyper, fit.eta, cache, post,
                                  train_labels[s], train_labels[r]);
      } catch (const HCacheCorrupt&) {
        cache.rebuild(post, fit.eta);
        next = update_interaction(i, fit.stats, hyper, fit.eta, cache, post,
                                  train_labels[s], train_labels[r]);
      }
      max_delta = std::max(max_delta, max_abs_diff(old_lam, next));
      std::copy(next.begin(), next.end(), li.begin());
      fit.stats.add_interaction(i, li, s, r);
      post.row_marginal(i, new_row);
      post.col_marginal(i, new_col);
      auto bs = post.bar_raw.row(s);
      for (int k = 0; k < K; ++k) bs[k] += new_row[k] - old_row[k];
      auto br = post.bar_raw.row(r);
      for (int k = 0; k < K; ++k) br[k] += new_col[k] - old_col[k];
      cache.apply_update(post, fit.eta, i, old_row, old_col, new_row, new_col);
    }
    if (max_delta < schedule.tol) break;
  }
  fit.stats = recount_interactions(post, K);
  post.refresh_bar();
}

int predict_smmb(const InteractionPosterior& post, const Mat& eta, int v) {
  const int C = eta.rows;
  std::vector<double> bar(post.K);
  post.lambda_bar(v, bar);
  std::vector<double> score(C);
  for (int c = 0; c < C; ++c) score[c] = dot(eta.row(c), bar);
  return argmax(score);
}

}  // namespace blockmodel
