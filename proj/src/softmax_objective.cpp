#include "blockmodel/softmax_objective.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace blockmodel {

NodeMixtures NodeMixtures::make(int label, std::vector<std::vector<double>> factors) {
  NodeMixtures nm;
  nm.label = label;
  nm.factors = std::move(factors);
  if (!nm.factors.empty()) {
    size_t K = nm.factors.front().size();
    nm.lambda_bar.assign(K, 0.0);
    for (const auto& f : nm.factors) {
      if (f.size() != K) throw std::invalid_argument("ragged position marginals");
      for (size_t k = 0; k < K; ++k) nm.lambda_bar[k] += f[k];
    }
    for (double& v : nm.lambda_bar) v /= nm.n();
  }
  return nm;
}

namespace {

// log sum_k factors[k] * exp(eta_row[k] / n), max-shifted for stability.
double log_factor(std::span<const double> fac, std::span<const double> eta_row, double n) {
  double m = -std::numeric_limits<double>::infinity();
  for (double e : eta_row) m = std::max(m, e / n);
  double s = 0.0;
  for (size_t k = 0; k < fac.size(); ++k) s += fac[k] * std::exp(eta_row[k] / n - m);
  return m + std::log(s);
}

}  // namespace

double softmax_objective(const Mat& eta, const std::vector<NodeMixtures>& nodes) {
  const int C = eta.rows;
  std::vector<double> s(C);
  double F = 0.0;
  for (const auto& node : nodes) {
    if (node.label < 0 || node.label >= C) throw std::invalid_argument("label out of range");
    for (int c = 0; c < C; ++c) {
      s[c] = 0.0;
      for (const auto& fac : node.factors) s[c] += log_factor(fac, eta.row(c), node.n());
    }
    if (!node.lambda_bar.empty()) F += dot(eta.row(node.label), node.lambda_bar);
    F -= logsumexp(s);
  }
  if (!std::isfinite(F)) throw std::runtime_error("non-finite objective");
  return F;
}

Mat softmax_gradient(const Mat& eta, const std::vector<NodeMixtures>& nodes) {
  const int C = eta.rows, K = eta.cols;
  Mat grad(C, K);
  std::vector<double> s(C), resp(C), w(K);
  for (const auto& node : nodes) {
    if (node.label < 0 || node.label >= C) throw std::invalid_argument("label out of range");
    const double n = node.n();
    for (int c = 0; c < C; ++c) {
      s[c] = 0.0;
      for (const auto& fac : node.factors) s[c] += log_factor(fac, eta.row(c), n);
    }
    std::copy(s.begin(), s.end(), resp.begin());
    softmax_in_place(resp);
    if (!node.lambda_bar.empty()) {
      auto gy = grad.row(node.label);
      for (int k = 0; k < K; ++k) gy[k] += node.lambda_bar[k];
    }
    for (int c = 0; c < C; ++c) {
      auto gc = grad.row(c);
      auto ec = eta.row(c);
      for (const auto& fac : node.factors) {
        // within-position responsibilities: w_k = fac_k e^{eta_ck/n} / sum_l ...
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) m = std::max(m, ec[k] / n);
        double tot = 0.0;
        for (int k = 0; k < K; ++k) {
          w[k] = fac[k] * std::exp(ec[k] / n - m);
          tot += w[k];
        }
        for (int k = 0; k < K; ++k) gc[k] -= resp[c] * w[k] / (tot * n);
      }
    }
  }
  for (double v : grad.a)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite gradient");
  return grad;
}

MaximizeResult maximize_softmax(const Mat& eta0, const std::vector<NodeMixtures>& nodes,
                                const MaximizeOptions& options) {
  auto value = [&](const Mat& eta) {
    double F = softmax_objective(eta, nodes);
    if (options.l2 > 0.0)
      for (double v : eta.a) F -= 0.5 * options.l2 * v * v;
    return F;
  };
  auto grad_at = [&](const Mat& eta) {
    Mat gm = softmax_gradient(eta, nodes);
    if (options.l2 > 0.0)
      for (size_t i = 0; i < gm.a.size(); ++i) gm.a[i] -= options.l2 * eta.a[i];
    return gm;
  };
  auto inf_norm = [](const Mat& m) {
    double x = 0.0;
    for (double v : m.a) x = std::max(x, std::abs(v));
    return x;
  };

  MaximizeResult res;
  res.eta = eta0;
  double F = value(res.eta);
  Mat g = grad_at(res.eta);
  Mat dir = g;
  Mat g_prev = g;
  const int restart_period = std::max(1, eta0.rows * eta0.cols);
  bool steepest = true;
  int since_restart = 0;

  for (res.iters = 0; res.iters < options.max_iters; ++res.iters) {
    if (inf_norm(g) < options.grad_tol) break;

    double slope = 0.0;
    for (size_t i = 0; i < g.a.size(); ++i) slope += g.a[i] * dir.a[i];
    if (slope <= 0.0) {  // not an ascent direction; restart
      dir = g;
      steepest = true;
      since_restart = 0;
      slope = 0.0;
      for (double v : g.a) slope += v * v;
      if (slope == 0.0) break;
    }

    // Armijo backtracking from unit step.
    double t = 1.0;
    Mat trial = res.eta;
    bool accepted = false;
    double F_trial = F;
    for (int h = 0; h < 60; ++h) {
      for (size_t i = 0; i < trial.a.size(); ++i) trial.a[i] = res.eta.a[i] + t * dir.a[i];
      F_trial = value(trial);
      if (F_trial >= F + options.armijo_c * t * slope) {
        accepted = true;
        break;
      }
      t *= options.backtrack;
    }
    if (!accepted) {
      if (!steepest) {  // retry once along the gradient
        dir = g;
        steepest = true;
        since_restart = 0;
        continue;
      }
      res.line_search_failed = true;
      break;
    }

    res.eta = trial;
    F = F_trial;
    res.accepted_steps += 1;
    g_prev = std::move(g);
    g = grad_at(res.eta);
    if (options.trace) {
      *options.trace << res.iters << ',' << F << ',' << inf_norm(g) << ',' << t << '\n';
    }

    ++since_restart;
    if (since_restart >= restart_period) {
      dir = g;
      steepest = true;
      since_restart = 0;
      continue;
    }
    // Polak-Ribiere with reset on negative beta.
    double gg_prev = 0.0, gdiff = 0.0;
    for (size_t i = 0; i < g.a.size(); ++i) {
      gg_prev += g_prev.a[i] * g_prev.a[i];
      gdiff += g.a[i] * (g.a[i] - g_prev.a[i]);
    }
    double beta = gg_prev > 0.0 ? std::max(0.0, gdiff / gg_prev) : 0.0;
    for (size_t i = 0; i < dir.a.size(); ++i) dir.a[i] = g.a[i] + beta * dir.a[i];
    steepest = (beta == 0.0);
  }

  res.objective = F;
  return res;
}

}  // namespace blockmodel
