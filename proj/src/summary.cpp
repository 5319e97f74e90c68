#include "blockmodel/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace blockmodel {

namespace {

void fmt(std::ostream& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out << buf;
}

}  // namespace

SummaryNetwork build_summary(const SuffStats& stats, const NodeModelHyper& hyper) {
  if (stats.mode != SuffStats::Mode::node)
    throw std::invalid_argument("node-model summary needs node-mode stats");
  SummaryNetwork s;
  s.K = stats.K;
  s.weights = Mat(s.K, s.K);
  for (int k1 = 0; k1 < s.K; ++k1)
    for (int k2 = 0; k2 < s.K; ++k2)
      s.weights(k1, k2) = (stats.d(k1, k2) + hyper.beta1) /
                          (stats.pair_count(k1, k2) + hyper.beta1 + hyper.beta2);
  s.role_size = stats.n;
  s.default_threshold = hyper.beta1 / (hyper.beta1 + hyper.beta2);
  return s;
}

SummaryNetwork build_summary(const SuffStats& stats, const SmmbHyper& hyper) {
  if (stats.mode != SuffStats::Mode::interaction)
    throw std::invalid_argument("interaction-model summary needs interaction-mode stats");
  SummaryNetwork s;
  s.K = stats.K;
  s.weights = Mat(s.K, s.K);
  double total = stats.assigned_count + s.K * s.K * hyper.alpha_pair;
  for (int k1 = 0; k1 < s.K; ++k1)
    for (int k2 = 0; k2 < s.K; ++k2)
      s.weights(k1, k2) = (stats.d(k1, k2) + hyper.alpha_pair) / total;
  s.role_size.assign(s.K, 0.0);
  for (int k = 0; k < s.K; ++k) s.role_size[k] = stats.f_tot[k] + stats.g_tot[k];
  s.default_threshold = 1.0 / (s.K * s.K);
  return s;
}

std::string export_dot(const SummaryNetwork& summary, double threshold) {
  std::ostringstream out;
  out << "digraph roles {\n";
  out << "  rankdir=LR;\n  node [shape=circle];\n";
  char buf[64];
  for (int k = 0; k < summary.K; ++k) {
    std::snprintf(buf, sizeof buf, "%.2f", summary.role_size[k]);
    out << "  r" << k << " [label=\"role " << k << "\\nsize " << buf << "\"];\n";
  }
  double max_w = threshold;
  for (double w : summary.weights.a) max_w = std::max(max_w, w);
  for (int k1 = 0; k1 < summary.K; ++k1)
    for (int k2 = 0; k2 < summary.K; ++k2) {
      double w = summary.weights(k1, k2);
      if (w < threshold) continue;
      // Linear ramp from light gray at the threshold to black at the max.
      double t = max_w > threshold ? (w - threshold) / (max_w - threshold) : 1.0;
      int gray = static_cast<int>(std::lround(75.0 * (1.0 - t)));
      std::snprintf(buf, sizeof buf, "%.4f", w);
      out << "  r" << k1 << " -> r" << k2 << " [color=\"gray" << gray
          << "\", label=\"" << buf << "\"];\n";
    }
  out << "}\n";
  return out.str();
}

void export_node_role_matrix(const Mat& mixture, const DirectedGraph& g,
                             const LabelTable& labels, std::ostream& out,
                             const std::vector<std::string>& header_lines) {
  if (mixture.rows != g.num_nodes())
    throw std::invalid_argument("mixture rows must match the node count");
  std::vector<int> order(mixture.rows);
  for (int v = 0; v < mixture.rows; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    int ca = labels.label[a], cb = labels.label[b];
    // Unlabeled nodes sort after every class.
    bool ua = ca == LabelTable::kUnknown, ub = cb == LabelTable::kUnknown;
    if (ua != ub) return ub;
    if (ca != cb) return ca < cb;
    return a < b;
  });
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "node,class";
  for (int k = 0; k < mixture.cols; ++k) out << ",role" << k;
  out << "\n";
  for (int v : order) {
    int c = labels.label[v];
    out << g.name(v) << ","
        << (c == LabelTable::kUnknown ? std::string("UNKNOWN") : labels.class_names[c]);
    for (double x : mixture.row(v)) {
      out << ",";
      fmt(out, x);
    }
    out << "\n";
  }
}

Mat role_class_from_mu(const Mat& mu) {
  Mat dists(mu.cols, mu.rows);
  for (int k = 0; k < mu.cols; ++k)
    for (int c = 0; c < mu.rows; ++c) dists(k, c) = mu(c, k);
  return dists;
}

Mat role_class_empirical(const Mat& mixture, const LabelTable& labels,
                         std::vector<uint8_t>* zero_support) {
  const int K = mixture.cols, C = labels.num_classes;
  Mat dists(K, C);
  for (int v = 0; v < mixture.rows; ++v) {
    int y = labels.label[v];
    if (y == LabelTable::kUnknown) continue;
    for (int k = 0; k < K; ++k) dists(k, y) += mixture(v, k);
  }
  if (zero_support) zero_support->assign(K, 0);
  for (int k = 0; k < K; ++k) {
    auto row = dists.row(k);
    double s = sum(row);
    if (s > 0.0) {
      for (double& x : row) x /= s;
    } else {
      for (double& x : row) x = 1.0 / C;
      if (zero_support) (*zero_support)[k] = 1;
    }
  }
  return dists;
}

void export_role_class_dists(const Mat& dists, const std::vector<uint8_t>& zero_support,
                             std::ostream& out,
                             const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "role,zero_support";
  for (int c = 0; c < dists.cols; ++c) out << ",class" << c;
  out << "\n";
  for (int k = 0; k < dists.rows; ++k) {
    out << k << "," << (k < static_cast<int>(zero_support.size()) && zero_support[k] ? 1 : 0);
    for (double x : dists.row(k)) {
      out << ",";
      fmt(out, x);
    }
    out << "\n";
  }
}

}  // namespace blockmodel
