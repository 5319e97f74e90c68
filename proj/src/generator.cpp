#include "blockmodel/generator.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blockmodel/rng.hpp"

namespace blockmodel {

namespace {

std::vector<std::string> node_names(int N) {
  std::vector<std::string> names;
  names.reserve(N);
  for (int v = 0; v < N; ++v) names.push_back("n" + std::to_string(v));
  return names;
}

std::vector<std::string> class_names(int C) {
  std::vector<std::string> names;
  names.reserve(C);
  for (int c = 0; c < C; ++c) names.push_back("c" + std::to_string(c));
  return names;
}

std::vector<double> uniform_simplex(int n) {
  return std::vector<double>(n, 1.0 / n);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("planted spec: " + what);
}

void require_simplex_field(std::span<const double> x, const std::string& what) {
  require(is_distribution(x, 1e-6), what + " must be a probability simplex");
}

std::vector<int> draw_roles(const PlantedSpec& spec, Rng& rng) {
  std::vector<double> theta = spec.theta.empty() ? uniform_simplex(spec.K) : spec.theta;
  require(static_cast<int>(theta.size()) == spec.K, "theta has wrong length");
  require_simplex_field(theta, "theta");
  std::vector<int> roles(spec.N);
  for (int v = 0; v < spec.N; ++v) roles[v] = rng.categorical(theta);
  return roles;
}

std::vector<std::pair<int, int>> draw_edges(const PlantedSpec& spec,
                                            const std::vector<int>& roles, Rng& rng) {
  require(spec.pi.rows == spec.K && spec.pi.cols == spec.K, "pi must be K x K");
  for (double p : spec.pi.a)
    require(p >= 0.0 && p <= 1.0, "pi entries must be probabilities");
  std::vector<std::pair<int, int>> edges;
  for (int s = 0; s < spec.N; ++s)
    for (int r = 0; r < spec.N; ++r) {
      if (s == r && !spec.self_loops) continue;
      if (rng.bernoulli(spec.pi(roles[s], roles[r]))) edges.emplace_back(s, r);
    }
  return edges;
}

LabelTable make_labels(int N, int C, const std::vector<int>& label,
                       const std::vector<std::string>& cls) {
  LabelTable t;
  t.num_classes = C;
  t.label = label;
  t.split.assign(N, Split::Test);
  t.class_names = cls;
  return t;
}

}  // namespace

Mat block_rates(int K, double within, double across) {
  Mat pi(K, K, across);
  for (int k = 0; k < K; ++k) pi(k, k) = within;
  return pi;
}

SampledNetwork sample_sbm(const PlantedSpec& spec) {
  require(spec.N > 0 && spec.K > 0, "need N > 0 and K > 0");
  SampledNetwork net;
  Rng role_rng(derive_seed(spec.seed, "roles"));
  net.true_roles = draw_roles(spec, role_rng);
  Rng edge_rng(derive_seed(spec.seed, "edges"));
  net.graph = DirectedGraph::from_edges(node_names(spec.N),
                                        draw_edges(spec, net.true_roles, edge_rng));
  net.labels = make_labels(spec.N, spec.K, net.true_roles, class_names(spec.K));
  return net;
}

SampledNetwork sample_ssmb(const PlantedSpec& spec) {
  require(spec.N > 0 && spec.K > 0 && spec.C > 0, "need N, K, C > 0");
  require(spec.mu.rows == spec.K && spec.mu.cols == spec.C, "mu must be K x C");
  for (int k = 0; k < spec.K; ++k) require_simplex_field(spec.mu.row(k), "mu row");
  SampledNetwork net;
  Rng role_rng(derive_seed(spec.seed, "roles"));
  net.true_roles = draw_roles(spec, role_rng);
  Rng edge_rng(derive_seed(spec.seed, "edges"));
  net.graph = DirectedGraph::from_edges(node_names(spec.N),
                                        draw_edges(spec, net.true_roles, edge_rng));
  Rng label_rng(derive_seed(spec.seed, "labels"));
  std::vector<int> y(spec.N);
  for (int v = 0; v < spec.N; ++v)
    y[v] = label_rng.categorical(spec.mu.row(net.true_roles[v]));
  net.labels = make_labels(spec.N, spec.C, y, class_names(spec.C));
  return net;
}

SampledNetwork sample_smmb(const PlantedSpec& spec) {
  require(spec.N > 0 && spec.K > 0 && spec.C > 0 && spec.I > 0, "need N, K, C, I > 0");
  Mat pi = spec.pi;
  if (pi.rows == 0) pi = Mat(spec.K, spec.K, 1.0 / (spec.K * spec.K));
  require(pi.rows == spec.K && pi.cols == spec.K,
          "pi must be K x K (a distribution over ordered pairs)");
  require_simplex_field(pi.a, "pi");
  require(spec.eta.rows == spec.C && spec.eta.cols == spec.K, "eta must be C x K");
  Mat phi = spec.phi;
  if (phi.rows == 0) {
    phi = Mat(spec.K, spec.N, 1.0 / spec.N);
  }
  require(phi.rows == spec.K && phi.cols == spec.N, "phi must be K x N");
  for (int k = 0; k < spec.K; ++k) require_simplex_field(phi.row(k), "phi row");

  SampledNetwork net;
  Rng pair_rng(derive_seed(spec.seed, "pairs"));
  Rng end_rng(derive_seed(spec.seed, "endpoints"));
  std::vector<std::pair<int, int>> edges;
  edges.reserve(spec.I);
  Mat zbar_raw(spec.N, spec.K);
  std::vector<double> n_pos(spec.N, 0.0);
  for (int i = 0; i < spec.I; ++i) {
    int pair = pair_rng.categorical(pi.a);
    int k1 = pair / spec.K, k2 = pair % spec.K;
    int s = end_rng.categorical(phi.row(k1));
    int r = end_rng.categorical(phi.row(k2));
    edges.emplace_back(s, r);
    zbar_raw(s, k1) += 1.0;
    n_pos[s] += 1.0;
    zbar_raw(r, k2) += 1.0;
    n_pos[r] += 1.0;
  }
  net.graph = DirectedGraph::from_edges(node_names(spec.N), std::move(edges));

  net.true_mixture = Mat(spec.N, spec.K);
  Rng label_rng(derive_seed(spec.seed, "labels"));
  std::vector<int> y(spec.N, LabelTable::kUnknown);
  std::vector<double> lw(spec.C);
  for (int v = 0; v < spec.N; ++v) {
    if (n_pos[v] <= 0.0) continue;
    auto zb = net.true_mixture.row(v);
    for (int k = 0; k < spec.K; ++k) zb[k] = zbar_raw(v, k) / n_pos[v];
    for (int c = 0; c < spec.C; ++c) lw[c] = dot(spec.eta.row(c), zb);
    softmax_in_place(lw);
    y[v] = label_rng.categorical(lw);
  }
  net.labels = make_labels(spec.N, spec.C, y, class_names(spec.C));
  return net;
}

SampledNetwork sample(const PlantedSpec& spec) {
  switch (spec.model) {
    case PlantedSpec::Model::sbm: return sample_sbm(spec);
    case PlantedSpec::Model::ssmb: return sample_ssmb(spec);
    case PlantedSpec::Model::smmb: return sample_smmb(spec);
  }
  throw std::invalid_argument("planted spec: unknown model");
}

void save_ground_truth(const SampledNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!net.true_roles.empty()) {
    out << "node,role\n";
    for (int v = 0; v < net.graph.num_nodes(); ++v)
      out << net.graph.name(v) << "," << net.true_roles[v] << "\n";
  } else {
    out << "node";
    for (int k = 0; k < net.true_mixture.cols; ++k) out << ",zbar" << k;
    out << "\n";
    char buf[32];
    for (int v = 0; v < net.graph.num_nodes(); ++v) {
      out << net.graph.name(v);
      for (double x : net.true_mixture.row(v)) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << "," << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace blockmodel
