#include <cstring>

#include "doctest.h"

#include "blockmodel/generator.hpp"
#include "blockmodel/graph.hpp"
#include "blockmodel/rng.hpp"
#include "blockmodel/sbm.hpp"
#include "support/oracles.hpp"

using namespace blockmodel;

namespace {

// Stats over everyone but v, with hard assignments z (z[v] ignored).
SuffStats stats_without(const DirectedGraph& g, const std::vector<int>& z,
                        const std::vector<int>& labels, int v, int K, int C) {
  auto s = SuffStats::for_nodes(K, C, g.num_nodes());
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (u == v) continue;
    std::vector<double> lam(K, 0.0);
    lam[z[u]] = 1.0;
    s.add_node(u, lam, g, labels[u]);
  }
  return s;
}

double recovery_rate(const SbmFitResult& fit, const LabelTable& labels,
                     const std::vector<int>& truth) {
  int hits = 0, total = 0;
  for (int v = 0; v < fit.posterior.num_nodes(); ++v) {
    if (labels.split[v] != Split::Test) continue;
    ++total;
    if (fit.posterior.lambda(v, truth[v]) > 0.5) ++hits;
  }
  REQUIRE(total > 0);
  return static_cast<double>(hits) / total;
}

double planted_two_block_recovery(double within, double across, uint64_t seed) {
  PlantedSpec spec;
  spec.model = PlantedSpec::Model::sbm;
  spec.N = 60;
  spec.K = spec.C = 2;
  spec.pi = block_rates(2, within, across);
  spec.seed = seed;
  auto net = sample(spec);
  auto labels = net.labels;
  labels = split_train_test(labels, 0.5, derive_seed(seed, "unit-split"));
  auto fit = fit_sbm(net.graph, labels, NodeModelHyper{}, 2, FitSchedule{},
                     derive_seed(seed, "unit-fit"));
  return recovery_rate(fit, labels, net.true_roles);
}

}  // namespace

TEST_CASE("fully symmetric counts give a uniform conditional") {
  Rng rng(11);
  const int K = 3, N = 8;
  auto g = oracle::random_graph(rng, N, 0.5);
  auto s = SuffStats::for_nodes(K, 1, N);
  std::vector<double> uni(K, 1.0 / K);
  for (int u = 1; u < N; ++u) s.add_node(u, uni, g, LabelTable::kUnknown);
  auto out = update_node_sbm(0, s, NodeModelHyper{}, g);
  for (int k = 0; k < K; ++k) CHECK(out[k] == doctest::Approx(1.0 / K).epsilon(1e-12));
}

TEST_CASE("isolated node, equal role totals: non-link evidence cancels") {
  // No edges anywhere and n = (2, 2); every block's pair count grows by the
  // same multiset of increments whichever role v takes, so only the
  // occupancy factor n_k + alpha survives -- and it is symmetric here.
  auto g = DirectedGraph::from_edges({"a", "b", "c", "d", "e"}, {});
  std::vector<int> z{0, 0, 1, 1, -1};
  std::vector<int> labels(5, LabelTable::kUnknown);
  auto s = stats_without(g, z, labels, 4, 2, 1);
  auto out = update_node_sbm(4, s, NodeModelHyper{}, g);
  CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-12));
  auto oracle_out = oracle::node_conditional(g, z, labels, 4, 2, NodeModelHyper{},
                                             false, 1, 1.0, false);
  CHECK(out[0] == doctest::Approx(oracle_out[0]).epsilon(1e-9));
}

TEST_CASE("isolated node, unequal role totals: exact evidence, not n_k + 1") {
  // With n = (2, 1) the non-link factors no longer cancel; the conditional
  // must track the full Beta-Bernoulli evidence (the naive occupancy-only
  // answer would be (3/5, 2/5)).
  auto g = DirectedGraph::from_edges({"a", "b", "c", "d"}, {});
  std::vector<int> z{0, 0, 1, -1};
  std::vector<int> labels(4, LabelTable::kUnknown);
  auto s = stats_without(g, z, labels, 3, 2, 1);
  auto out = update_node_sbm(3, s, NodeModelHyper{}, g);
  auto oracle_out = oracle::node_conditional(g, z, labels, 3, 2, NodeModelHyper{},
                                             false, 1, 1.0, false);
  CHECK(out[0] == doctest::Approx(oracle_out[0]).epsilon(1e-9));
  CHECK(out[1] == doctest::Approx(oracle_out[1]).epsilon(1e-9));
  CHECK(std::abs(out[0] - 0.6) > 1e-3);
}

TEST_CASE("conditional matches the enumeration oracle on random hard instances") {
  Rng rng(21);
  for (int rep = 0; rep < 25; ++rep) {
    int K = 2 + rng.uniform_int(2);
    int N = 4 + rng.uniform_int(5);
    auto g = oracle::random_graph(rng, N, 0.4, rep % 3 == 0);
    std::vector<int> z(N);
    for (int u = 0; u < N; ++u) z[u] = rng.uniform_int(K);
    std::vector<int> labels(N, LabelTable::kUnknown);
    int v = rng.uniform_int(N);
    z[v] = -1;
    bool self_pairs = rep % 3 == 0;
    NodeModelHyper hyper{0.7, 1.3, 0.9};
    auto s = SuffStats::for_nodes(K, 1, N, self_pairs);
    for (int u = 0; u < N; ++u) {
      if (u == v) continue;
      std::vector<double> lam(K, 0.0);
      lam[z[u]] = 1.0;
      s.add_node(u, lam, g, labels[u]);
    }
    auto got = update_node_sbm(v, s, hyper, g);
    auto want = oracle::node_conditional(g, z, labels, v, K, hyper, false, 1, 1.0,
                                         self_pairs);
    for (int k = 0; k < K; ++k) {
      double rel = std::abs(got[k] - want[k]) / std::max(1e-12, want[k]);
      CHECK(rel <= 1e-6);
    }
  }
}

TEST_CASE("predict picks the modal role, ties to the lowest index") {
  RolePosterior post;
  post.lambda = Mat(3, 2);
  post.clamped.assign(3, 0);
  post.lambda(0, 0) = 0.1;
  post.lambda(0, 1) = 0.9;
  post.lambda(1, 0) = 0.5;
  post.lambda(1, 1) = 0.5;
  CHECK(predict_sbm(post, 0) == 1);
  CHECK(predict_sbm(post, 1) == 0);
  RolePosterior wide;
  wide.lambda = Mat(1, 4);
  wide.clamped.assign(1, 1);
  wide.lambda(0, 3) = 1.0;
  CHECK(predict_sbm(wide, 0) == 3);
}

TEST_CASE("fit with every node in TRAIN converges with zero update work") {
  auto g = DirectedGraph::from_edges({"a", "b", "c", "d"}, {{0, 1}, {2, 3}});
  LabelTable labels;
  labels.num_classes = 2;
  labels.class_names = {"x", "y"};
  labels.label = {0, 0, 1, 1};
  labels.split.assign(4, Split::Train);
  auto fit = fit_sbm(g, labels, NodeModelHyper{}, 2, FitSchedule{}, 7);
  CHECK(fit.info.converged);
  CHECK(fit.info.sweeps <= 1);
  for (const auto& t : fit.info.trace) CHECK(t.max_delta == 0.0);
  for (int v = 0; v < 4; ++v) {
    CHECK(fit.posterior.clamped[v] == 1);
    CHECK(fit.posterior.lambda(v, labels.label[v]) == 1.0);
  }
}

TEST_CASE("planted assortative blocks are recovered") {
  double total = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed)
    total += planted_two_block_recovery(0.3, 0.01, 1000 + seed);
  CHECK(total / 10.0 >= 0.95);
}

TEST_CASE("planted disassortative blocks are recovered") {
  double total = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed)
    total += planted_two_block_recovery(0.0, 0.3, 2000 + seed);
  CHECK(total / 10.0 >= 0.95);
}

TEST_CASE("train rows stay clamped through a fit") {
  PlantedSpec spec;
  spec.model = PlantedSpec::Model::sbm;
  spec.N = 40;
  spec.K = spec.C = 2;
  spec.pi = block_rates(2, 0.25, 0.02);
  spec.seed = 5;
  auto net = sample(spec);
  auto labels = net.labels;
  labels = split_train_test(labels, 0.5, 3);
  auto fit = fit_sbm(net.graph, labels, NodeModelHyper{}, 2, FitSchedule{}, 9);
  for (int v = 0; v < spec.N; ++v) {
    CHECK(is_distribution(fit.posterior.lambda.row(v)));
    if (labels.is_train(v)) {
      CHECK(fit.posterior.lambda(v, labels.label[v]) == 1.0);
      CHECK(fit.posterior.clamped[v] == 1);
    }
  }
  CHECK(std::isfinite(fit.info.free_energy));
}

TEST_CASE("same seed reproduces the posterior bit for bit") {
  PlantedSpec spec;
  spec.model = PlantedSpec::Model::sbm;
  spec.N = 30;
  spec.K = spec.C = 2;
  spec.pi = block_rates(2, 0.3, 0.05);
  spec.seed = 12;
  auto net = sample(spec);
  auto labels = net.labels;
  labels = split_train_test(labels, 0.5, 4);
  auto a = fit_sbm(net.graph, labels, NodeModelHyper{}, 2, FitSchedule{}, 42);
  auto b = fit_sbm(net.graph, labels, NodeModelHyper{}, 2, FitSchedule{}, 42);
  REQUIRE(a.posterior.lambda.a.size() == b.posterior.lambda.a.size());
  CHECK(std::memcmp(a.posterior.lambda.a.data(), b.posterior.lambda.a.data(),
                    a.posterior.lambda.a.size() * sizeof(double)) == 0);
}

TEST_CASE("role count must match the class count") {
  auto g = DirectedGraph::from_edges({"a", "b"}, {{0, 1}});
  LabelTable labels;
  labels.num_classes = 2;
  labels.class_names = {"x", "y"};
  labels.label = {0, 1};
  labels.split = {Split::Train, Split::Train};
  CHECK_THROWS_AS(fit_sbm(g, labels, NodeModelHyper{}, 3, FitSchedule{}, 1),
                  std::invalid_argument);
  labels.split = {Split::Test, Split::Test};
  CHECK_THROWS_AS(fit_sbm(g, labels, NodeModelHyper{}, 2, FitSchedule{}, 1),
                  std::invalid_argument);
}
