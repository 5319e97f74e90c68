#include <sstream>

#include "doctest.h"

#include "blockmodel/summary.hpp"
#include "support/oracles.hpp"

using namespace blockmodel;

namespace {

DirectedGraph graph_from(std::vector<std::pair<int, int>> edges, int n) {
  std::vector<std::string> names;
  for (int v = 0; v < n; ++v) names.push_back("n" + std::to_string(v));
  return DirectedGraph::from_edges(std::move(names), std::move(edges));
}

std::vector<int> gray_levels(const std::string& dot) {
  std::vector<int> out;
  size_t at = 0;
  while ((at = dot.find("gray", at)) != std::string::npos) {
    at += 4;
    size_t end = at;
    while (end < dot.size() && isdigit(dot[end])) ++end;
    if (end > at) out.push_back(std::stoi(dot.substr(at, end - at)));
    at = end;
  }
  return out;
}

}  // namespace

TEST_CASE("no observations fall back to the prior mean") {
  auto stats = SuffStats::for_nodes(2, 1, 4);
  auto summary = build_summary(stats, NodeModelHyper{});
  CHECK(summary.K == 2);
  for (double w : summary.weights.a) CHECK(w == doctest::Approx(0.5));
  CHECK(summary.default_threshold == doctest::Approx(0.5));
}

TEST_CASE("block weight is the posterior mean link rate") {
  // One link from role 0 to role 1 with two hard nodes per role:
  // (1 + 1) / (4 + 2) = 1/3 for that block.
  auto g = graph_from({{0, 2}}, 4);
  auto stats = SuffStats::for_nodes(2, 1, 4);
  std::vector<double> r0{1.0, 0.0}, r1{0.0, 1.0};
  stats.add_node(0, r0, g, LabelTable::kUnknown);
  stats.add_node(1, r0, g, LabelTable::kUnknown);
  stats.add_node(2, r1, g, LabelTable::kUnknown);
  stats.add_node(3, r1, g, LabelTable::kUnknown);
  auto summary = build_summary(stats, NodeModelHyper{});
  CHECK(summary.weights(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(summary.weights(0, 0) == doctest::Approx(1.0 / 4.0));  // 0 of 2 pairs
  CHECK(summary.role_size[0] == doctest::Approx(2.0));
  CHECK(summary.role_size[1] == doctest::Approx(2.0));
}

TEST_CASE("interaction weights form a smoothed pair distribution") {
  auto stats = SuffStats::for_interactions(2, 5, 3);
  std::vector<double> pair01{0.0, 1.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) stats.add_interaction(i, pair01, 0, 1);
  auto summary = build_summary(stats, SmmbHyper{});
  CHECK(summary.weights(0, 1) == doctest::Approx((3.0 + 1.0) / (3.0 + 4.0)));
  CHECK(summary.weights(0, 0) == doctest::Approx(1.0 / 7.0));
  CHECK(summary.default_threshold == doctest::Approx(0.25));
  CHECK(sum(summary.weights.a) == doctest::Approx(1.0));
  // Sender plus receiver mass per role.
  CHECK(summary.role_size[0] == doctest::Approx(3.0));
  CHECK(summary.role_size[1] == doctest::Approx(3.0));
}

TEST_CASE("empty summaries render a header-only graph") {
  SummaryNetwork empty;
  auto dot = export_dot(empty, 0.5);
  CHECK(dot.find("digraph") == 0);
  CHECK(dot.find("->") == std::string::npos);
}

TEST_CASE("edges below the threshold disappear") {
  SummaryNetwork s;
  s.K = 2;
  s.weights = Mat(2, 2);
  s.weights(0, 1) = 0.8;
  s.weights(1, 0) = 0.2;
  s.role_size = {1.0, 1.0};
  auto dot = export_dot(s, 0.5);
  CHECK(dot.find("r0 -> r1") != std::string::npos);
  CHECK(dot.find("r1 -> r0") == std::string::npos);
}

TEST_CASE("heavier edges draw darker") {
  SummaryNetwork s;
  s.K = 3;
  s.weights = Mat(3, 3);
  s.weights(0, 1) = 0.1;
  s.weights(1, 2) = 0.5;
  s.weights(2, 0) = 1.0;
  s.role_size = {1.0, 2.0, 3.0};
  auto dot = export_dot(s, 0.05);
  auto levels = gray_levels(dot);
  REQUIRE(levels.size() == 3);
  CHECK(levels[0] > levels[1]);  // 0.1 lighter than 0.5
  CHECK(levels[1] > levels[2]);  // 0.5 lighter than 1.0
  CHECK(levels[2] == 0);         // the maximum is black
  CHECK(export_dot(s, 0.05) == dot);  // stable bytes
}

TEST_CASE("node-role rows group by class with unlabeled last") {
  auto g = graph_from({}, 4);
  Mat mixture(4, 2);
  mixture(0, 0) = 0.2; mixture(0, 1) = 0.8;  // class 1
  mixture(1, 0) = 0.9; mixture(1, 1) = 0.1;  // unlabeled
  mixture(2, 0) = 0.5; mixture(2, 1) = 0.5;  // class 0
  mixture(3, 0) = 0.4; mixture(3, 1) = 0.6;  // class 0
  LabelTable labels;
  labels.num_classes = 2;
  labels.class_names = {"alpha", "beta"};
  labels.label = {1, LabelTable::kUnknown, 0, 0};
  labels.split.assign(4, Split::Test);
  std::ostringstream out;
  export_node_role_matrix(mixture, g, labels, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.find("node") != std::string::npos);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].find("n2,alpha") == 0);
  CHECK(rows[1].find("n3,alpha") == 0);
  CHECK(rows[2].find("n0,beta") == 0);
  CHECK(rows[3].find("n1,") == 0);
  // Values echo the mixture exactly.
  CHECK(rows[0].find("0.5") != std::string::npos);
  std::ostringstream again;
  export_node_role_matrix(mixture, g, labels, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("fitted class-role columns transpose into role rows") {
  Mat mu(2, 3);  // C = 2 classes, K = 3 roles; columns sum to one
  mu(0, 0) = 0.7; mu(1, 0) = 0.3;
  mu(0, 1) = 0.2; mu(1, 1) = 0.8;
  mu(0, 2) = 1.0; mu(1, 2) = 0.0;
  auto dists = role_class_from_mu(mu);
  REQUIRE(dists.rows == 3);
  REQUIRE(dists.cols == 2);
  CHECK(dists(0, 0) == doctest::Approx(0.7));
  CHECK(dists(1, 1) == doctest::Approx(0.8));
  CHECK(dists(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("empirical role-class estimate from labeled mixtures") {
  Mat mixture(3, 2);
  mixture(0, 0) = 1.0;                       // hard role 0, class 0
  mixture(1, 0) = 0.5; mixture(1, 1) = 0.5;  // unlabeled, ignored
  mixture(2, 0) = 1.0;                       // hard role 0, class 1
  LabelTable labels;
  labels.num_classes = 2;
  labels.class_names = {"a", "b"};
  labels.label = {0, LabelTable::kUnknown, 1};
  labels.split.assign(3, Split::Test);
  std::vector<uint8_t> zero;
  auto dists = role_class_empirical(mixture, labels, &zero);
  REQUIRE(dists.rows == 2);
  CHECK(dists(0, 0) == doctest::Approx(0.5));
  CHECK(dists(0, 1) == doctest::Approx(0.5));
  CHECK(zero[0] == 0);
  // Role 1 never appears among labeled nodes: uniform row, flagged.
  CHECK(dists(1, 0) == doctest::Approx(0.5));
  CHECK(zero[1] == 1);

  std::ostringstream out;
  export_role_class_dists(dists, zero, out);
  CHECK(out.str().find("zero_support") != std::string::npos);
}

TEST_CASE("a single hard labeled node owns its role") {
  Mat mixture(1, 2);
  mixture(0, 1) = 1.0;
  LabelTable labels;
  labels.num_classes = 2;
  labels.class_names = {"a", "b"};
  labels.label = {1};
  labels.split = {Split::Train};
  auto dists = role_class_empirical(mixture, labels, nullptr);
  CHECK(dists(1, 1) == doctest::Approx(1.0));
  CHECK(dists(1, 0) == doctest::Approx(0.0));
}
