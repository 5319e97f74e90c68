#include <sstream>

#include "doctest.h"

#include "blockmodel/artifacts.hpp"
#include "blockmodel/rng.hpp"
#include "support/tmpdir.hpp"

using namespace blockmodel;
using testsupport::TmpDir;

TEST_CASE("matrix csv round trips bit for bit") {
  Rng rng(2);
  Mat m(5, 3);
  for (double& v : m.a) v = rng.normal() * std::pow(10.0, rng.uniform_int(7) - 3);
  m(0, 0) = 1.0 / 3.0;
  m(1, 1) = 1e-300;
  m(2, 2) = 0.0;
  std::vector<std::string> rows{"a", "b", "c", "d", "e"};
  auto cols = role_names(3);
  std::ostringstream out;
  write_matrix_csv(out, m, rows, cols, "node", {"format_version 1", "config {}"});
  std::istringstream in(out.str());
  auto back = read_matrix_csv(in);
  CHECK(back.row_names == rows);
  CHECK(back.col_names == cols);
  REQUIRE(back.m.a.size() == m.a.size());
  for (size_t i = 0; i < m.a.size(); ++i) CHECK(back.m.a[i] == m.a[i]);
}

TEST_CASE("matrix csv files survive the disk") {
  TmpDir tmp;
  Mat m(2, 2);
  m(0, 0) = 0.25;
  m(1, 1) = -7.5;
  auto path = tmp.path("m.csv");
  save_matrix_csv(path, m, {"x", "y"}, {"c0", "c1"}, "row", {});
  auto back = load_matrix_csv(path);
  CHECK(back.m.a == m.a);
  CHECK(back.row_names == std::vector<std::string>{"x", "y"});
  CHECK_THROWS_AS(load_matrix_csv(tmp.path("absent.csv")), std::runtime_error);
}

TEST_CASE("comments are skipped, malformed bodies are not") {
  std::istringstream ragged(
      "# note\nnode,role0,role1\na,0.5,0.5\nb,1.0\n");
  CHECK_THROWS_AS(read_matrix_csv(ragged), std::runtime_error);
  std::istringstream junk("node,role0\na,zebra\n");
  CHECK_THROWS_AS(read_matrix_csv(junk), std::runtime_error);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_matrix_csv(empty), std::runtime_error);
}

TEST_CASE("role names are dense and zero based") {
  auto names = role_names(3);
  REQUIRE(names.size() == 3);
  CHECK(names[0] == "role0");
  CHECK(names[2] == "role2");
}

TEST_CASE("trace csv carries one row per sweep") {
  std::vector<SweepTrace> trace{{1, 0.5, -10.0}, {2, 0.01, -9.5}};
  std::ostringstream out;
  write_trace_csv(out, trace, {"format_version 1"});
  std::istringstream in(out.str());
  std::string line;
  int data = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      CHECK(line == "sweep,max_delta,free_energy");
    } else {
      ++data;
    }
  }
  CHECK(data == 2);
}

TEST_CASE("prediction csv uses node and class names") {
  auto g = DirectedGraph::from_edges({"alice", "bob"}, {{0, 1}});
  std::ostringstream out;
  write_predictions_csv(out, g, {1, 0}, {"yes", "no"}, {});
  auto text = out.str();
  CHECK(text.find("alice,no") != std::string::npos);
  CHECK(text.find("bob,yes") != std::string::npos);
}
