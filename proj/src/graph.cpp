#include "blockmodel/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "blockmodel/rng.hpp"

namespace blockmodel {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool skippable(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;  // blank
}

}  // namespace

DirectedGraph DirectedGraph::from_edges(std::vector<std::string> names,
                                        std::vector<std::pair<int, int>> edges) {
  DirectedGraph g;
  g.names_ = std::move(names);
  g.edges_ = std::move(edges);
  for (int v = 0; v < g.num_nodes(); ++v) g.ids_[g.names_[v]] = v;
  const int n = g.num_nodes();
  g.out_.assign(n, {});
  g.in_.assign(n, {});
  g.self_loop_.assign(n, 0);
  for (const auto& [s, r] : g.edges_) {
    if (s < 0 || s >= n || r < 0 || r >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (s == r) {
      g.self_loop_[s] = 1;
      g.any_self_loops_ = true;
    } else {
      g.out_[s].push_back(r);
      g.in_[r].push_back(s);
    }
  }
  for (auto& adj : g.out_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  for (auto& adj : g.in_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

int DirectedGraph::id_of(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

DirectedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;
  std::vector<std::pair<int, int>> edges;
  auto intern = [&](const std::string& s) {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(names.size());
    names.push_back(s);
    ids.emplace(s, id);
    return id;
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    auto toks = tokenize(line);
    if (toks.size() != 2)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected two tokens 'src dst', got " +
                               std::to_string(toks.size()));
    int src = intern(toks[0]);  // sequenced: ids follow first appearance
    int dst = intern(toks[1]);
    edges.emplace_back(src, dst);
  }
  return DirectedGraph::from_edges(std::move(names), std::move(edges));
}

void save_edge_list(const DirectedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  for (const auto& [s, r] : g.edges()) out << g.name(s) << ' ' << g.name(r) << '\n';
}

int LabelTable::train_count() const {
  int c = 0;
  for (Split s : split) c += (s == Split::Train);
  return c;
}

int LabelTable::known_count() const {
  int c = 0;
  for (int l : label) c += (l != kUnknown);
  return c;
}

int LabelTable::class_id(const std::string& name) const {
  for (size_t i = 0; i < class_names.size(); ++i)
    if (class_names[i] == name) return static_cast<int>(i);
  return -1;
}

LabelTable load_labels(const std::string& path, const DirectedGraph& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path);
  LabelTable t;
  t.label.assign(g.num_nodes(), LabelTable::kUnknown);
  t.split.assign(g.num_nodes(), Split::Test);
  std::unordered_map<std::string, int> class_ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    auto toks = tokenize(line);
    if (toks.size() != 2)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected two tokens 'node class', got " +
                               std::to_string(toks.size()));
    int v = g.id_of(toks[0]);
    if (v < 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": node '" + toks[0] + "' not present in the edge list");
    int c;
    auto it = class_ids.find(toks[1]);
    if (it != class_ids.end()) {
      c = it->second;
    } else {
      c = static_cast<int>(t.class_names.size());
      t.class_names.push_back(toks[1]);
      class_ids.emplace(toks[1], c);
    }
    if (t.label[v] != LabelTable::kUnknown && t.label[v] != c)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": node '" +
                               toks[0] + "' relabeled from '" +
                               t.class_names[t.label[v]] + "' to '" + toks[1] + "'");
    t.label[v] = c;
  }
  t.num_classes = static_cast<int>(t.class_names.size());
  return t;
}

void save_labels(const LabelTable& t, const DirectedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write label file: " + path);
  for (int v = 0; v < t.num_nodes(); ++v)
    if (t.label[v] != LabelTable::kUnknown)
      out << g.name(v) << ' ' << t.class_names[t.label[v]] << '\n';
}

LabelTable split_train_test(const LabelTable& t, double fraction, uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("train fraction must be in (0, 1]");
  LabelTable out = t;
  std::fill(out.split.begin(), out.split.end(), Split::Test);
  std::vector<std::vector<int>> members(t.num_classes);
  for (int v = 0; v < t.num_nodes(); ++v)
    if (t.label[v] != LabelTable::kUnknown) members[t.label[v]].push_back(v);

  // Largest-remainder allocation: per-class counts stay within one node of
  // fraction * class size while the total matches fraction * labeled count.
  long long total_labeled = 0;
  std::vector<long long> want(t.num_classes, 0);
  std::vector<double> remainder(t.num_classes, 0.0);
  for (int c = 0; c < t.num_classes; ++c) {
    if (members[c].empty()) {
      std::cerr << "warning: class '" << t.class_names[c] << "' has no labeled nodes\n";
      continue;
    }
    total_labeled += static_cast<long long>(members[c].size());
    double exact = fraction * static_cast<double>(members[c].size());
    want[c] = static_cast<long long>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(want[c]);
  }
  long long target = std::llround(fraction * static_cast<double>(total_labeled));
  long long leftover = target;
  for (long long w : want) leftover -= w;
  std::vector<int> by_remainder;
  for (int c = 0; c < t.num_classes; ++c)
    if (!members[c].empty()) by_remainder.push_back(c);
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int c : by_remainder) {
    if (leftover <= 0) break;
    if (want[c] < static_cast<long long>(members[c].size())) {
      ++want[c];
      --leftover;
    }
  }
  Rng rng(derive_seed(seed, "split"));
  for (int c = 0; c < t.num_classes; ++c) {
    if (members[c].empty()) continue;
    long long w = std::max(1LL, std::min(want[c], static_cast<long long>(members[c].size())));
    rng.shuffle(members[c]);
    for (long long i = 0; i < w; ++i) out.split[members[c][i]] = Split::Train;
  }
  return out;
}

void save_split(const LabelTable& t, const DirectedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write split file: " + path);
  for (int v = 0; v < t.num_nodes(); ++v)
    out << g.name(v) << ' ' << (t.split[v] == Split::Train ? "TRAIN" : "TEST") << '\n';
}

void load_split(LabelTable& t, const DirectedGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open split file: " + path);
  std::fill(t.split.begin(), t.split.end(), Split::Test);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    auto toks = tokenize(line);
    if (toks.size() != 2 || (toks[1] != "TRAIN" && toks[1] != "TEST"))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'node TRAIN|TEST'");
    int v = g.id_of(toks[0]);
    if (v < 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": node '" +
                               toks[0] + "' not present in the edge list");
    t.split[v] = (toks[1] == "TRAIN") ? Split::Train : Split::Test;
  }
}

}  // namespace blockmodel
