#include "blockmodel/suff_stats.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace blockmodel {

namespace {

constexpr double kNegTol = 1e-6;

void require_simplex(std::span<const double> lambda, const char* what) {
  double s = 0.0;
  for (double v : lambda) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(what) + ": entries must be finite and >= 0");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + ": weights sum to " + std::to_string(s) +
                                ", expected 1 within 1e-9");
}

// Subtract with a drift guard: tiny negatives are rounding, big ones are bugs.
inline void sub_guarded(double& x, double delta, const char* what) {
  x -= delta;
  if (x < 0.0) {
    if (x < -kNegTol)
      throw std::runtime_error(std::string("count went negative (") + what + "): " +
                               std::to_string(x));
    x = 0.0;
  }
}

}  // namespace

SuffStats SuffStats::for_nodes(int K, int C, int N, bool include_self_pairs) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  SuffStats s;
  s.mode = Mode::node;
  s.K = K;
  s.C = C;
  s.N = N;
  s.include_self_pairs = include_self_pairs;
  s.n.assign(K, 0.0);
  s.d = Mat(K, K);
  s.S = Mat(K, K);
  s.f = Mat(N, K);
  s.g = Mat(N, K);
  s.m = Mat(std::max(C, 1), K);
  s.assigned.assign(N, 0);
  return s;
}

SuffStats SuffStats::for_interactions(int K, int N, int I) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  SuffStats s;
  s.mode = Mode::interaction;
  s.K = K;
  s.N = N;
  s.d = Mat(K, K);
  s.f = Mat(N, K);
  s.g = Mat(N, K);
  s.f_tot.assign(K, 0.0);
  s.g_tot.assign(K, 0.0);
  s.n_inter.assign(N, 0.0);
  s.assigned.assign(I, 0);
  return s;
}

void SuffStats::add_node(int v, std::span<const double> lambda, const DirectedGraph& graph,
                         int label) {
  if (mode != Mode::node) throw std::logic_error("add_node on interaction-mode stats");
  if (assigned[v]) throw std::runtime_error("node " + std::to_string(v) + " already assigned");
  require_simplex(lambda, "add_node");

  auto fv = f.row(v);
  auto gv = g.row(v);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      d(k1, k2) += lambda[k1] * fv[k2] + gv[k1] * lambda[k2];
      S(k1, k2) += lambda[k1] * lambda[k2];
    }
  }
  if (include_self_pairs && graph.has_self_loop(v))
    for (int k = 0; k < K; ++k) d(k, k) += lambda[k];
  for (int k = 0; k < K; ++k) n[k] += lambda[k];
  if (label != LabelTable::kUnknown) {
    auto mr = m.row(label);
    for (int k = 0; k < K; ++k) mr[k] += lambda[k];
  }
  for (int u : graph.in_neighbors(v)) {
    auto fu = f.row(u);
    for (int k = 0; k < K; ++k) fu[k] += lambda[k];
  }
  for (int u : graph.out_neighbors(v)) {
    auto gu = g.row(u);
    for (int k = 0; k < K; ++k) gu[k] += lambda[k];
  }
  assigned[v] = 1;
  assigned_count += 1.0;
}

void SuffStats::remove_node(int v, std::span<const double> lambda, const DirectedGraph& graph,
                            int label) {
  if (mode != Mode::node) throw std::logic_error("remove_node on interaction-mode stats");
  if (!assigned[v])
    throw std::runtime_error("removing unassigned node " + std::to_string(v));
  require_simplex(lambda, "remove_node");

  assigned[v] = 0;
  assigned_count -= 1.0;
  for (int u : graph.in_neighbors(v)) {
    auto fu = f.row(u);
    for (int k = 0; k < K; ++k) sub_guarded(fu[k], lambda[k], "f");
  }
  for (int u : graph.out_neighbors(v)) {
    auto gu = g.row(u);
    for (int k = 0; k < K; ++k) sub_guarded(gu[k], lambda[k], "g");
  }
  auto fv = f.row(v);
  auto gv = g.row(v);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      sub_guarded(d(k1, k2), lambda[k1] * fv[k2] + gv[k1] * lambda[k2], "d");
      sub_guarded(S(k1, k2), lambda[k1] * lambda[k2], "S");
    }
  }
  if (include_self_pairs && graph.has_self_loop(v))
    for (int k = 0; k < K; ++k) sub_guarded(d(k, k), lambda[k], "d self");
  for (int k = 0; k < K; ++k) sub_guarded(n[k], lambda[k], "n");
  if (label != LabelTable::kUnknown) {
    auto mr = m.row(label);
    for (int k = 0; k < K; ++k) sub_guarded(mr[k], lambda[k], "m");
  }
}

void SuffStats::add_interaction(int i, std::span<const double> lambda, int sender,
                                int receiver) {
  if (mode != Mode::interaction) throw std::logic_error("add_interaction on node-mode stats");
  if (assigned[i])
    throw std::runtime_error("interaction " + std::to_string(i) + " already assigned");
  require_simplex(lambda, "add_interaction");

  auto fs = f.row(sender);
  auto gr = g.row(receiver);
  for (int k1 = 0; k1 < K; ++k1) {
    double row_sum = 0.0;
    for (int k2 = 0; k2 < K; ++k2) {
      double w = lambda[static_cast<size_t>(k1) * K + k2];
      d(k1, k2) += w;
      row_sum += w;
      gr[k2] += w;
      g_tot[k2] += w;
    }
    fs[k1] += row_sum;
    f_tot[k1] += row_sum;
  }
  n_inter[sender] += 1.0;
  n_inter[receiver] += 1.0;
  assigned[i] = 1;
  assigned_count += 1.0;
}

void SuffStats::remove_interaction(int i, std::span<const double> lambda, int sender,
                                   int receiver) {
  if (mode != Mode::interaction)
    throw std::logic_error("remove_interaction on node-mode stats");
  if (!assigned[i])
    throw std::runtime_error("removing unassigned interaction " + std::to_string(i));
  require_simplex(lambda, "remove_interaction");

  assigned[i] = 0;
  assigned_count -= 1.0;
  auto fs = f.row(sender);
  auto gr = g.row(receiver);
  for (int k1 = 0; k1 < K; ++k1) {
    double row_sum = 0.0;
    for (int k2 = 0; k2 < K; ++k2) {
      double w = lambda[static_cast<size_t>(k1) * K + k2];
      sub_guarded(d(k1, k2), w, "d");
      row_sum += w;
      sub_guarded(gr[k2], w, "g");
      sub_guarded(g_tot[k2], w, "g_tot");
    }
    sub_guarded(fs[k1], row_sum, "f");
    sub_guarded(f_tot[k1], row_sum, "f_tot");
  }
  sub_guarded(n_inter[sender], 1.0, "n_inter");
  sub_guarded(n_inter[receiver], 1.0, "n_inter");
}

double SuffStats::pair_count(int k1, int k2) const {
  // E[#ordered pairs (u,w), u != w, in block (k1,k2)] = n[k1]n[k2] - S[k1][k2];
  // with self-pairs included the diagonal gains n[k] exactly.
  double p = n[k1] * n[k2] - S(k1, k2);
  if (include_self_pairs && k1 == k2) p += n[k1];
  return std::max(p, 0.0);
}

SuffStats SuffStats::recount_nodes(const Mat& lambda, const std::vector<uint8_t>& present,
                                   const DirectedGraph& g, const std::vector<int>& labels,
                                   int K, int C, bool include_self_pairs) {
  const int N = g.num_nodes();
  SuffStats s = for_nodes(K, C, N, include_self_pairs);
  s.assigned = present;
  for (int v = 0; v < N; ++v) {
    if (!present[v]) continue;
    s.assigned_count += 1.0;
    auto lv = lambda.row(v);
    for (int k = 0; k < K; ++k) s.n[k] += lv[k];
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2) s.S(k1, k2) += lv[k1] * lv[k2];
    if (labels[v] != LabelTable::kUnknown) {
      auto mr = s.m.row(labels[v]);
      for (int k = 0; k < K; ++k) mr[k] += lv[k];
    }
  }
  // f/g are kept for every node (assigned or not) over assigned neighbors:
  // the updater reads its own row while temporarily unassigned.
  for (int v = 0; v < N; ++v) {
    auto fv = s.f.row(v);
    for (int u : g.out_neighbors(v)) {
      if (!present[u]) continue;
      auto lu = lambda.row(u);
      for (int k = 0; k < K; ++k) fv[k] += lu[k];
    }
    auto gv = s.g.row(v);
    for (int u : g.in_neighbors(v)) {
      if (!present[u]) continue;
      auto lu = lambda.row(u);
      for (int k = 0; k < K; ++k) gv[k] += lu[k];
    }
  }
  for (int v = 0; v < N; ++v) {
    if (!present[v]) continue;
    auto lv = lambda.row(v);
    for (int u : g.out_neighbors(v)) {
      if (!present[u]) continue;
      auto lu = lambda.row(u);
      for (int k1 = 0; k1 < K; ++k1)
        for (int k2 = 0; k2 < K; ++k2) s.d(k1, k2) += lv[k1] * lu[k2];
    }
    if (include_self_pairs && g.has_self_loop(v))
      for (int k = 0; k < K; ++k) s.d(k, k) += lv[k];
  }
  return s;
}

std::optional<std::string> SuffStats::check_consistency(double tol) const {
  auto bad = [](double v) { return !std::isfinite(v) || v < -kNegTol; };
  for (double v : n)
    if (bad(v)) return "role occupancy out of range";
  for (double v : d.a)
    if (bad(v)) return "block count out of range";
  if (mode == Mode::node) {
    double tot = 0.0;
    for (double v : n) tot += v;
    if (std::abs(tot - assigned_count) > tol)
      return "sum of role occupancies (" + std::to_string(tot) +
             ") != assigned node count (" + std::to_string(assigned_count) + ")";
  } else {
    double tot = 0.0;
    for (double v : d.a) tot += v;
    if (std::abs(tot - assigned_count) > tol)
      return "sum of pair counts != assigned interaction count";
    for (int v = 0; v < N; ++v) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += f(v, k) + g(v, k);
      if (std::abs(s - n_inter[v]) > tol)
        return "endpoint counts of node " + std::to_string(v) + " drifted";
    }
  }
  return std::nullopt;
}

void SuffStats::dump_csv(std::ostream& out) const {
  out << "# suffstats mode=" << (mode == Mode::node ? "node" : "interaction")
      << " K=" << K << " C=" << C << " N=" << N
      << " I=" << (mode == Mode::interaction ? static_cast<int>(assigned.size()) : 0)
      << " self_pairs=" << (include_self_pairs ? 1 : 0)
      << " assigned=" << assigned_count << "\n";
  out << "stat,i,j,value\n";
  char buf[64];
  auto emit = [&](const char* name, int i, int j, double v) {
    snprintf(buf, sizeof buf, "%.17g", v);
    out << name << ',' << i << ',' << j << ',' << buf << "\n";
  };
  for (int k = 0; k < K; ++k)
    if (mode == Mode::node) emit("n", k, 0, n[k]);
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = 0; k2 < K; ++k2) emit("d", k1, k2, d(k1, k2));
  if (mode == Mode::node) {
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2) emit("S", k1, k2, S(k1, k2));
    for (int c = 0; c < C; ++c)
      for (int k = 0; k < K; ++k) emit("m", c, k, m(c, k));
  }
  for (int v = 0; v < N; ++v)
    for (int k = 0; k < K; ++k) {
      if (f(v, k) != 0.0) emit("f", v, k, f(v, k));
      if (g(v, k) != 0.0) emit("g", v, k, g(v, k));
    }
  if (mode == Mode::interaction) {
    for (int k = 0; k < K; ++k) {
      emit("f_tot", k, 0, f_tot[k]);
      emit("g_tot", k, 0, g_tot[k]);
    }
    for (int v = 0; v < N; ++v)
      if (n_inter[v] != 0.0) emit("n_inter", v, 0, n_inter[v]);
  }
}

SuffStats parse_stats_csv(std::istream& in) {
  std::string line;
  // Skip any other leading comments (format version, config echo).
  while (std::getline(in, line) && line.rfind("# suffstats", 0) != 0)
    if (line.empty() || line[0] != '#')
      throw std::runtime_error("stats dump: missing header line");
  if (line.rfind("# suffstats", 0) != 0)
    throw std::runtime_error("stats dump: missing header line");
  auto field = [&](const std::string& key) -> std::string {
    auto pos = line.find(" " + key + "=");
    if (pos == std::string::npos) throw std::runtime_error("stats dump: missing " + key);
    pos += key.size() + 2;
    auto end = line.find(' ', pos);
    return line.substr(pos, end == std::string::npos ? end : end - pos);
  };
  std::string mode = field("mode");
  int K = std::stoi(field("K")), C = std::stoi(field("C")), N = std::stoi(field("N"));
  int I = std::stoi(field("I"));
  bool self_pairs = field("self_pairs") == "1";
  double assigned = std::stod(field("assigned"));
  SuffStats s = mode == "node" ? SuffStats::for_nodes(K, C, N, self_pairs)
                               : SuffStats::for_interactions(K, N, I);
  s.assigned_count = assigned;
  if (!std::getline(in, line) || line != "stat,i,j,value")
    throw std::runtime_error("stats dump: missing column header");
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name, it, jt, vt;
    if (!std::getline(ss, name, ',') || !std::getline(ss, it, ',') ||
        !std::getline(ss, jt, ',') || !std::getline(ss, vt))
      throw std::runtime_error("stats dump: malformed row: " + line);
    int i = std::stoi(it), j = std::stoi(jt);
    double v = std::stod(vt);
    if (name == "n") s.n[i] = v;
    else if (name == "d") s.d(i, j) = v;
    else if (name == "S") s.S(i, j) = v;
    else if (name == "m") s.m(i, j) = v;
    else if (name == "f") s.f(i, j) = v;
    else if (name == "g") s.g(i, j) = v;
    else if (name == "f_tot") s.f_tot[i] = v;
    else if (name == "g_tot") s.g_tot[i] = v;
    else if (name == "n_inter") s.n_inter[i] = v;
    else throw std::runtime_error("stats dump: unknown stat '" + name + "'");
  }
  return s;
}

}  // namespace blockmodel
