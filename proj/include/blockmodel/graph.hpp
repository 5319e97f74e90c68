#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace blockmodel {

// Directed multigraph over interned node names. The raw edge list keeps
// duplicates and self-loops (they are data for the interaction model);
// out_neighbors/in_neighbors expose the deduplicated self-loop-free view
// used by the Bernoulli-likelihood models.
class DirectedGraph {
 public:
  DirectedGraph() = default;

  static DirectedGraph from_edges(std::vector<std::string> names,
                                  std::vector<std::pair<int, int>> edges);

  int num_nodes() const { return static_cast<int>(names_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::string>& node_names() const { return names_; }
  const std::string& name(int v) const { return names_[v]; }

  // Returns -1 when the name is unknown.
  int id_of(const std::string& name) const;

  const std::vector<int>& out_neighbors(int v) const { return out_[v]; }
  const std::vector<int>& in_neighbors(int v) const { return in_[v]; }

  bool has_self_loop(int v) const { return self_loop_[v] != 0; }
  bool any_self_loops() const { return any_self_loops_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> out_, in_;  // deduplicated, self-loops removed
  std::vector<uint8_t> self_loop_;
  bool any_self_loops_ = false;
};

// Whitespace-separated "src dst" lines; '#' starts a comment line; blank
// lines are skipped. Node ids are assigned in order of first appearance.
DirectedGraph load_edge_list(const std::string& path);
void save_edge_list(const DirectedGraph& g, const std::string& path);

enum class Split : uint8_t { Train, Test };

// Class labels plus the train/test partition. label[v] == kUnknown means the
// node never appeared in the label file. Freshly loaded tables put every
// node in Test; split_train_test promotes a stratified sample to Train.
struct LabelTable {
  static constexpr int kUnknown = -1;

  int num_classes = 0;
  std::vector<int> label;        // per node, kUnknown allowed
  std::vector<Split> split;      // per node
  std::vector<std::string> class_names;

  int num_nodes() const { return static_cast<int>(label.size()); }
  bool is_train(int v) const { return split[v] == Split::Train; }

  // Label visible to a fit: the class for Train nodes, kUnknown otherwise.
  int training_label(int v) const { return is_train(v) ? label[v] : kUnknown; }

  int train_count() const;
  int known_count() const;
  int class_id(const std::string& name) const;  // -1 when absent
};

// Lines "node class"; both tokens are free-form strings. Class ids are dense
// in order of first appearance. A node listed twice with conflicting classes
// is an error; a repeat with the same class is tolerated.
LabelTable load_labels(const std::string& path, const DirectedGraph& g);
void save_labels(const LabelTable& t, const DirectedGraph& g, const std::string& path);

// Stratified split: each class contributes round(fraction * size) Train
// nodes (at least one for a nonempty class); unlabeled nodes stay Test.
LabelTable split_train_test(const LabelTable& t, double fraction, uint64_t seed);

void save_split(const LabelTable& t, const DirectedGraph& g, const std::string& path);
void load_split(LabelTable& t, const DirectedGraph& g, const std::string& path);

}  // namespace blockmodel
