#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockmodel/graph.hpp"
#include "blockmodel/mat.hpp"

namespace blockmodel {

// Parameters of the three generative processes, in their uncollapsed form.
// Empty simplex fields default to uniform.
struct PlantedSpec {
  enum class Model { sbm, ssmb, smmb };

  Model model = Model::sbm;
  int N = 0;  // nodes
  int I = 0;  // interactions (smmb only)
  int K = 0;  // roles
  int C = 0;  // classes (ssmb/smmb; sbm uses C = K)

  std::vector<double> theta;  // K role proportions (sbm/ssmb)
  Mat pi;   // K x K link probabilities (sbm/ssmb) or pair distribution (smmb)
  Mat mu;   // K x C class distribution per role (ssmb)
  Mat eta;  // C x K class weights (smmb)
  Mat phi;  // K x N node distribution per role (smmb)

  bool self_loops = false;  // sbm/ssmb; smmb may always draw s = r
  uint64_t seed = 0;
};

struct SampledNetwork {
  DirectedGraph graph;
  LabelTable labels;           // every node in Test
  std::vector<int> true_roles; // per node (sbm/ssmb)
  Mat true_mixture;            // N x K realized role frequencies (smmb)
};

// Roles ~ Categorical(theta); each ordered pair links with probability
// pi[z_s][z_r]; the label is the role itself.
SampledNetwork sample_sbm(const PlantedSpec& spec);

// As sample_sbm, plus labels ~ Categorical(mu[z_v]).
SampledNetwork sample_ssmb(const PlantedSpec& spec);

// I interactions: ordered role pair ~ Categorical(pi over the K*K pairs),
// endpoints ~ Categorical(phi[z_s]) and Categorical(phi[z_r]); labels
// ~ Softmax(eta . zbar_v) from the realized assignments. A node with no
// positions stays unlabeled.
SampledNetwork sample_smmb(const PlantedSpec& spec);

SampledNetwork sample(const PlantedSpec& spec);

// Two-block style pi: `within` on the diagonal, `across` elsewhere.
Mat block_rates(int K, double within, double across);

// Node,role (or node,zbar...) CSV next to the edge/label files.
void save_ground_truth(const SampledNetwork& net, const std::string& path);

}  // namespace blockmodel
