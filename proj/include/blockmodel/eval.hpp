#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "blockmodel/graph.hpp"
#include "blockmodel/sbm.hpp"
#include "blockmodel/smmb.hpp"
#include "blockmodel/ssmb.hpp"

namespace blockmodel {

enum class ModelKind { sbm, ssmb, smmb };

std::string model_name(ModelKind m);
ModelKind parse_model(const std::string& name);  // throws on unknown names

struct F1Result {
  double macro = 0.0;
  std::vector<double> per_class;
};

// One-vs-rest F1 = 2TP / (2TP + FN + FP) per class, averaged uniformly.
// A class with TP = FP = FN = 0 contributes 0 and still counts; an empty
// input is an error. Entries of `truth` must be valid class ids.
F1Result macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth,
                  int num_classes);

struct ModelSettings {
  NodeModelHyper node;
  double eta_dir = 1.0;
  SmmbHyper smmb;
  FitSchedule schedule;
  int restarts = 5;    // ssmb
  double l2_eta = 0.0; // smmb
  bool include_self_pairs = false;
};

struct BenchmarkConfig {
  std::vector<ModelKind> models;
  std::vector<int> k_values;      // ignored by sbm, which is pinned at K = C
  int repeats = 100;
  double train_fraction = 0.5;
  uint64_t seed = 0;
  int jobs = 1;
  ModelSettings settings;
};

struct RunRecord {
  ModelKind model = ModelKind::sbm;
  int K = 0;
  int repeat = 0;
  uint64_t seed = 0;  // the fit seed actually used
  double macro = 0.0;
  std::vector<double> per_class;
  double seconds = 0.0;  // fit + predict, excludes IO
  int sweeps = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct Aggregate {
  ModelKind model = ModelKind::sbm;
  int K = 0;
  int runs = 0;      // successful runs only
  int failures = 0;
  double mean_f1 = 0.0, std_f1 = 0.0;
  double mean_seconds = 0.0, std_seconds = 0.0;
};

struct ExperimentReport {
  BenchmarkConfig config;
  std::vector<RunRecord> records;     // ordered by (model, K, repeat)
  std::vector<Aggregate> aggregates;  // recomputable from the records
};

std::vector<Aggregate> aggregate_records(const std::vector<RunRecord>& records);

// Fit the model on the Train part of `labels` and predict every node.
// Returned vector holds a class id per node (role id for the sbm).
std::vector<int> fit_and_predict(ModelKind model, const DirectedGraph& g,
                                 const LabelTable& labels, int K,
                                 const ModelSettings& settings, uint64_t seed,
                                 FitInfo* info = nullptr);

// Repeated-holdout protocol: per repeat one stratified split shared by every
// (model, K) entry, so comparisons are paired. Repeats may run on `jobs`
// threads; all per-run randomness derives from (seed, repeat, model, K), so
// the report does not depend on scheduling. Failed runs carry their error
// and are excluded from the aggregates.
ExperimentReport run_benchmark(const DirectedGraph& g, const LabelTable& labels,
                               const BenchmarkConfig& config);

void write_records_csv(const ExperimentReport& report, std::ostream& out,
                       const std::string& config_json_line);
// Plot-ready mean/std vs K per model.
void write_aggregates_csv(const ExperimentReport& report, std::ostream& out,
                          const std::string& config_json_line);

}  // namespace blockmodel
