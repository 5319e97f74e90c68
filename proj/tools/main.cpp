// Command-line front end: fit | predict | evaluate | benchmark | generate |
// export. Every artifact embeds the resolved configuration and a format
// version; exit codes are 0 (success), 1 (runtime failure), 2 (usage).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blockmodel/artifacts.hpp"
#include "blockmodel/eval.hpp"
#include "blockmodel/generator.hpp"
#include "blockmodel/graph.hpp"
#include "blockmodel/rng.hpp"
#include "blockmodel/summary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace blockmodel;

namespace {

constexpr int kFormatVersion = 1;

struct CommonOpts {
  std::string edges, labels, out_dir;
  std::string model = "sbm";
  int K = 2;
  uint64_t seed = 0;
  double alpha = 1.0, beta1 = 1.0, beta2 = 1.0;
  double eta_dir = 1.0;
  double alpha_pair = 1.0, beta = 1.0;
  double tol = 1e-6;
  int max_sweeps = 200;
  int recount_every = 10;
  int restarts = 5;
  double l2_eta = 0.0;
  bool self_loops = false;
};

void add_hyper_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--alpha", o.alpha, "Dirichlet concentration over roles");
  cmd->add_option("--beta1", o.beta1, "Beta prior pseudo-links per block");
  cmd->add_option("--beta2", o.beta2, "Beta prior pseudo-non-links per block");
  cmd->add_option("--eta-dir", o.eta_dir, "class-per-role Dirichlet concentration");
  cmd->add_option("--alpha-pair", o.alpha_pair,
                  "Dirichlet concentration over ordered role pairs");
  cmd->add_option("--beta", o.beta, "Dirichlet concentration over endpoint nodes");
  cmd->add_option("--tol", o.tol, "posterior-change convergence tolerance");
  cmd->add_option("--max-sweeps", o.max_sweeps, "sweep cap");
  cmd->add_option("--recount-every", o.recount_every, "batch recount cadence");
  cmd->add_option("--restarts", o.restarts, "random restarts (ssmb)");
  cmd->add_option("--l2-eta", o.l2_eta, "ridge penalty on the class weights (smmb)");
  cmd->add_flag("--self-loops", o.self_loops, "count self pairs in the node models");
}

ModelSettings to_settings(const CommonOpts& o) {
  ModelSettings s;
  s.node.alpha = o.alpha;
  s.node.beta1 = o.beta1;
  s.node.beta2 = o.beta2;
  s.eta_dir = o.eta_dir;
  s.smmb.alpha_pair = o.alpha_pair;
  s.smmb.beta = o.beta;
  s.schedule.tol = o.tol;
  s.schedule.max_sweeps = o.max_sweeps;
  s.schedule.recount_every = o.recount_every;
  s.restarts = o.restarts;
  s.l2_eta = o.l2_eta;
  s.include_self_pairs = o.self_loops;
  return s;
}

json config_json(const CommonOpts& o, const std::string& command) {
  return json{{"command", command},
              {"model", o.model},
              {"k", o.K},
              {"seed", o.seed},
              {"edges", o.edges},
              {"labels", o.labels},
              {"out_dir", o.out_dir},
              {"alpha", o.alpha},
              {"beta1", o.beta1},
              {"beta2", o.beta2},
              {"eta_dir", o.eta_dir},
              {"alpha_pair", o.alpha_pair},
              {"beta", o.beta},
              {"tol", o.tol},
              {"max_sweeps", o.max_sweeps},
              {"recount_every", o.recount_every},
              {"restarts", o.restarts},
              {"l2_eta", o.l2_eta},
              {"self_loops", o.self_loops}};
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw std::invalid_argument("missing required " + what + " path");
  if (!fs::exists(path))
    throw std::invalid_argument(what + " file not found: " + path);
}

std::vector<std::string> csv_headers(const json& config) {
  return {"format_version " + std::to_string(kFormatVersion), "config " + config.dump()};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_meta(const std::string& path, const json& config,
                const std::vector<std::string>& outputs,
                const std::vector<std::string>& notes, const json& extra = {}) {
  json meta{{"format_version", kFormatVersion},
            {"tool", "blockmodel"},
            {"config", config},
            {"outputs", outputs},
            {"notes", notes}};
  if (!extra.is_null()) meta["results"] = extra;
  write_text(path, meta.dump(2) + "\n");
}

LabelTable resolve_split(const LabelTable& labels, const std::string& split_file,
                         double train_fraction, uint64_t seed,
                         const DirectedGraph& g) {
  if (!split_file.empty()) {
    require_file(split_file, "split");
    LabelTable t = labels;
    load_split(t, g, split_file);
    return t;
  }
  return split_train_test(labels, train_fraction, derive_seed(seed, "split"));
}

const std::vector<std::string> kSplitNote = {
    "split is stratified per class: round(fraction * size) Train nodes, at least "
    "one per nonempty class",
    "prediction reads the fitted node posterior (the average position marginal "
    "for the interaction model)"};

struct FitArtifacts {
  Mat node_mixture;  // N x K
  FitInfo info;
  std::string stats_csv;
  Mat mu;   // ssmb
  Mat eta;  // smmb
};

FitArtifacts run_fit(ModelKind model, const DirectedGraph& g, const LabelTable& split,
                     int K, const ModelSettings& settings, uint64_t seed) {
  FitArtifacts art;
  std::ostringstream stats;
  switch (model) {
    case ModelKind::sbm: {
      SbmOptions opt;
      opt.include_self_pairs = settings.include_self_pairs;
      SbmFitResult fit = fit_sbm(g, split, settings.node, K, settings.schedule, seed, opt);
      art.node_mixture = std::move(fit.posterior.lambda);
      art.info = std::move(fit.info);
      fit.stats.dump_csv(stats);
      break;
    }
    case ModelKind::ssmb: {
      SsmbHyper hyper;
      hyper.node = settings.node;
      hyper.eta_dir = settings.eta_dir;
      SsmbOptions opt;
      opt.include_self_pairs = settings.include_self_pairs;
      opt.restarts = settings.restarts;
      SsmbFitResult fit = fit_ssmb(g, split, hyper, K, settings.schedule, seed, opt);
      art.node_mixture = std::move(fit.posterior.lambda);
      art.mu = std::move(fit.model.mu);
      art.info = std::move(fit.info);
      fit.stats.dump_csv(stats);
      break;
    }
    case ModelKind::smmb: {
      SmmbOptions opt;
      opt.l2_eta = settings.l2_eta;
      SmmbFitResult fit = fit_smmb(g, split, settings.smmb, K, settings.schedule, seed, opt);
      art.node_mixture = Mat(g.num_nodes(), K);
      for (int v = 0; v < g.num_nodes(); ++v)
        fit.posterior.lambda_bar(v, art.node_mixture.row(v));
      art.eta = std::move(fit.eta);
      art.info = std::move(fit.info);
      fit.stats.dump_csv(stats);
      break;
    }
  }
  art.stats_csv = stats.str();
  return art;
}

void write_fit_artifacts(const std::string& out_dir, ModelKind model,
                         const DirectedGraph& g, const LabelTable& split,
                         const FitArtifacts& art, const json& config) {
  auto headers = csv_headers(config);
  save_matrix_csv(out_dir + "/posterior.csv", art.node_mixture, g.node_names(),
                  role_names(art.node_mixture.cols), "node", headers);
  if (model == ModelKind::ssmb)
    save_matrix_csv(out_dir + "/mu.csv", art.mu, split.class_names,
                    role_names(art.mu.cols), "class", headers);
  if (model == ModelKind::smmb)
    save_matrix_csv(out_dir + "/eta.csv", art.eta, split.class_names,
                    role_names(art.eta.cols), "class", headers);
  {
    std::ofstream out(out_dir + "/trace.csv");
    if (!out) throw std::runtime_error("cannot write trace.csv");
    write_trace_csv(out, art.info.trace, headers);
  }
  {
    std::ofstream out(out_dir + "/stats.csv");
    if (!out) throw std::runtime_error("cannot write stats.csv");
    for (const auto& h : headers) out << "# " << h << "\n";
    out << art.stats_csv;
  }
  save_split(split, g, out_dir + "/split.txt");
}

std::vector<int> predict_from_artifacts(ModelKind model, const NamedMatrix& posterior,
                                        const NamedMatrix& mu, const NamedMatrix& eta) {
  std::vector<int> pred(posterior.m.rows, 0);
  switch (model) {
    case ModelKind::sbm:
      for (int v = 0; v < posterior.m.rows; ++v) pred[v] = argmax(posterior.m.row(v));
      break;
    case ModelKind::ssmb:
      for (int v = 0; v < posterior.m.rows; ++v) {
        std::vector<double> score(mu.m.rows);
        for (int c = 0; c < mu.m.rows; ++c) score[c] = dot(mu.m.row(c), posterior.m.row(v));
        pred[v] = argmax(score);
      }
      break;
    case ModelKind::smmb:
      for (int v = 0; v < posterior.m.rows; ++v) {
        std::vector<double> score(eta.m.rows);
        for (int c = 0; c < eta.m.rows; ++c)
          score[c] = dot(eta.m.row(c), posterior.m.row(v));
        pred[v] = argmax(score);
      }
      break;
  }
  return pred;
}

int class_of_role(int k, int K, int C) { return std::min(k * C / K, C - 1); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised blockmodels for node classification"};
  app.require_subcommand(1);

  CommonOpts o;

  auto* fit = app.add_subcommand("fit", "fit a model and write its artifacts");
  auto* predict = app.add_subcommand("predict", "predict classes from fit artifacts");
  auto* evaluate = app.add_subcommand("evaluate", "single split, fit, score");
  auto* benchmark = app.add_subcommand("benchmark", "repeated-holdout K sweep");
  auto* generate = app.add_subcommand("generate", "sample a synthetic network");
  auto* exp = app.add_subcommand("export", "summary network and role matrices");

  // fit
  std::string split_file;
  double train_fraction_fit = 1.0;
  fit->add_option("--edges", o.edges, "edge list file")->required();
  fit->add_option("--labels", o.labels, "label file")->required();
  fit->add_option("--out-dir", o.out_dir, "output directory")->required();
  fit->add_option("--model", o.model, "sbm|ssmb|smmb");
  fit->add_option("--k", o.K, "number of roles");
  fit->add_option("--seed", o.seed, "random seed");
  fit->add_option("--train-fraction", train_fraction_fit,
                  "fraction of labeled nodes used as Train (default: all)");
  fit->add_option("--split-file", split_file, "reuse a saved split");
  add_hyper_options(fit, o);

  // predict
  std::string fit_dir;
  predict->add_option("--edges", o.edges)->required();
  predict->add_option("--labels", o.labels)->required();
  predict->add_option("--fit-dir", fit_dir, "directory holding fit artifacts")->required();
  predict->add_option("--out-dir", o.out_dir)->required();
  predict->add_option("--model", o.model, "sbm|ssmb|smmb");

  // evaluate
  double train_fraction_eval = 0.5;
  evaluate->add_option("--edges", o.edges)->required();
  evaluate->add_option("--labels", o.labels)->required();
  evaluate->add_option("--out-dir", o.out_dir)->required();
  evaluate->add_option("--model", o.model, "sbm|ssmb|smmb");
  evaluate->add_option("--k", o.K);
  evaluate->add_option("--seed", o.seed);
  evaluate->add_option("--train-fraction", train_fraction_eval);
  add_hyper_options(evaluate, o);

  // benchmark
  std::vector<std::string> bench_models{"sbm", "ssmb", "smmb"};
  std::vector<int> k_values;
  int repeats = 100;
  double train_fraction_bench = 0.5;
  int jobs = 1;
  benchmark->add_option("--edges", o.edges)->required();
  benchmark->add_option("--labels", o.labels)->required();
  benchmark->add_option("--out-dir", o.out_dir)->required();
  benchmark->add_option("--models", bench_models, "models to run")->delimiter(',');
  benchmark->add_option("--k-values", k_values, "K sweep (sbm stays pinned at K = C)")
      ->delimiter(',');
  benchmark->add_option("--repeats", repeats, "runs per (model, K)");
  benchmark->add_option("--train-fraction", train_fraction_bench);
  benchmark->add_option("--seed", o.seed);
  benchmark->add_option("--jobs", jobs, "concurrent repeats");
  add_hyper_options(benchmark, o);

  // generate
  int gen_nodes = 200, gen_interactions = 1000, gen_classes = 2;
  double gen_within = 0.3, gen_across = 0.01, gen_eta_scale = 3.0;
  generate->add_option("--out-dir", o.out_dir)->required();
  generate->add_option("--model", o.model, "sbm|ssmb|smmb");
  generate->add_option("--nodes", gen_nodes);
  generate->add_option("--interactions", gen_interactions, "interaction count (smmb)");
  generate->add_option("--k", o.K, "planted roles");
  generate->add_option("--classes", gen_classes, "classes (ssmb/smmb)");
  generate->add_option("--within", gen_within, "within-role rate or pair weight");
  generate->add_option("--across", gen_across, "across-role rate or pair weight");
  generate->add_option("--eta-scale", gen_eta_scale, "class-weight magnitude (smmb)");
  generate->add_flag("--self-loops", o.self_loops, "allow self loops (sbm/ssmb)");
  generate->add_option("--seed", o.seed);

  // export
  double threshold = -1.0;
  exp->add_option("--edges", o.edges)->required();
  exp->add_option("--labels", o.labels)->required();
  exp->add_option("--fit-dir", fit_dir, "directory holding fit artifacts")->required();
  exp->add_option("--out-dir", o.out_dir)->required();
  exp->add_option("--model", o.model, "sbm|ssmb|smmb");
  exp->add_option("--threshold", threshold, "summary edge cutoff (default: prior mean)");
  add_hyper_options(exp, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fs::create_directories(o.out_dir);

    if (*fit) {
      require_file(o.edges, "edge list");
      require_file(o.labels, "label");
      ModelKind model = parse_model(o.model);
      DirectedGraph g = load_edge_list(o.edges);
      LabelTable labels = load_labels(o.labels, g);
      LabelTable split =
          resolve_split(labels, split_file, train_fraction_fit, o.seed, g);
      json config = config_json(o, "fit");
      config["train_fraction"] = train_fraction_fit;
      config["split_file"] = split_file;
      FitArtifacts art = run_fit(model, g, split, o.K, to_settings(o), o.seed);
      write_fit_artifacts(o.out_dir, model, g, split, art, config);
      json results{{"sweeps", art.info.sweeps},
                   {"converged", art.info.converged},
                   {"free_energy", art.info.free_energy},
                   {"restart", art.info.restart},
                   {"warnings", art.info.warnings}};
      std::vector<std::string> outputs{"posterior.csv", "trace.csv", "stats.csv",
                                       "split.txt", "meta.json"};
      if (model == ModelKind::ssmb) outputs.push_back("mu.csv");
      if (model == ModelKind::smmb) outputs.push_back("eta.csv");
      write_meta(o.out_dir + "/meta.json", config, outputs, kSplitNote, results);
      return 0;
    }

    if (*predict) {
      require_file(o.edges, "edge list");
      require_file(o.labels, "label");
      ModelKind model = parse_model(o.model);
      DirectedGraph g = load_edge_list(o.edges);
      LabelTable labels = load_labels(o.labels, g);
      require_file(fit_dir + "/posterior.csv", "posterior");
      NamedMatrix posterior = load_matrix_csv(fit_dir + "/posterior.csv");
      if (posterior.m.rows != g.num_nodes())
        throw std::invalid_argument("posterior row count does not match the graph");
      NamedMatrix mu, eta;
      if (model == ModelKind::ssmb) {
        require_file(fit_dir + "/mu.csv", "mu");
        mu = load_matrix_csv(fit_dir + "/mu.csv");
      }
      if (model == ModelKind::smmb) {
        require_file(fit_dir + "/eta.csv", "eta");
        eta = load_matrix_csv(fit_dir + "/eta.csv");
      }
      json config = config_json(o, "predict");
      config["fit_dir"] = fit_dir;
      std::vector<int> pred = predict_from_artifacts(model, posterior, mu, eta);
      std::vector<std::string> names =
          model == ModelKind::sbm
              ? (labels.num_classes == posterior.m.cols ? labels.class_names
                                                        : role_names(posterior.m.cols))
              : labels.class_names;
      std::ofstream out(o.out_dir + "/predictions.csv");
      if (!out) throw std::runtime_error("cannot write predictions.csv");
      write_predictions_csv(out, g, pred, names, csv_headers(config));
      write_meta(o.out_dir + "/meta.json", config, {"predictions.csv", "meta.json"},
                 kSplitNote);
      return 0;
    }

    if (*evaluate) {
      require_file(o.edges, "edge list");
      require_file(o.labels, "label");
      ModelKind model = parse_model(o.model);
      DirectedGraph g = load_edge_list(o.edges);
      LabelTable labels = load_labels(o.labels, g);
      LabelTable split =
          split_train_test(labels, train_fraction_eval, derive_seed(o.seed, "split"));
      json config = config_json(o, "evaluate");
      config["train_fraction"] = train_fraction_eval;
      FitInfo info;
      auto start = std::chrono::steady_clock::now();
      std::vector<int> pred =
          fit_and_predict(model, g, split, o.K, to_settings(o), o.seed, &info);
      auto stop = std::chrono::steady_clock::now();
      std::vector<int> truth, pred_test;
      for (int v = 0; v < g.num_nodes(); ++v) {
        if (split.label[v] == LabelTable::kUnknown || split.is_train(v)) continue;
        truth.push_back(split.label[v]);
        pred_test.push_back(pred[v]);
      }
      F1Result f1 = macro_f1(pred_test, truth, labels.num_classes);
      json report{{"format_version", kFormatVersion},
                  {"config", config},
                  {"macro_f1", f1.macro},
                  {"per_class_f1", f1.per_class},
                  {"class_names", labels.class_names},
                  {"test_nodes", truth.size()},
                  {"seconds", std::chrono::duration<double>(stop - start).count()},
                  {"sweeps", info.sweeps},
                  {"converged", info.converged},
                  {"notes", kSplitNote}};
      write_text(o.out_dir + "/report.json", report.dump(2) + "\n");
      std::ofstream out(o.out_dir + "/predictions.csv");
      if (!out) throw std::runtime_error("cannot write predictions.csv");
      write_predictions_csv(out, g, pred, labels.class_names, csv_headers(config));
      save_split(split, g, o.out_dir + "/split.txt");
      write_meta(o.out_dir + "/meta.json", config,
                 {"report.json", "predictions.csv", "split.txt", "meta.json"},
                 kSplitNote, report);
      std::cout << "macro_f1 " << f1.macro << "\n";
      return 0;
    }

    if (*benchmark) {
      require_file(o.edges, "edge list");
      require_file(o.labels, "label");
      DirectedGraph g = load_edge_list(o.edges);
      LabelTable labels = load_labels(o.labels, g);
      BenchmarkConfig bc;
      for (const auto& m : bench_models) bc.models.push_back(parse_model(m));
      bc.k_values = k_values;
      bc.repeats = repeats;
      bc.train_fraction = train_fraction_bench;
      bc.seed = o.seed;
      bc.jobs = jobs;
      bc.settings = to_settings(o);
      json config = config_json(o, "benchmark");
      config["models"] = bench_models;
      config["k_values"] = k_values;
      config["repeats"] = repeats;
      config["train_fraction"] = train_fraction_bench;
      config["jobs"] = jobs;
      config["defaults"] = {{"train_fraction", 0.5}, {"repeats", 100}};
      ExperimentReport report = run_benchmark(g, labels, bc);
      {
        std::ofstream out(o.out_dir + "/records.csv");
        if (!out) throw std::runtime_error("cannot write records.csv");
        write_records_csv(report, out, config.dump());
      }
      {
        std::ofstream out(o.out_dir + "/aggregates.csv");
        if (!out) throw std::runtime_error("cannot write aggregates.csv");
        write_aggregates_csv(report, out, config.dump());
      }
      json jrecords = json::array();
      for (const auto& r : report.records)
        jrecords.push_back({{"model", model_name(r.model)},
                            {"k", r.K},
                            {"repeat", r.repeat},
                            {"seed", r.seed},
                            {"macro_f1", r.macro},
                            {"per_class_f1", r.per_class},
                            {"seconds", r.seconds},
                            {"sweeps", r.sweeps},
                            {"converged", r.converged},
                            {"failed", r.failed},
                            {"error", r.error}});
      json jagg = json::array();
      for (const auto& a : report.aggregates)
        jagg.push_back({{"model", model_name(a.model)},
                        {"k", a.K},
                        {"runs", a.runs},
                        {"failures", a.failures},
                        {"mean_f1", a.mean_f1},
                        {"std_f1", a.std_f1},
                        {"mean_seconds", a.mean_seconds},
                        {"std_seconds", a.std_seconds}});
      std::vector<std::string> notes = kSplitNote;
      notes.push_back("splits are shared across models within a repeat (paired runs)");
      notes.push_back("sbm runs at K = number of classes regardless of --k-values");
      notes.push_back("zero-support classes score F1 = 0 and stay in the average");
      notes.push_back("seconds cover fit and prediction only, never IO");
      json jreport{{"format_version", kFormatVersion},
                   {"config", config},
                   {"records", jrecords},
                   {"aggregates", jagg},
                   {"notes", notes}};
      write_text(o.out_dir + "/report.json", jreport.dump(2) + "\n");
      write_meta(o.out_dir + "/meta.json", config,
                 {"report.json", "records.csv", "aggregates.csv", "meta.json"}, notes);
      return 0;
    }

    if (*generate) {
      PlantedSpec spec;
      spec.N = gen_nodes;
      spec.I = gen_interactions;
      spec.K = o.K;
      spec.C = gen_classes;
      spec.seed = o.seed;
      spec.self_loops = o.self_loops;
      json config{{"command", "generate"}, {"model", o.model},    {"nodes", gen_nodes},
                  {"interactions", gen_interactions},             {"k", o.K},
                  {"classes", gen_classes}, {"within", gen_within}, {"across", gen_across},
                  {"eta_scale", gen_eta_scale}, {"self_loops", o.self_loops},
                  {"seed", o.seed}, {"out_dir", o.out_dir}};
      if (o.model == "sbm") {
        spec.model = PlantedSpec::Model::sbm;
        spec.pi = block_rates(o.K, gen_within, gen_across);
      } else if (o.model == "ssmb") {
        spec.model = PlantedSpec::Model::ssmb;
        spec.pi = block_rates(o.K, gen_within, gen_across);
        spec.mu = Mat(o.K, gen_classes);
        for (int k = 0; k < o.K; ++k)
          spec.mu(k, class_of_role(k, o.K, gen_classes)) = 1.0;
      } else if (o.model == "smmb") {
        spec.model = PlantedSpec::Model::smmb;
        spec.pi = block_rates(o.K, gen_within, gen_across);
        double s = sum(spec.pi.a);
        for (double& x : spec.pi.a) x /= s;
        spec.eta = Mat(gen_classes, o.K);
        for (int k = 0; k < o.K; ++k)
          spec.eta(class_of_role(k, o.K, gen_classes), k) = gen_eta_scale;
      } else {
        throw std::invalid_argument("unknown model '" + o.model + "'");
      }
      SampledNetwork net = sample(spec);
      save_edge_list(net.graph, o.out_dir + "/edges.txt");
      save_labels(net.labels, net.graph, o.out_dir + "/labels.txt");
      save_ground_truth(net, o.out_dir + "/truth.csv");
      write_meta(o.out_dir + "/meta.json", config,
                 {"edges.txt", "labels.txt", "truth.csv", "meta.json"},
                 {"unlabeled generated nodes are omitted from labels.txt"});
      return 0;
    }

    if (*exp) {
      require_file(o.edges, "edge list");
      require_file(o.labels, "label");
      ModelKind model = parse_model(o.model);
      DirectedGraph g = load_edge_list(o.edges);
      LabelTable labels = load_labels(o.labels, g);
      require_file(fit_dir + "/stats.csv", "stats");
      require_file(fit_dir + "/posterior.csv", "posterior");
      std::ifstream stats_in(fit_dir + "/stats.csv");
      SuffStats stats = parse_stats_csv(stats_in);
      NamedMatrix posterior = load_matrix_csv(fit_dir + "/posterior.csv");
      if (posterior.m.rows != g.num_nodes())
        throw std::invalid_argument("posterior row count does not match the graph");
      json config = config_json(o, "export");
      config["fit_dir"] = fit_dir;
      config["threshold"] = threshold;
      ModelSettings settings = to_settings(o);
      SummaryNetwork summary = model == ModelKind::smmb
                                   ? build_summary(stats, settings.smmb)
                                   : build_summary(stats, settings.node);
      double thr = threshold >= 0.0 ? threshold : summary.default_threshold;
      config["resolved_threshold"] = thr;
      write_text(o.out_dir + "/summary.dot", export_dot(summary, thr));
      {
        std::ofstream out(o.out_dir + "/node_role.csv");
        if (!out) throw std::runtime_error("cannot write node_role.csv");
        export_node_role_matrix(posterior.m, g, labels, out, csv_headers(config));
      }
      Mat dists;
      std::vector<uint8_t> zero_support;
      if (model == ModelKind::ssmb) {
        require_file(fit_dir + "/mu.csv", "mu");
        NamedMatrix mu = load_matrix_csv(fit_dir + "/mu.csv");
        dists = role_class_from_mu(mu.m);
        zero_support.assign(dists.rows, 0);
      } else {
        dists = role_class_empirical(posterior.m, labels, &zero_support);
      }
      {
        std::ofstream out(o.out_dir + "/role_class.csv");
        if (!out) throw std::runtime_error("cannot write role_class.csv");
        export_role_class_dists(dists, zero_support, out, csv_headers(config));
      }
      json bundle{{"format_version", kFormatVersion},
                  {"config", config},
                  {"summary_weights", summary.weights.a},
                  {"role_size", summary.role_size},
                  {"threshold", thr}};
      write_text(o.out_dir + "/summary.json", bundle.dump(2) + "\n");
      write_meta(o.out_dir + "/meta.json", config,
                 {"summary.dot", "node_role.csv", "role_class.csv", "summary.json",
                  "meta.json"},
                 {"role_class rows are p(class | role); zero-support roles emit a "
                  "uniform row with the flag set"});
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
