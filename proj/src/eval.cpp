#include "blockmodel/eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "blockmodel/rng.hpp"

namespace blockmodel {

std::string model_name(ModelKind m) {
  switch (m) {
    case ModelKind::sbm: return "sbm";
    case ModelKind::ssmb: return "ssmb";
    case ModelKind::smmb: return "smmb";
  }
  return "?";
}

ModelKind parse_model(const std::string& name) {
  if (name == "sbm") return ModelKind::sbm;
  if (name == "ssmb") return ModelKind::ssmb;
  if (name == "smmb") return ModelKind::smmb;
  throw std::invalid_argument("unknown model '" + name + "' (expected sbm|ssmb|smmb)");
}

F1Result macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth,
                  int num_classes) {
  if (truth.empty()) throw std::invalid_argument("macro F1 of an empty set is undefined");
  if (predicted.size() != truth.size())
    throw std::invalid_argument("prediction/truth size mismatch");
  if (num_classes < 1) throw std::invalid_argument("need at least one class");
  std::vector<double> tp(num_classes, 0.0), fp(num_classes, 0.0), fn(num_classes, 0.0);
  for (size_t i = 0; i < truth.size(); ++i) {
    int t = truth[i], p = predicted[i];
    if (t < 0 || t >= num_classes)
      throw std::invalid_argument("truth label out of range at entry " +
                                  std::to_string(i));
    if (p == t) {
      tp[t] += 1.0;
    } else {
      fn[t] += 1.0;
      if (p >= 0 && p < num_classes) fp[p] += 1.0;
    }
  }
  F1Result res;
  res.per_class.resize(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    double denom = 2.0 * tp[c] + fn[c] + fp[c];
    res.per_class[c] = denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
    res.macro += res.per_class[c];
  }
  res.macro /= num_classes;
  return res;
}

std::vector<int> fit_and_predict(ModelKind model, const DirectedGraph& g,
                                 const LabelTable& labels, int K,
                                 const ModelSettings& settings, uint64_t seed,
                                 FitInfo* info) {
  std::vector<int> pred(g.num_nodes(), 0);
  switch (model) {
    case ModelKind::sbm: {
      SbmOptions opt;
      opt.include_self_pairs = settings.include_self_pairs;
      SbmFitResult fit =
          fit_sbm(g, labels, settings.node, K, settings.schedule, seed, opt);
      for (int v = 0; v < g.num_nodes(); ++v) pred[v] = predict_sbm(fit.posterior, v);
      if (info) *info = std::move(fit.info);
      break;
    }
    case ModelKind::ssmb: {
      SsmbHyper hyper;
      hyper.node = settings.node;
      hyper.eta_dir = settings.eta_dir;
      SsmbOptions opt;
      opt.include_self_pairs = settings.include_self_pairs;
      opt.restarts = settings.restarts;
      SsmbFitResult fit = fit_ssmb(g, labels, hyper, K, settings.schedule, seed, opt);
      for (int v = 0; v < g.num_nodes(); ++v)
        pred[v] = predict_ssmb(fit.posterior, fit.model, v);
      if (info) *info = std::move(fit.info);
      break;
    }
    case ModelKind::smmb: {
      SmmbOptions opt;
      opt.l2_eta = settings.l2_eta;
      SmmbFitResult fit =
          fit_smmb(g, labels, settings.smmb, K, settings.schedule, seed, opt);
      for (int v = 0; v < g.num_nodes(); ++v)
        pred[v] = predict_smmb(fit.posterior, fit.eta, v);
      if (info) *info = std::move(fit.info);
      break;
    }
  }
  return pred;
}

std::vector<Aggregate> aggregate_records(const std::vector<RunRecord>& records) {
  std::vector<Aggregate> out;
  auto find = [&](ModelKind m, int K) -> Aggregate& {
    for (auto& a : out)
      if (a.model == m && a.K == K) return a;
    out.push_back({});
    out.back().model = m;
    out.back().K = K;
    return out.back();
  };
  for (const auto& r : records) {
    Aggregate& a = find(r.model, r.K);
    if (r.failed) {
      ++a.failures;
    } else {
      ++a.runs;
      a.mean_f1 += r.macro;
      a.mean_seconds += r.seconds;
    }
  }
  for (auto& a : out) {
    if (a.runs > 0) {
      a.mean_f1 /= a.runs;
      a.mean_seconds /= a.runs;
    }
  }
  for (const auto& r : records) {
    if (r.failed) continue;
    Aggregate& a = find(r.model, r.K);
    a.std_f1 += (r.macro - a.mean_f1) * (r.macro - a.mean_f1);
    a.std_seconds += (r.seconds - a.mean_seconds) * (r.seconds - a.mean_seconds);
  }
  for (auto& a : out) {
    if (a.runs > 1) {
      a.std_f1 = std::sqrt(a.std_f1 / (a.runs - 1));
      a.std_seconds = std::sqrt(a.std_seconds / (a.runs - 1));
    } else {
      a.std_f1 = 0.0;
      a.std_seconds = 0.0;
    }
  }
  return out;
}

ExperimentReport run_benchmark(const DirectedGraph& g, const LabelTable& labels,
                               const BenchmarkConfig& config) {
  if (config.repeats < 1) throw std::invalid_argument("repeats must be positive");
  if (config.models.empty()) throw std::invalid_argument("no models selected");
  if (labels.num_classes < 2) throw std::invalid_argument("need at least two classes");
  const int C = labels.num_classes;

  // One task per (model, K, repeat); the sbm ignores the K list.
  struct Task {
    ModelKind model;
    int K;
    int repeat;
  };
  std::vector<Task> tasks;
  for (ModelKind m : config.models) {
    std::vector<int> ks;
    if (m == ModelKind::sbm) {
      ks = {C};
    } else {
      ks = config.k_values.empty() ? std::vector<int>{C} : config.k_values;
    }
    for (int K : ks)
      for (int r = 0; r < config.repeats; ++r) tasks.push_back({m, K, r});
  }

  ExperimentReport report;
  report.config = config;
  report.records.resize(tasks.size());

  auto run_task = [&](size_t idx) {
    const Task& t = tasks[idx];
    RunRecord rec;
    rec.model = t.model;
    rec.K = t.K;
    rec.repeat = t.repeat;
    uint64_t repeat_base = derive_seed(config.seed, "repeat", t.repeat);
    rec.seed = derive_seed(repeat_base, model_name(t.model), t.K);
    try {
      LabelTable split = split_train_test(labels, config.train_fraction,
                                          derive_seed(repeat_base, "split"));
      std::vector<int> truth, pred_test;
      FitInfo info;
      auto start = std::chrono::steady_clock::now();
      std::vector<int> pred =
          fit_and_predict(t.model, g, split, t.K, config.settings, rec.seed, &info);
      auto stop = std::chrono::steady_clock::now();
      rec.seconds = std::chrono::duration<double>(stop - start).count();
      rec.sweeps = info.sweeps;
      rec.converged = info.converged;
      for (int v = 0; v < g.num_nodes(); ++v) {
        if (split.label[v] == LabelTable::kUnknown || split.is_train(v)) continue;
        truth.push_back(split.label[v]);
        pred_test.push_back(pred[v]);
      }
      F1Result f1 = macro_f1(pred_test, truth, C);
      rec.macro = f1.macro;
      rec.per_class = std::move(f1.per_class);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    report.records[idx] = std::move(rec);
  };

  int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          run_task(i);
        }
      });
    for (auto& th : pool) th.join();
  }

  report.aggregates = aggregate_records(report.records);
  return report;
}

void write_records_csv(const ExperimentReport& report, std::ostream& out,
                       const std::string& config_json_line) {
  out << "# format_version 1\n# config " << config_json_line << "\n";
  out << "model,K,repeat,seed,macro_f1,seconds,sweeps,converged,failed,error";
  size_t classes = 0;
  for (const auto& r : report.records) classes = std::max(classes, r.per_class.size());
  for (size_t c = 0; c < classes; ++c) out << ",f1_class" << c;
  out << "\n";
  char buf[32];
  for (const auto& r : report.records) {
    out << model_name(r.model) << "," << r.K << "," << r.repeat << "," << r.seed << ",";
    std::snprintf(buf, sizeof buf, "%.17g", r.macro);
    out << buf << ",";
    std::snprintf(buf, sizeof buf, "%.6f", r.seconds);
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << buf << "," << r.sweeps << "," << (r.converged ? 1 : 0) << ","
        << (r.failed ? 1 : 0) << "," << err;
    for (size_t c = 0; c < classes; ++c) {
      out << ",";
      if (c < r.per_class.size()) {
        std::snprintf(buf, sizeof buf, "%.17g", r.per_class[c]);
        out << buf;
      }
    }
    out << "\n";
  }
}

void write_aggregates_csv(const ExperimentReport& report, std::ostream& out,
                          const std::string& config_json_line) {
  out << "# format_version 1\n# config " << config_json_line << "\n";
  out << "model,K,runs,failures,mean_f1,std_f1,mean_seconds,std_seconds\n";
  char buf[32];
  for (const auto& a : report.aggregates) {
    out << model_name(a.model) << "," << a.K << "," << a.runs << "," << a.failures;
    for (double x : {a.mean_f1, a.std_f1, a.mean_seconds, a.std_seconds}) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace blockmodel
