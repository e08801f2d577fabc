// Copyright 2026 The uqwiz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// uqwiz: train stochastic models and lazy ensembles, run quantified
// predictions, evaluate misprediction detection and benchmark pool sizes.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli_support.h"
#include "uqwiz/ensemble.h"
#include "uqwiz/errors.h"
#include "uqwiz/evaluation.h"
#include "uqwiz/nn.h"
#include "uqwiz/persist.h"

namespace fs = std::filesystem;

namespace uqwiz::cli {
namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string model;
  std::string dataset;
  std::string output;
};

struct TrainOptions {
  std::string arch;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
};

struct EnsembleOptions {
  int num_models = 5;
  std::size_t num_processes = 0;
  std::string context;
  std::string model_dir;
};

struct PredictOptionsCli {
  std::vector<std::string> quantifiers;
  std::size_t num_samples = 32;
  std::optional<bool> as_confidence;
  std::string format = "csv";
  std::size_t batch_size = 32;
  std::size_t num_processes = 0;
};

struct BenchOptions {
  int num_models = 8;
  std::string processes_list = "0,2,4";
  std::string context;
};

// Writes to --output when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("uqwiz");
  logger->set_pattern("uqwiz: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("UQWIZ_LOG"); env != nullptr) {
    const std::string_view v = env;
    if (v == "error" || v == "warn" || v == "info" || v == "debug") {
      level = spdlog::level::from_str(env);
    } else {
      spdlog::warn("ignoring UQWIZ_LOG={}, expected error|warn|info|debug", v);
    }
  }
  spdlog::set_level(level);
}

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
  return value;
}

TrainConfig train_config(const TrainOptions& t, std::uint64_t seed, std::size_t dataset_size) {
  TrainConfig config;
  config.epochs = t.epochs;
  config.batch_size = std::min(t.batch_size, std::max<std::size_t>(dataset_size, 1));
  config.learning_rate = t.learning_rate;
  config.seed = seed;
  if (config.batch_size != t.batch_size) {
    spdlog::info("batch size capped at dataset size {}", config.batch_size);
  }
  return config;
}

std::string format_loss(const TrainingHistory& h) {
  if (h.loss.empty()) return "n/a";
  std::ostringstream os;
  os.precision(6);
  os << h.loss.back();
  return os.str();
}

double training_accuracy(SequentialModel& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  return accuracy(max_softmax(model.forward(data.features)).classes, data.labels);
}

void warn_without_dropout(const Architecture& arch) {
  if (arch.dropout == 0.0) {
    spdlog::warn("architecture has no dropout; sampling-based quantifiers will see identical samples");
  }
}

int train_stochastic(const GlobalOptions& g, const TrainOptions& t) {
  const auto& out_path = require(g.model, "--model");
  const auto arch = parse_arch(t.arch);
  const auto data = load_dataset(require(g.dataset, "--dataset"), g.seed);
  warn_without_dropout(arch);

  auto model = build_sequential(classifier_layers(arch, data.features.cols(), data.num_classes), g.seed);
  const auto history = fit(model, data.features, data.labels, train_config(t, g.seed, data.size()));
  save_model(model, out_path);
  spdlog::info("saved {}", out_path);

  Sink sink(g.output);
  sink.stream() << "final_loss=" << format_loss(history)
                << " accuracy=" << training_accuracy(model, data) << '\n';
  return 0;
}

int train_ensemble(const GlobalOptions& g, const TrainOptions& t, const EnsembleOptions& e) {
  const fs::path dir = require(e.model_dir, "--model-dir");
  const auto arch = parse_arch(t.arch);
  if (e.num_models < 2) throw UsageError("--num-models must be at least 2");
  const auto context = parse_context(e.context, e.num_processes);
  context->validate(e.num_processes);
  const auto data = load_dataset(require(g.dataset, "--dataset"), g.seed);

  if (fs::exists(dir) && !fs::is_empty(dir)) {
    throw ValidationError("refusing to overwrite non-empty directory " + dir.string());
  }
  const auto layers = classifier_layers(arch, data.features.cols(), data.num_classes);
  const Supplier<TrainingHistory> supplier = [&](const TaskContext& ctx) {
    auto model = build_sequential(layers, ctx.seed());
    auto history = fit(model, data.features, data.labels, train_config(t, ctx.seed(), data.size()));
    return std::pair{std::move(model), std::move(history)};
  };
  PoolConfig pool;
  pool.num_processes = e.num_processes;
  pool.base_seed = g.seed;
  PoolStats stats;
  const auto histories = LazyEnsemble(dir, e.num_models, context).create(supplier, pool, &stats);
  for (const auto& w : stats.warnings) spdlog::warn("{}", w);

  Sink sink(g.output);
  for (std::size_t i = 0; i < histories.size(); ++i) {
    sink.stream() << "model " << i << " final_loss=" << format_loss(histories[i]) << '\n';
  }
  return 0;
}

bool any_sampling(const std::vector<const QuantifierDescriptor*>& qs) {
  return std::ranges::any_of(qs, [](const auto* q) { return q->is_sampling_based; });
}

// Quantified results for the model file or ensemble directory at --model.
std::vector<QuantifiedResult> run_quantifiers(const GlobalOptions& g, const PredictOptionsCli& p,
                                              const std::vector<const QuantifierDescriptor*>& qs,
                                              const Matrix& x) {
  const fs::path path = g.model;
  if (LazyEnsemble::is_ensemble_dir(path)) {
    const auto context = default_context(p.num_processes);
    PoolConfig pool;
    pool.num_processes = p.num_processes;
    pool.base_seed = g.seed;
    const auto ensemble = LazyEnsemble::open(path);
    return ensemble.predict_quantified(x, std::span<const QuantifierDescriptor* const>(qs), pool,
                                       p.as_confidence);
  }
  if (!fs::is_regular_file(path)) {
    throw UsageError("--model '" + g.model + "' is neither a model file nor an ensemble directory");
  }
  if (any_sampling(qs) && p.num_samples < 2) {
    throw InsufficientSamplesError("sampling-based quantifiers need --num-samples >= 2");
  }
  auto model = load_model(path, g.seed);
  PredictOptions options;
  options.num_samples = p.num_samples;
  options.as_confidence = p.as_confidence;
  options.batch_size = p.batch_size;
  return predict_quantified(model, x, std::span<const QuantifierDescriptor* const>(qs), options);
}

void emit(const GlobalOptions& g, const std::string& format, const Table& table) {
  Sink sink(g.output);
  if (format == "json") {
    write_json(sink.stream(), table);
  } else {
    write_csv(sink.stream(), table);
  }
}

nlohmann::ordered_json prediction_value(const QuantifiedResult& r, std::size_t n) {
  if (r.problem_type == ProblemType::kClassification) return r.classes[n];
  const auto row = r.values.row(n);
  return std::vector<double>(row.begin(), row.end());
}

int predict(const GlobalOptions& g, const PredictOptionsCli& p) {
  require(g.model, "--model");
  const auto qs = resolve_quantifiers(p.quantifiers);
  const auto data = load_dataset(require(g.dataset, "--dataset"), g.seed);
  const auto results = run_quantifiers(g, p, qs, data.features);

  Table table{{"input_index", "prediction", "score", "score_kind", "quantifier"}, {}};
  for (std::size_t n = 0; n < data.size(); ++n) {
    for (std::size_t q = 0; q < qs.size(); ++q) {
      nlohmann::ordered_json row;
      row["input_index"] = n;
      row["prediction"] = prediction_value(results[q], n);
      row["score"] = results[q].scores[n];
      row["score_kind"] = std::string(to_string(results[q].score_kind));
      row["quantifier"] = qs[q]->canonical_name;
      table.rows.push_back(std::move(row));
    }
  }
  emit(g, p.format, table);
  return 0;
}

int evaluate(const GlobalOptions& g, const PredictOptionsCli& p) {
  require(g.model, "--model");
  const auto qs = resolve_quantifiers(p.quantifiers);
  const auto data = load_dataset(require(g.dataset, "--dataset"), g.seed);
  const auto results = run_quantifiers(g, p, qs, data.features);

  Table table{{"quantifier", "num_inputs", "accuracy", "num_wrong", "auroc"}, {}};
  for (std::size_t q = 0; q < qs.size(); ++q) {
    if (results[q].problem_type != ProblemType::kClassification) {
      throw UnsupportedQuantifierError("evaluate needs a classification quantifier");
    }
    const auto report = evaluate_misprediction(results[q], data.labels);
    nlohmann::ordered_json row;
    row["quantifier"] = qs[q]->canonical_name;
    row["num_inputs"] = data.size();
    row["accuracy"] = report.accuracy;
    row["num_wrong"] = report.num_wrong;
    row["auroc"] = report.auroc ? nlohmann::ordered_json(*report.auroc) : nlohmann::ordered_json("n/a");
    table.rows.push_back(std::move(row));
  }
  emit(g, p.format, table);
  return 0;
}

std::string occupancy_text(const std::map<std::string, std::size_t>& occupancy) {
  std::string text;
  for (const auto& [slot, peak] : occupancy) {
    if (!text.empty()) text += ';';
    text += slot + "=" + std::to_string(peak);
  }
  return text;
}

int benchmark(const GlobalOptions& g, const TrainOptions& t, const BenchOptions& b,
              const std::string& format) {
  const auto arch = parse_arch(t.arch);
  if (b.num_models < 2) throw UsageError("--num-models must be at least 2");
  auto counts = parse_count_list(b.processes_list);
  if (std::ranges::find(counts, 0u) == counts.end()) counts.insert(counts.begin(), 0);
  std::vector<std::shared_ptr<const ContextHandler>> contexts;
  for (std::size_t k : counts) {
    contexts.push_back(k == 0 ? none_context() : parse_context(b.context, k));
    contexts.back()->validate(k);
  }
  const auto data = load_dataset(g.dataset.empty() ? "blobs:200,2,0.5" : g.dataset, g.seed);
  if (std::thread::hardware_concurrency() < 2) {
    spdlog::warn("only {} hardware thread(s); parallel timings are not meaningful",
                 std::thread::hardware_concurrency());
  }

  const auto layers = classifier_layers(arch, data.features.cols(), data.num_classes);
  const Supplier<double> supplier = [&](const TaskContext& ctx) {
    auto model = build_sequential(layers, ctx.seed());
    const auto h = fit(model, data.features, data.labels, train_config(t, ctx.seed(), data.size()));
    return std::pair{std::move(model), h.loss.empty() ? 0.0 : h.loss.back()};
  };

  Table table{{"num_processes", "context", "wall_clock_seconds", "peak_concurrent_models",
               "per_slot_occupancy", "reduction_percent"},
              {}};
  const fs::path scratch = fs::temp_directory_path() / ("uqwiz_bench_" + std::to_string(::getpid()));
  std::optional<double> baseline;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const fs::path dir = scratch / ("k" + std::to_string(counts[i]) + "_" + std::to_string(i));
    PoolConfig pool;
    pool.num_processes = counts[i];
    pool.base_seed = g.seed;
    PoolStats stats;
    const auto start = std::chrono::steady_clock::now();
    try {
      LazyEnsemble(dir, b.num_models, contexts[i]).create(supplier, pool, &stats);
    } catch (...) {
      fs::remove_all(scratch);
      throw;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::remove_all(dir);
    if (counts[i] == 0 && !baseline) baseline = seconds;

    nlohmann::ordered_json row;
    row["num_processes"] = counts[i];
    row["context"] = std::string(contexts[i]->name());
    row["wall_clock_seconds"] = seconds;
    row["peak_concurrent_models"] = stats.peak_concurrent_models;
    row["per_slot_occupancy"] = occupancy_text(stats.peak_slot_occupancy);
    row["reduction_percent"] = nullptr;
    table.rows.push_back(std::move(row));
  }
  fs::remove_all(scratch);
  // The baseline is measured first, so every row can be compared.
  for (auto& row : table.rows) {
    row["reduction_percent"] = 100.0 * (1.0 - row["wall_clock_seconds"].get<double>() / *baseline);
    spdlog::info("k={}: {:.3f}s, {:.1f}% reduction", row["num_processes"].get<std::size_t>(),
                 row["wall_clock_seconds"].get<double>(), row["reduction_percent"].get<double>());
  }
  emit(g, format, table);
  return 0;
}

void add_train_flags(CLI::App* cmd, TrainOptions& t, bool arch_required) {
  auto* arch = cmd->add_option("--arch", t.arch, "Hidden layers, e.g. \"dense:16,8 dropout:0.1\"");
  if (arch_required) arch->required();
  cmd->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size, "Minibatch size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr", t.learning_rate, "SGD learning rate")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

void add_quantifier_flags(CLI::App* cmd, PredictOptionsCli& p) {
  cmd->add_option("--quantifier,-q", p.quantifiers, "Quantifier alias; repeat for several")
      ->required()
      ->take_all()
      ->allow_extra_args(false);
  cmd->add_option("--num-samples", p.num_samples, "Samples per input for sampling-based quantifiers")
      ->capture_default_str();
  cmd->add_option("--batch-size", p.batch_size, "Rows per forward pass")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--num-processes", p.num_processes, "Worker processes for ensembles")
      ->capture_default_str();
  cmd->add_option("--format", p.format, "Report format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
}

int run(int argc, char** argv) {
  CLI::App app{"Uncertainty quantification for small neural networks and lazy ensembles", "uqwiz"};
  app.set_version_flag("--version", "uqwiz 0.1.0");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for data, initialization, training and sampling");
  app.add_option("--model", g.model, "Model file or ensemble directory");
  app.add_option("--dataset", g.dataset, "CSV path or blobs:<N>,<C>,<spread>");
  app.add_option("--output", g.output, "Report destination (default stdout)");

  TrainOptions train;
  EnsembleOptions ens;
  PredictOptionsCli pred;
  BenchOptions bench;

  auto* ts = app.add_subcommand("train-stochastic", "Train one MC-Dropout model and save it");
  add_train_flags(ts, train, true);

  auto* te = app.add_subcommand("train-ensemble", "Train a lazy Deep Ensemble into a directory");
  add_train_flags(te, train, true);
  te->add_option("--num-models", ens.num_models, "Atomic models")->capture_default_str();
  te->add_option("--num-processes", ens.num_processes, "Worker processes (0 = main process)")
      ->capture_default_str();
  te->add_option("--context", ens.context, "none, dynamic_growth or device_allocator:<id>=<cap>,...");
  te->add_option("--model-dir", ens.model_dir, "Ensemble directory")->required();

  auto* pr = app.add_subcommand("predict", "Quantified predictions for every dataset row");
  add_quantifier_flags(pr, pred);
  pr->add_option("--as-confidence", pred.as_confidence, "Report scores as confidences (true/false)");

  auto* ev = app.add_subcommand("evaluate", "AUROC of scores as misprediction detectors");
  add_quantifier_flags(ev, pred);

  auto* bm = app.add_subcommand("benchmark", "Time ensemble creation per process count");
  train.arch = "dense:16";
  add_train_flags(bm, train, false);
  bm->add_option("--num-models", bench.num_models, "Atomic models")->capture_default_str();
  bm->add_option("--processes-list", bench.processes_list, "Comma-separated process counts")
      ->capture_default_str();
  bm->add_option("--context", bench.context, "Context for k > 0 runs");
  bm->add_option("--format", pred.format, "Report format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (ts->parsed()) return train_stochastic(g, train);
    if (te->parsed()) return train_ensemble(g, train, ens);
    if (pr->parsed()) return predict(g, pred);
    if (ev->parsed()) return evaluate(g, pred);
    return benchmark(g, train, bench, pred.format);
  } catch (const UsageError& e) {
    std::cerr << "uqwiz: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const UnknownQuantifierError& e) {
    std::cerr << "uqwiz: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InsufficientSamplesError& e) {
    std::cerr << "uqwiz: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContextError& e) {
    std::cerr << "uqwiz: " << e.what() << '\n';
    return kExitUsage;
  } catch (const TaskFailure& e) {
    std::cerr << "uqwiz: " << e.what() << '\n';
    for (const auto& [id, message] : e.failures()) std::cerr << "  model " << id << ": " << message << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "uqwiz: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace
}  // namespace uqwiz::cli

int main(int argc, char** argv) {
  uqwiz::cli::configure_logging();
  return uqwiz::cli::run(argc, argv);
}
