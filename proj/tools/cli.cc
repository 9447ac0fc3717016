// Copyright 2026 The bfce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bfce/error.h"
#include "bfce/estimator.h"
#include "bfce/fpp.h"
#include "bfce/sim.h"
#include "bfce/sizing.h"

namespace bfce::cli {
namespace {

constexpr uint64_t kDefaultM = 162945;
constexpr uint32_t kDefaultK = 6;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { kCsv, kJsonLines };

struct SharedFlags {
  uint64_t seed = 0;
  std::string out_path;
  Format format = Format::kCsv;
};

// A flat record emitted either as a CSV header+row or as one JSON object.
// Values are pre-formatted for CSV and typed for JSON.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  class Row {
   public:
    Row& Str(const std::string& v) {
      csv_.push_back(v);
      json_.push_back(v);
      return *this;
    }
    Row& Int(uint64_t v) {
      csv_.push_back(std::to_string(v));
      json_.push_back(v);
      return *this;
    }
    Row& Real(double v) {
      csv_.push_back(FormatDouble(v));
      json_.push_back(v);
      return *this;
    }
    // Missing value: empty CSV field, JSON null.
    Row& None() {
      csv_.emplace_back();
      json_.push_back(nullptr);
      return *this;
    }

   private:
    friend class Table;
    std::vector<std::string> csv_;
    nlohmann::json json_ = nlohmann::json::array();
  };

  Row& AddRow() { return rows_.emplace_back(); }

  void Write(std::ostream& out, Format format) const {
    if (format == Format::kCsv) {
      for (size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
      out << '\n';
      for (const auto& row : rows_) {
        for (size_t i = 0; i < row.csv_.size(); ++i) out << (i ? "," : "") << row.csv_[i];
        out << '\n';
      }
      return;
    }
    for (const auto& row : rows_) {
      nlohmann::ordered_json obj;
      for (size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = row.json_[i];
      out << obj.dump() << '\n';
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<Row> rows_;
};

unsigned ThreadsFromEnv() {
  const char* raw = std::getenv("BFCE_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1) {
    throw UsageError("BFCE_THREADS must be a positive integer");
  }
  return static_cast<unsigned>(v);
}

Table MetricsTable(const TrialMetrics& metrics) {
  Table t({"estimator", "s", "trials", "mbe", "mbe_std", "mae", "mae_std", "rmse",
           "mean_true_n", "std_true_n", "predicted_std", "mean_stream_len"});
  for (const auto& row : metrics.rows) {
    auto emit = [&](const char* name, const ErrorStats& e) {
      t.AddRow()
          .Str(name)
          .Int(row.s)
          .Int(row.trials)
          .Real(e.mbe)
          .Real(e.mbe_std)
          .Real(e.mae)
          .Real(e.mae_std)
          .Real(e.rmse)
          .Real(row.mean_true_n)
          .Real(row.std_true_n)
          .Real(row.predicted_std)
          .Real(row.mean_stream_len);
    };
    emit("corrected", row.corrected);
    emit("papapetrou", row.papapetrou);
  }
  return t;
}

// --- size -----------------------------------------------------------------

struct SizeFlags {
  uint64_t s_max = 0;
  std::optional<double> fpp;
  std::optional<double> budget;
  std::optional<uint64_t> m;
};

Table RunSize(const SizeFlags& f) {
  const int targets = f.fpp.has_value() + f.budget.has_value() + f.m.has_value();
  if (targets != 1) {
    throw UsageError("size needs exactly one of --fpp, --error-budget, --m");
  }
  FilterSize size{};
  if (f.fpp) {
    size = ClassicalSize(f.s_max, *f.fpp);
  } else if (f.budget) {
    size = SizeForErrorBudget(f.s_max, *f.budget);
  } else {
    size = {*f.m, KOptCumulative(*f.m, f.s_max)};
  }
  Table t({"m", "k", "t_smax", "expected_error", "upper_bound"});
  t.AddRow()
      .Int(size.m)
      .Int(size.k)
      .Real(ApproxFpp(size.m, size.k, f.s_max))
      .Real(CumulativeCountingError(size.m, size.k, f.s_max - 1))
      .Real(MeanErrorUpperBound(size.m, size.k, f.s_max));
  return t;
}

// --- fpp ------------------------------------------------------------------

struct FppFlags {
  uint64_t m = 0;
  uint32_t k = 0;
  std::optional<uint64_t> n;
  std::optional<uint64_t> ones;
  std::string model = "approximate";
};

Table RunFpp(const FppFlags& f) {
  Table t({"model", "m", "k", "n", "ones", "fpp"});
  auto& row = t.AddRow().Str(f.model).Int(f.m).Int(f.k);
  if (f.model == "fill-ratio") {
    if (!f.ones || f.n) throw UsageError("fill-ratio model takes --ones (and not --n)");
    if (*f.ones > f.m) throw UsageError("--ones cannot exceed --m");
    const FppModel model(FppVariant::kFillRatio, f.m, f.k);
    row.None().Int(*f.ones).Real(model.At({f.m, f.k, 0, *f.ones}));
    return t;
  }
  if (!f.n || f.ones) throw UsageError(f.model + " model takes --n (and not --ones)");
  const double p = f.model == "exact" ? ExactFpp(f.m, f.k, *f.n) : ApproxFpp(f.m, f.k, *f.n);
  row.Int(*f.n).None().Real(p);
  return t;
}

// --- estimate -------------------------------------------------------------

struct EstimateFlags {
  uint64_t m = kDefaultM;
  uint32_t k = kDefaultK;
  uint64_t batch_first = 0;
  std::string in_path;
  std::string state_in;
  std::string state_out;
};

std::string ReadFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Table RunEstimate(const EstimateFlags& f, const SharedFlags& shared, std::istream& stdin_stream) {
  std::optional<CardinalityCounter> counter;
  if (!f.state_in.empty()) {
    counter.emplace(CardinalityCounter::Deserialize(ReadFile(f.state_in)));
  } else {
    counter.emplace(f.m, f.k, shared.seed);
  }

  std::ifstream file;
  std::istream* in = &stdin_stream;
  if (!f.in_path.empty()) {
    file.open(f.in_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + f.in_path);
    in = &file;
  }

  std::string token;
  if (f.batch_first > 0) {
    std::vector<std::string> batch;
    std::unordered_set<std::string> seen;
    while (batch.size() < f.batch_first && std::getline(*in, token)) {
      if (token.empty()) continue;
      if (seen.insert(token).second) batch.push_back(token);
    }
    counter->AddBatchInitial(batch);
  }
  while (std::getline(*in, token)) {
    if (token.empty()) continue;
    counter->Add(token);
  }
  if (in->bad()) throw std::runtime_error("read error on input");

  if (!f.state_out.empty()) {
    std::ofstream out(f.state_out, std::ios::binary | std::ios::trunc);
    const std::string bytes = counter->Serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + f.state_out);
  }

  const CardinalityEstimate est = counter->Estimate();
  Table t({"s", "corrected_mean", "corrected_std", "swamidass", "papapetrou"});
  auto& row = t.AddRow().Int(est.counter).Real(est.mean).Real(*est.std_dev);
  const auto& filter = counter->filter();
  if (filter.ones() == filter.m()) {
    // Both baselines diverge on a saturated filter.
    row.Str("inf").Str("inf");
  } else {
    row.Real(counter->Swamidass().mean).Real(counter->Papapetrou().mean);
  }
  return t;
}

// --- simulate / batch-sim / overload -------------------------------------

struct SimulateFlags {
  uint64_t m = kDefaultM;
  uint32_t k = kDefaultK;
  uint64_t trials = 1000;
  double p_smax = 1.0;
  uint64_t stop_s = 17000;
  std::optional<uint64_t> s_max;
  std::vector<uint64_t> checkpoints;
  uint64_t checkpoint_step = 500;
  std::string fpp_model = "approximate";
};

FppVariant ParseVariant(const std::string& name) {
  if (name == "approximate") return FppVariant::kApproximate;
  if (name == "exact") return FppVariant::kExact;
  return FppVariant::kFillRatio;
}

Table RunSimulate(const SimulateFlags& f, const SharedFlags& shared, unsigned threads) {
  TrialConfig config;
  config.m = f.m;
  config.k = f.k;
  config.universe = {f.s_max.value_or(f.stop_s), f.p_smax};
  config.checkpoints = f.checkpoints.empty() ? DefaultCheckpoints(f.stop_s, f.checkpoint_step)
                                             : f.checkpoints;
  config.stop_s = f.stop_s;
  config.variant = ParseVariant(f.fpp_model);
  config.Validate();
  return MetricsTable(RunExperiment(config, f.trials, shared.seed, threads));
}

struct BatchFlags {
  uint64_t m = kDefaultM;
  uint32_t k = kDefaultK;
  uint64_t b = 50;
  uint64_t trials = 100;
  uint64_t stop_s = 16970;
};

Table RunBatchSim(const BatchFlags& f, const SharedFlags& shared, unsigned threads) {
  const BatchResult r = RunBatchExperiment(f.m, f.k, f.b, f.trials, f.stop_s, shared.seed, threads);
  Table t({"arm", "b", "trials", "s", "mean_error", "error_std", "predicted_error"});
  t.AddRow()
      .Str("batch")
      .Int(r.b)
      .Int(r.trials)
      .Int(r.stop_s)
      .Real(r.batch_mean_error)
      .Real(r.batch_error_std)
      .Real(r.batch_predicted);
  t.AddRow()
      .Str("one-by-one")
      .Int(r.b)
      .Int(r.trials)
      .Int(r.stop_s)
      .Real(r.one_by_one_mean_error)
      .Real(r.one_by_one_error_std)
      .Real(r.one_by_one_predicted);
  return t;
}

struct OverloadFlags {
  uint64_t m = kDefaultM;
  uint32_t k = kDefaultK;
  uint64_t trials = 1000;
  uint64_t max_s = 30000;
  uint64_t step = 500;
};

Table RunOverload(const OverloadFlags& f, const SharedFlags& shared, unsigned threads) {
  return MetricsTable(
      OverloadSweep(f.m, f.k, f.trials, DefaultCheckpoints(f.max_s, f.step), shared.seed, threads));
}

}  // namespace

int Run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Bloom filter cardinality estimation with in-stream counting-error correction",
               "bfce"};
  app.require_subcommand(1);
  app.fallthrough();

  SharedFlags shared;
  std::string format = "csv";
  app.add_option("--seed", shared.seed, "64-bit seed for hashing and streams");
  app.add_option("--out", shared.out_path, "Output path (default: stdout)");
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json-lines"}));

  SizeFlags size;
  auto* size_cmd = app.add_subcommand("size", "Choose filter parameters");
  size_cmd->add_option("--smax", size.s_max, "Capacity in distinct elements")
      ->required()
      ->check(CLI::PositiveNumber);
  size_cmd->add_option("--fpp", size.fpp, "Target false-positive probability at s_max")
      ->check(CLI::Range(0.0, 1.0));
  size_cmd->add_option("--error-budget", size.budget, "Target mean counting error at s_max")
      ->check(CLI::PositiveNumber);
  size_cmd->add_option("--m", size.m, "Fixed filter size; k from the counting-error optimum")
      ->check(CLI::PositiveNumber);

  FppFlags fpp;
  auto* fpp_cmd = app.add_subcommand("fpp", "False-positive probability");
  fpp_cmd->add_option("--m", fpp.m, "Filter size in bits")->required()->check(CLI::PositiveNumber);
  fpp_cmd->add_option("--k", fpp.k, "Number of hash functions")->required()->check(CLI::PositiveNumber);
  fpp_cmd->add_option("--n", fpp.n, "Number of inserted elements");
  fpp_cmd->add_option("--ones", fpp.ones, "Number of set bits (fill-ratio model)");
  fpp_cmd->add_option("--model", fpp.model, "approximate | exact | fill-ratio")
      ->check(CLI::IsMember({"approximate", "exact", "fill-ratio"}));

  EstimateFlags est;
  auto* est_cmd = app.add_subcommand("estimate", "Count distinct newline-delimited tokens");
  est_cmd->add_option("--m", est.m, "Filter size in bits")->check(CLI::PositiveNumber);
  est_cmd->add_option("--k", est.k, "Number of hash functions")->check(CLI::PositiveNumber);
  est_cmd->add_option("--batch-first", est.batch_first,
                      "Buffer the first N distinct tokens and insert them at once");
  est_cmd->add_option("--in", est.in_path, "Input file (default: stdin)");
  est_cmd->add_option("--state-in", est.state_in, "Resume from a saved filter state");
  est_cmd->add_option("--state-out", est.state_out, "Save the filter state after the run");

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo accuracy experiment");
  sim_cmd->add_option("--m", sim.m, "Filter size in bits")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--k", sim.k, "Number of hash functions")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--trials", sim.trials, "Number of filters");
  sim_cmd->add_option("--p-smax", sim.p_smax, "1 for distinct streams, else (0, 1)");
  sim_cmd->add_option("--stop-s", sim.stop_s, "Filling state at which each trial stops")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--smax", sim.s_max, "Universe sizing capacity (default: --stop-s)")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--checkpoints", sim.checkpoints, "Comma-separated filling states")
      ->delimiter(',');
  sim_cmd->add_option("--checkpoint-step", sim.checkpoint_step,
                      "Spacing of default checkpoints")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--fpp-model", sim.fpp_model, "Accumulator model")
      ->check(CLI::IsMember({"approximate", "exact", "fill-ratio"}));

  BatchFlags batch;
  auto* batch_cmd = app.add_subcommand("batch-sim", "Batch-start versus one-by-one filling");
  batch_cmd->add_option("--m", batch.m, "Filter size in bits")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--k", batch.k, "Number of hash functions")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--b", batch.b, "Batch size");
  batch_cmd->add_option("--trials", batch.trials, "Number of paired trials");
  batch_cmd->add_option("--stop-s", batch.stop_s, "Filling state to compare at")
      ->check(CLI::PositiveNumber);

  OverloadFlags overload;
  auto* overload_cmd = app.add_subcommand("overload", "Accuracy past the design capacity");
  overload_cmd->add_option("--m", overload.m, "Filter size in bits")->check(CLI::PositiveNumber);
  overload_cmd->add_option("--k", overload.k, "Number of hash functions")->check(CLI::PositiveNumber);
  overload_cmd->add_option("--trials", overload.trials, "Number of filters");
  overload_cmd->add_option("--max-s", overload.max_s, "Largest filling state")
      ->check(CLI::PositiveNumber);
  overload_cmd->add_option("--step", overload.step, "Checkpoint spacing")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  shared.format = format == "json-lines" ? Format::kJsonLines : Format::kCsv;

  try {
    const unsigned threads = ThreadsFromEnv();
    if (*sim_cmd && !(sim.p_smax > 0.0 && sim.p_smax <= 1.0)) {
      throw UsageError("--p-smax must lie in (0, 1]; 0 would require the whole universe");
    }
    if (*sim_cmd && sim.trials < 2) throw UsageError("--trials must be >= 2");
    if ((*batch_cmd && batch.trials < 1) || (*overload_cmd && overload.trials < 2)) {
      throw UsageError("--trials too small");
    }

    Table table({});
    if (*size_cmd) {
      table = RunSize(size);
    } else if (*fpp_cmd) {
      table = RunFpp(fpp);
    } else if (*est_cmd) {
      table = RunEstimate(est, shared, in);
    } else if (*sim_cmd) {
      table = RunSimulate(sim, shared, threads);
    } else if (*batch_cmd) {
      table = RunBatchSim(batch, shared, threads);
    } else {
      table = RunOverload(overload, shared, threads);
    }

    if (shared.out_path.empty()) {
      table.Write(out, shared.format);
    } else {
      std::ofstream file(shared.out_path, std::ios::binary | std::ios::trunc);
      table.Write(file, shared.format);
      if (!file) throw std::runtime_error("cannot write " + shared.out_path);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidParameters ? kExitUsage : kExitRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace bfce::cli
