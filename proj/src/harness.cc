//
// Copyright 2026 The PCQR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "pcqr/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

#include "pcqr/engine.h"
#include "pcqr/errors.h"
#include "pcqr/relabel.h"
#include "pcqr/semiprivate.h"

namespace pcqr {
namespace {

nlohmann::json OptionalJson(const std::optional<std::size_t>& v) {
  return v.has_value() ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

void AppendLine(std::string* out, const nlohmann::json& j) {
  out->append(j.dump());
  out->push_back('\n');
}

double MismatchRate(std::span<const AnswerRecord> answers,
                    const LabeledDataset& v, std::size_t from = 0) {
  if (answers.size() <= from) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t j = from; j < answers.size(); ++j) {
    wrong += answers[j].label != v[j].y;
  }
  return static_cast<double>(wrong) / static_cast<double>(answers.size() - from);
}

// Linear interpolation between order statistics of sorted data.
double Quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void AppendQueryTrace(std::string* trace, std::size_t trial,
                      std::span<const AnswerRecord> answers,
                      const LabeledDataset& v) {
  for (const AnswerRecord& r : answers) {
    AppendLine(trace, {{"trial", trial},
                       {"j", r.index},
                       {"x", r.query},
                       {"y_true", ToInt(v[r.index].y)},
                       {"y_priv", ToInt(r.label)},
                       {"stable", r.stable},
                       {"post_halt", r.post_halt},
                       {"c", r.counter},
                       {"dist", OptionalJson(r.dist)}});
  }
}

}  // namespace

LabeledDataset GenSynthetic(const SyntheticDistribution& d, std::size_t n,
                            RandomSource& rng) {
  d.Validate();
  LabeledDataset s;
  s.items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Feature x = d.marginal.Sample(rng);
    Label y = d.truth(x);
    if (d.noise_rate > 0.0 && rng.Bernoulli(d.noise_rate)) y = Flip(y);
    s.items.push_back({x, y});
  }
  return s;
}

nlohmann::json TrialResult::ToJson() const {
  nlohmann::json j{{"trial", trial},
                   {"seed", seed},
                   {"mode", ModeName(mode)},
                   {"avg_error", avg_error},
                   {"excess", excess},
                   {"unstable_count", unstable_count},
                   {"halted_at", OptionalJson(halted_at)},
                   {"parameters", parameters}};
  j["tail_error"] = tail_error.has_value() ? nlohmann::json(*tail_error)
                                           : nlohmann::json(nullptr);
  return j;
}

bool operator==(const TrialResult& a, const TrialResult& b) {
  return std::tie(a.trial, a.seed, a.mode, a.avg_error, a.excess,
                  a.unstable_count, a.halted_at, a.tail_error, a.parameters) ==
         std::tie(b.trial, b.seed, b.mode, b.avg_error, b.excess,
                  b.unstable_count, b.halted_at, b.tail_error, b.parameters);
}

TrialResult RunTrial(const ExperimentConfig& config, std::size_t trial,
                     std::string* trace, const TraceOptions& trace_options) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const RandomSource root = RandomSource(config.seed).Child("trial", trial);
  RandomSource data_rng = root.Child("data");
  RandomSource query_rng = root.Child("queries");
  const RandomSource algorithm_rng = root.Child("algorithm");

  const SyntheticDistribution& d = config.distribution;
  const LabeledDataset s = GenSynthetic(d, config.n, data_rng);
  // Hidden labels stay in `v`; algorithms receive `queries` only.
  const LabeledDataset v = GenSynthetic(d, config.m, query_rng);
  const std::vector<Feature> queries = v.Unlabeled().points;

  std::vector<nlohmann::json> noise_lines;
  PcqrOptions options;
  options.scale_factor = config.scale_factor;
  if (trace != nullptr && trace_options.noise) {
    options.noise_log = [&noise_lines, trial](std::string_view stage,
                                              double scale, double value) {
      noise_lines.push_back({{"event", "noise"},
                             {"trial", trial},
                             {"stage", std::string(stage)},
                             {"scale", scale},
                             {"value", value}});
    };
  }
  const Learner learner = ErmLearner(config.family);

  TrialResult result;
  result.trial = trial;
  result.seed = root.seed();
  result.mode = config.mode;
  nlohmann::json summary{{"event", "summary"},
                         {"trial", trial},
                         {"mode", ModeName(config.mode)},
                         {"n", config.n},
                         {"m", config.m},
                         {"scale_factor", config.scale_factor}};
  std::span<const AnswerRecord> answers;
  PcqrRun pcqr_run;
  SubSampRun subsamp_run;
  UniversalRun universal_run;

  auto describe_engine = [&](const SubSampParams& p, std::size_t unstable,
                             std::optional<std::size_t> halted_at) {
    summary["T"] = p.cutoff;
    summary["lambda"] = p.lambda;
    summary["k"] = p.k;
    summary["w"] = p.w;
    summary["halted_at"] = OptionalJson(halted_at);
    summary["unstable_count"] = unstable;
    result.unstable_count = unstable;
    result.halted_at = halted_at;
    result.parameters["subsamp"] = p.ToJson();
  };

  switch (config.mode) {
    case Mode::kSubSamp: {
      const std::size_t cutoff = Cutoff(config.accuracy, config.m);
      const SubSampParams p = DeriveSubSampParams(
          cutoff, config.budget, config.accuracy.beta, config.m,
          config.scale_factor);
      if (config.n < p.k) {
        throw InfeasibleParameters("n=" + std::to_string(config.n) + " < k=" +
                                       std::to_string(p.k),
                                   p.k);
      }
      subsamp_run = RunSubSamp(s, queries, learner, cutoff, config.budget,
                               config.accuracy.beta, algorithm_rng,
                               config.scale_factor, options.noise_log);
      answers = subsamp_run.answers;
      summary["n_prime"] = config.n;
      describe_engine(subsamp_run.params, subsamp_run.unstable_count,
                      subsamp_run.halted_at);
      result.parameters["block_size"] = subsamp_run.block_size;
      break;
    }
    case Mode::kAgnostic: {
      pcqr_run = RunAgnosticPcqr(s, queries, config.family, learner,
                                 config.budget, config.accuracy, algorithm_rng,
                                 options);
      answers = pcqr_run.answers;
      summary["n_prime"] = pcqr_run.agnostic.n_prime;
      describe_engine(pcqr_run.subsamp, pcqr_run.unstable_count,
                      pcqr_run.halted_at);
      result.parameters["agnostic"] = pcqr_run.agnostic.ToJson();
      result.parameters["block_size"] = pcqr_run.block_size;
      result.parameters["relabel_cover_size"] = pcqr_run.cover_size;
      result.parameters["relabel_choice"] = pcqr_run.relabel_choice.ToJson();
      break;
    }
    case Mode::kUniversal: {
      universal_run = RunUniversal(s, queries, config.family, learner,
                                   config.budget, config.accuracy,
                                   algorithm_rng, options);
      answers = universal_run.answers;
      const PcqrRun& first = universal_run.first_phase;
      summary["n_prime"] = first.agnostic.n_prime;
      describe_engine(first.subsamp, first.unstable_count, first.halted_at);
      summary["m_o"] = universal_run.m_o;
      summary["phase_switch_index"] = universal_run.phase_switch_index;
      result.parameters["agnostic"] = first.agnostic.ToJson();
      result.parameters["block_size"] = first.block_size;
      result.parameters["m_o"] = universal_run.m_o;
      if (universal_run.learner.has_value()) {
        summary["cover_size"] = universal_run.learner->cover_size;
        summary["h_priv"] = universal_run.learner->h_priv.ToJson();
        result.parameters["h_priv"] = universal_run.learner->h_priv.ToJson();
        result.parameters["cover_size"] = universal_run.learner->cover_size;
        result.tail_error =
            MismatchRate(answers, v, universal_run.phase_switch_index);
      }
      break;
    }
    case Mode::kRelabelOnly: {
      RandomSource relabel_rng = algorithm_rng.Child("relabel");
      const RelabelResult r = Relabel(s, config.family, relabel_rng);
      const Hypothesis erm = Erm(config.family, s);
      result.avg_error = ExpectedError(r.chosen, d);
      result.excess = result.avg_error - ExpectedError(erm, d);
      result.parameters["cover_size"] = r.cover_size;
      result.parameters["chosen"] = r.chosen.ToJson();
      result.parameters["erm"] = erm.ToJson();
      result.parameters["chosen_input_error"] = r.chosen_input_error;
      summary["cover_size"] = r.cover_size;
      summary["chosen"] = r.chosen.ToJson();
      summary["avg_error"] = result.avg_error;
      summary["relabel_excess"] = result.excess;
      break;
    }
  }

  if (config.mode != Mode::kRelabelOnly) {
    result.avg_error = MismatchRate(answers, v);
    result.excess = result.avg_error - d.noise_rate;
    summary["avg_error"] = result.avg_error;
    if (result.tail_error.has_value()) summary["tail_error"] = *result.tail_error;
  }

  if (trace != nullptr) {
    for (const auto& line : noise_lines) AppendLine(trace, line);
    if (trace_options.queries) AppendQueryTrace(trace, trial, answers, v);
    AppendLine(trace, summary);
  }
  result.elapsed_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
  return result;
}

std::size_t ThreadsFromEnvironment() {
  if (const char* env = std::getenv("PCQR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialResult> RunTrials(const ExperimentConfig& config,
                                   std::size_t threads, std::string* traces,
                                   const TraceOptions& trace_options) {
  config.Validate();
  std::vector<TrialResult> results(config.trials);
  std::vector<std::string> trial_traces(traces != nullptr ? config.trials : 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= config.trials) return;
      try {
        results[t] = RunTrial(config, t,
                              traces != nullptr ? &trial_traces[t] : nullptr,
                              trace_options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.trials;
        return;
      }
    }
  };

  const std::size_t pool = std::clamp<std::size_t>(threads, 1, config.trials);
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < pool; ++i) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (traces != nullptr) {
    for (const auto& t : trial_traces) traces->append(t);
  }
  return results;
}

nlohmann::json SummaryStats::ToJson() const {
  return {{"trials", trials},
          {"mean_error", mean_error},
          {"mean_excess", mean_excess},
          {"median_excess", median_excess},
          {"q10_excess", q10_excess},
          {"q90_excess", q90_excess},
          {"fraction_within_alpha", fraction_within_alpha},
          {"min_unstable", min_unstable},
          {"median_unstable", median_unstable},
          {"max_unstable", max_unstable},
          {"halted_trials", halted_trials}};
}

SummaryStats Summarize(std::span<const TrialResult> results, double alpha) {
  SummaryStats s;
  s.trials = results.size();
  if (results.empty()) return s;
  std::vector<double> errors, excess, unstable;
  std::size_t within = 0;
  for (const TrialResult& r : results) {
    errors.push_back(r.avg_error);
    excess.push_back(r.excess);
    unstable.push_back(static_cast<double>(r.unstable_count));
    within += r.excess <= alpha;
    s.halted_trials += r.halted_at.has_value();
  }
  std::sort(errors.begin(), errors.end());
  std::sort(excess.begin(), excess.end());
  std::sort(unstable.begin(), unstable.end());
  const double count = static_cast<double>(results.size());
  s.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / count;
  s.mean_excess = std::accumulate(excess.begin(), excess.end(), 0.0) / count;
  s.median_excess = Quantile(excess, 0.5);
  s.q10_excess = Quantile(excess, 0.1);
  s.q90_excess = Quantile(excess, 0.9);
  s.fraction_within_alpha = static_cast<double>(within) / count;
  s.min_unstable = static_cast<std::size_t>(unstable.front());
  s.median_unstable = Quantile(unstable, 0.5);
  s.max_unstable = static_cast<std::size_t>(unstable.back());
  return s;
}

nlohmann::json RunManifest(const ExperimentConfig& config,
                           std::span<const TrialResult> results) {
  nlohmann::json manifest{{"schema_version", config.schema_version},
                          {"seed", config.seed},
                          {"trials", config.trials},
                          {"config", config.ToJson()},
                          {"scale_factor", config.scale_factor},
                          {"canonical", config.scale_factor == 1.0}};
  if (!results.empty() && results.front().parameters.contains("subsamp")) {
    const auto& p = results.front().parameters["subsamp"];
    manifest["canonical_constants"] = {{"lambda", p["canonical_lambda"]},
                                       {"k", p["canonical_k"]},
                                       {"w", p["canonical_w"]}};
    manifest["scaled_constants"] = {
        {"lambda", p["lambda"]}, {"k", p["k"]}, {"w", p["w"]}};
  }
  return manifest;
}

void WriteTrialCsv(std::span<const TrialResult> results, std::ostream& out) {
  out << "trial,seed,mode,avg_error,excess,unstable_count,halted_at,"
         "tail_error,elapsed_seconds\n";
  for (const TrialResult& r : results) {
    out << r.trial << ',' << r.seed << ',' << ModeName(r.mode) << ','
        << FormatDouble(r.avg_error) << ',' << FormatDouble(r.excess) << ','
        << r.unstable_count << ','
        << (r.halted_at ? std::to_string(*r.halted_at) : "") << ','
        << (r.tail_error ? FormatDouble(*r.tail_error) : "") << ','
        << r.elapsed_seconds << '\n';
  }
}

std::vector<ExperimentConfig> SweepGrid::Cells() const {
  const std::vector<std::size_t> ns = n.empty() ? std::vector{base.n} : n;
  const std::vector<std::size_t> ms = m.empty() ? std::vector{base.m} : m;
  const std::vector<double> alphas =
      alpha.empty() ? std::vector{base.accuracy.alpha} : alpha;
  const std::vector<double> gammas =
      gamma.empty() ? std::vector{base.distribution.noise_rate} : gamma;
  std::vector<ExperimentConfig> cells;
  for (double g : gammas) {
    for (double a : alphas) {
      for (std::size_t mm : ms) {
        for (std::size_t nn : ns) {
          ExperimentConfig c = base;
          c.n = nn;
          c.m = mm;
          c.accuracy.alpha = a;
          c.distribution.noise_rate = g;
          cells.push_back(std::move(c));
        }
      }
    }
  }
  return cells;
}

SweepGrid SweepGrid::FromJson(const nlohmann::json& j) {
  SweepGrid grid;
  grid.base = ExperimentConfig::FromJson(j.at("base"));
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    for (const auto& [key, value] : g.items()) {
      if (key == "n") {
        grid.n = value.get<std::vector<std::size_t>>();
      } else if (key == "m") {
        grid.m = value.get<std::vector<std::size_t>>();
      } else if (key == "alpha") {
        grid.alpha = value.get<std::vector<double>>();
      } else if (key == "gamma") {
        grid.gamma = value.get<std::vector<double>>();
      } else {
        throw InvalidArgument("unknown grid axis '" + key + "'");
      }
    }
  }
  return grid;
}

nlohmann::json MonotonicityReport::ToJson() const {
  return {{"groups", groups}, {"inversions", inversions}};
}

SweepReport RunSweep(const SweepGrid& grid, std::size_t threads) {
  SweepReport report;
  for (ExperimentConfig& config : grid.Cells()) {
    SweepCell cell;
    cell.config = config;
    try {
      const std::vector<TrialResult> results = RunTrials(config, threads);
      cell.stats = Summarize(results, config.accuracy.alpha);
    } catch (const InfeasibleParameters& e) {
      cell.error = e.what();
      cell.required_n = e.required_n();
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    report.cells.push_back(std::move(cell));
  }
  report.monotonicity = CheckMonotonicityInN(report.cells);
  return report;
}

MonotonicityReport CheckMonotonicityInN(std::span<const SweepCell> cells) {
  std::map<std::tuple<std::size_t, double, double>,
           std::vector<std::pair<std::size_t, double>>>
      groups;
  for (const SweepCell& c : cells) {
    if (!c.stats.has_value()) continue;
    groups[{c.config.m, c.config.accuracy.alpha, c.config.distribution.noise_rate}]
        .push_back({c.config.n, c.stats->median_excess});
  }
  MonotonicityReport report;
  report.groups = groups.size();
  for (auto& [key, points] : groups) {
    std::sort(points.begin(), points.end());
    for (std::size_t i = 1; i < points.size(); ++i) {
      report.inversions += points[i].second > points[i - 1].second;
    }
  }
  return report;
}

void WriteSweepCsv(std::span<const SweepCell> cells, std::ostream& out) {
  out << "n,m,alpha,gamma,trials,mean_error,mean_excess,median_excess,"
         "q10_excess,q90_excess,fraction_within_alpha,min_unstable,"
         "median_unstable,max_unstable,halted_trials,error,required_n\n";
  for (const SweepCell& c : cells) {
    out << c.config.n << ',' << c.config.m << ','
        << FormatDouble(c.config.accuracy.alpha) << ','
        << FormatDouble(c.config.distribution.noise_rate) << ',';
    if (c.stats.has_value()) {
      const SummaryStats& s = *c.stats;
      out << s.trials << ',' << FormatDouble(s.mean_error) << ','
          << FormatDouble(s.mean_excess) << ',' << FormatDouble(s.median_excess)
          << ',' << FormatDouble(s.q10_excess) << ','
          << FormatDouble(s.q90_excess) << ','
          << FormatDouble(s.fraction_within_alpha) << ',' << s.min_unstable
          << ',' << FormatDouble(s.median_unstable) << ',' << s.max_unstable
          << ',' << s.halted_trials << ",,";
    } else {
      std::string error = c.error;
      std::replace(error.begin(), error.end(), ',', ';');
      out << ",,,,,,,,,,," << '"' << error << '"' << ',';
    }
    out << (c.required_n > 0 ? std::to_string(c.required_n) : "") << '\n';
  }
}

}  // namespace pcqr
