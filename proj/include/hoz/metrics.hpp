#pragma once

#include "hoz/simulator.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Episode metrics
// ---------------------------------------------------------------------------

struct MetricsReport {
  double sr = 0.0;
  double spl = 0.0;
  double sae = 0.0;
  int n_episodes = 0;
  std::string subset = "all";  // "all" or "L>=5"
};

/// Fraction of episodes that ended in success.
inline double compute_sr(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw Error("metrics: no episodes");
  double sum = 0.0;
  for (const auto& r : records) sum += r.success ? 1.0 : 0.0;
  return sum / static_cast<double>(records.size());
}

/// Success weighted by path optimality: L* / max(L, L*), summed over
/// successes and averaged over all episodes. L counts position-changing
/// forward moves; L* comes from the shortest-path oracle.
inline double compute_spl(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw Error("metrics: no episodes");
  double sum = 0.0;
  for (const auto& r : records) {
    if (!r.optimal_length.has_value())
      throw Error("metrics: episode " + r.env_id + " is missing its optimal length");
    if (!r.success) continue;
    double opt = static_cast<double>(*r.optimal_length);
    double act = static_cast<double>(r.actual_length);
    double denom = std::max(act, opt);
    sum += denom == 0.0 ? 1.0 : opt / denom;  // spawned at the goal
  }
  return sum / static_cast<double>(records.size());
}

/// Success weighted by action efficiency: the fraction of the action list
/// that is MoveAhead (blocked or not), summed over successes.
inline double compute_sae(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw Error("metrics: no episodes");
  double sum = 0.0;
  for (const auto& r : records) {
    if (!r.success) continue;
    if (r.actions.empty())
      throw Error("metrics: successful episode " + r.env_id + " has no actions");
    int moves = 0;
    for (Action a : r.actions)
      if (a == Action::MoveAhead) ++moves;
    sum += static_cast<double>(moves) / static_cast<double>(r.actions.size());
  }
  return sum / static_cast<double>(records.size());
}

inline MetricsReport compute_metrics(const std::vector<EpisodeRecord>& records,
                                     const std::string& subset = "all") {
  MetricsReport out;
  out.sr = compute_sr(records);
  out.spl = compute_spl(records);
  out.sae = compute_sae(records);
  out.n_episodes = static_cast<int>(records.size());
  out.subset = subset;
  return out;
}

/// Keep episodes whose optimal trajectory is at least min_optimal moves.
inline std::vector<EpisodeRecord> filter_subset(
    const std::vector<EpisodeRecord>& records, int min_optimal = 5) {
  std::vector<EpisodeRecord> out;
  for (const auto& r : records) {
    if (!r.optimal_length.has_value())
      throw Error("metrics: episode " + r.env_id + " is missing its optimal length");
    if (*r.optimal_length >= min_optimal) out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trial aggregation
// ---------------------------------------------------------------------------

struct TrialAggregate {
  double sr_mean = 0.0, sr_var = 0.0;
  double spl_mean = 0.0, spl_var = 0.0;
  double sae_mean = 0.0, sae_var = 0.0;
  int trials = 0;
  std::string subset = "all";
};

/// Mean and sample variance of each metric over repeated trials.
inline TrialAggregate aggregate_trials(const std::vector<MetricsReport>& reports) {
  if (reports.size() < 2) throw Error("aggregate: need at least 2 trials");
  TrialAggregate out;
  out.trials = static_cast<int>(reports.size());
  out.subset = reports.front().subset;
  for (const auto& r : reports)
    if (r.subset != out.subset)
      throw Error("aggregate: mixed subsets " + out.subset + " and " + r.subset);

  auto accumulate = [&](auto pick, double& mean, double& var) {
    bool all_equal = true;
    for (const auto& r : reports) all_equal &= pick(r) == pick(reports.front());
    if (all_equal) {  // keep identical trials exactly at variance zero
      mean = pick(reports.front());
      var = 0.0;
      return;
    }
    double sum = 0.0;
    for (const auto& r : reports) sum += pick(r);
    mean = sum / static_cast<double>(out.trials);
    double sq = 0.0;
    for (const auto& r : reports) {
      double d = pick(r) - mean;
      sq += d * d;
    }
    var = sq / static_cast<double>(out.trials - 1);
  };
  accumulate([](const MetricsReport& r) { return r.sr; }, out.sr_mean, out.sr_var);
  accumulate([](const MetricsReport& r) { return r.spl; }, out.spl_mean, out.spl_var);
  accumulate([](const MetricsReport& r) { return r.sae; }, out.sae_mean, out.sae_var);
  return out;
}

}  // namespace hoz
