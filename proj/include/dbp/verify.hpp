#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dbp/model.hpp"
#include "dbp/simulator.hpp"

namespace dbp {

/// Ensemble statistics paired with a prediction, judged by the 3-standard-error rule.
struct McReport {
  std::string quantity;
  std::string label;  // e.g. "closed form" or "conjecture check"
  std::vector<double> grid;
  std::vector<double> mcMean;
  std::vector<double> mcStdErr;
  std::vector<double> predicted;
  std::vector<double> reference;  // optional independent oracle, same grid
  std::vector<bool> pass;
  long reps = 0;
  long excluded = 0;
  std::uint64_t seed = 0;
  int reruns = 0;

  bool biased() const { return excluded * 100 > reps; }
  bool all_pass() const;
};

struct EnsembleSettings {
  long reps = 1000;
  std::uint64_t seed = 1;
  long maxEvents = 10000000;
};

/// Per-replication statistic, usually one value per grid point.
using Statistic = std::function<std::vector<double>(const EventLog&)>;

/// Runs `reps` replications (replication r seeded with stream_seed(seed, r)),
/// the statistic returning the same number of values for every replication;
/// drops event-capped runs, and fills grid, mean, stdErr, reps and excluded.
McReport run_ensemble(const Model& model, const std::vector<long>& initial, SimConfig config,
                      long reps, std::uint64_t seed, const Statistic& statistic);

/// Sets pass flags from mean, stdErr and predicted.
void judge(McReport& report);

/// Judges the report; when exactly one point fails, reruns once with the
/// secondary seed and keeps the rerun.
McReport judged_with_rerun(const std::function<McReport(std::uint64_t)>& run, std::uint64_t seed);

std::uint64_t secondary_seed(std::uint64_t seed);

/// Predicted E[X(t)] for every type from the given initial population.
Vector predicted_mean(const Model& model, const std::vector<long>& initial, double t);

/// One report per type: snapshot means against the analytic expectation.
std::vector<McReport> mc_expectation(const Model& model, const std::vector<long>& initial,
                                     const std::vector<double>& grid,
                                     const EnsembleSettings& settings);

/// Frequency of {masked types all dead by the horizon} against the PGF fixed
/// point. No unmasked type may produce a masked type.
McReport mc_extinction(const Model& model, const std::vector<long>& initial, double horizon,
                       const EnsembleSettings& settings, const std::vector<bool>& classMask,
                       long populationCap = 200);

/// SDCBP: martingale for target type m from one type-0 particle.
/// VDCBP: two-class martingale from one particle of class-1 type m.
McReport mc_martingale_drift(const Model& model, std::size_t m, const std::vector<double>& grid,
                             const EnsembleSettings& settings);

/// Share count of one trajectory at each grid point (see exact_shares).
std::vector<double> share_statistic(const TcvdbpModel& model, const EventLog& log);

/// Expected shares from one particle of startType against the share curves.
McReport mc_shares(const TcvdbpModel& model, std::size_t startType,
                   const std::vector<double>& grid, const EnsembleSettings& settings);

void write_report_csv(std::ostream& out, const McReport& report);
void write_report_text(std::ostream& out, const McReport& report);

/// Kolmogorov-Smirnov statistic of samples against a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic p-value of the KS statistic d for n samples.
double ks_pvalue(double d, std::size_t n);

}  // namespace dbp
