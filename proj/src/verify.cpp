#include "dbp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dbp/analytics.hpp"
#include "dbp/errors.hpp"
#include "dbp/linalg.hpp"
#include "dbp/rng.hpp"

namespace dbp {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double horizon_of(const std::vector<double>& grid) {
  if (grid.empty()) throw ArgumentError("grid must not be empty");
  return std::max(grid.back(), 1e-9);
}

SimConfig grid_config(const std::vector<double>& grid, const EnsembleSettings& settings) {
  SimConfig config;
  config.horizon = horizon_of(grid);
  config.recordGrid = grid;
  config.maxEvents = settings.maxEvents;
  config.recordEvents = false;
  return config;
}

void require_reps(const EnsembleSettings& settings) {
  if (settings.reps < 100) throw ArgumentError("ensembles need at least 100 replications");
}

Vector matexp_row_mean(const Matrix& G, const std::vector<long>& initial, double t) {
  const Matrix E = matexp_reference(G, t);
  Vector x = Vector::Zero(G.rows());
  for (std::size_t k = 0; k < initial.size(); ++k) {
    if (initial[k] != 0) x += static_cast<double>(initial[k]) * E.row(ix(k)).transpose();
  }
  return x;
}

}  // namespace

bool McReport::all_pass() const {
  return std::all_of(pass.begin(), pass.end(), [](bool p) { return p; });
}

std::uint64_t secondary_seed(std::uint64_t seed) { return mix64(seed ^ 0x5eedULL); }

McReport run_ensemble(const Model& model, const std::vector<long>& initial, SimConfig config,
                      long reps, std::uint64_t seed, const Statistic& statistic) {
  if (reps < 1) throw ArgumentError("reps must be positive");
  std::vector<std::vector<double>> values;
  values.reserve(static_cast<std::size_t>(reps));
  McReport report;
  report.grid = config.recordGrid;
  report.reps = reps;
  report.seed = seed;
  for (long r = 0; r < reps; ++r) {
    config.seed = stream_seed(seed, static_cast<std::uint64_t>(r));
    const EventLog log = simulate(model, initial, config);
    if (log.terminated == Termination::EventCap) {
      ++report.excluded;
      continue;
    }
    values.push_back(statistic(log));
    if (values.back().size() != values.front().size()) {
      throw ArgumentError("statistic length changed between replications");
    }
  }
  if (values.empty()) throw DegenerateEnsembleError("every replication hit the event cap");

  const std::size_t points = values.front().size();
  const double n = static_cast<double>(values.size());
  report.mcMean.assign(points, 0.0);
  report.mcStdErr.assign(points, 0.0);
  for (const auto& v : values) {
    for (std::size_t g = 0; g < points; ++g) report.mcMean[g] += v[g];
  }
  for (double& m : report.mcMean) m /= n;
  if (values.size() > 1) {
    for (std::size_t g = 0; g < points; ++g) {
      const auto constant = std::all_of(values.begin(), values.end(),
                                        [&](const auto& v) { return v[g] == values.front()[g]; });
      if (constant) {
        report.mcMean[g] = values.front()[g];
        continue;
      }
      double ss = 0.0;
      for (const auto& v : values) ss += (v[g] - report.mcMean[g]) * (v[g] - report.mcMean[g]);
      report.mcStdErr[g] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
  }
  return report;
}

void judge(McReport& report) {
  report.pass.assign(report.grid.size(), false);
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    const double gap = std::abs(report.mcMean[g] - report.predicted[g]);
    // Round-off slack for points whose standard error is exactly zero.
    const double slack = 1e-12 * std::max(1.0, std::abs(report.predicted[g]));
    report.pass[g] = gap <= 3.0 * report.mcStdErr[g] + slack;
  }
}

McReport judged_with_rerun(const std::function<McReport(std::uint64_t)>& run, std::uint64_t seed) {
  McReport first = run(seed);
  judge(first);
  const auto failures = std::count(first.pass.begin(), first.pass.end(), false);
  if (failures != 1) return first;
  McReport second = run(secondary_seed(seed));
  judge(second);
  second.reruns = 1;
  return second;
}

Vector predicted_mean(const Model& model, const std::vector<long>& initial, double t) {
  if (initial.size() != type_count(model)) throw ArgumentError("initial population has the wrong length");
  return std::visit(
      [&](const auto& m) -> Vector {
        using T = std::decay_t<decltype(m)>;
        const std::size_t n = m.types();
        if constexpr (std::is_same_v<T, SdcbpModel>) {
          Vector x = Vector::Zero(ix(n));
          try {
            for (std::size_t k = 0; k < n; ++k) {
              if (initial[k] == 0) continue;
              for (std::size_t j = k; j < n; ++j) {
                x(ix(j)) += static_cast<double>(initial[k]) * expected_population(m, k, j, t);
              }
            }
          } catch (const NearDegenerateSpectrumError&) {
            return matexp_row_mean(generator_matrix(m), initial, t);
          }
          return x;
        } else if constexpr (std::is_same_v<T, VdcbpModel>) {
          const VdcbpBlocks blocks = vdcbp_blocks(m);
          const std::size_t n1 = m.class1;
          Vector x = Vector::Zero(ix(n));
          const Matrix E11 = matexp_reference(blocks.A11, t);
          const Matrix E22 = matexp_reference(blocks.A22, t);
          for (std::size_t k = 0; k < n; ++k) {
            if (initial[k] == 0) continue;
            const double w = static_cast<double>(initial[k]);
            if (k < n1) {
              x.head(ix(n1)) += w * E11.row(ix(k)).transpose();
              x.tail(ix(m.class2)) += w * vdcbp_expected_y(m, k).exact(t);
            } else {
              x.tail(ix(m.class2)) += w * E22.row(ix(k - n1)).transpose();
            }
          }
          return x;
        } else {
          return matexp_row_mean(generator_matrix(m), initial, t);
        }
      },
      model);
}

std::vector<McReport> mc_expectation(const Model& model, const std::vector<long>& initial,
                                     const std::vector<double>& grid,
                                     const EnsembleSettings& settings) {
  require_reps(settings);
  const std::size_t n = type_count(model);
  std::vector<Vector> predicted;
  for (double t : grid) predicted.push_back(predicted_mean(model, initial, t));

  // One ensemble; the statistic packs every type's series type-major.
  const std::size_t points = grid.size();
  auto run = [&](std::uint64_t seed) {
    return run_ensemble(model, initial, grid_config(grid, settings), settings.reps, seed,
                        [&](const EventLog& log) {
                          std::vector<double> out(n * points);
                          for (std::size_t g = 0; g < points; ++g) {
                            for (std::size_t i = 0; i < n; ++i) {
                              out[i * points + g] =
                                  static_cast<double>(log.snapshots[g].population[i]);
                            }
                          }
                          return out;
                        });
  };

  auto split = [&](const McReport& packed) {
    std::vector<McReport> out;
    for (std::size_t i = 0; i < n; ++i) {
      McReport r;
      r.quantity = "E[X" + std::to_string(i + 1) + "(t)]";
      r.label = "closed form";
      r.grid = grid;
      r.reps = packed.reps;
      r.excluded = packed.excluded;
      r.seed = packed.seed;
      for (std::size_t g = 0; g < points; ++g) {
        r.mcMean.push_back(packed.mcMean[i * points + g]);
        r.mcStdErr.push_back(packed.mcStdErr[i * points + g]);
        r.predicted.push_back(predicted[g](ix(i)));
      }
      judge(r);
      out.push_back(std::move(r));
    }
    return out;
  };

  std::vector<McReport> reports = split(run(settings.seed));
  long failures = 0;
  for (const McReport& r : reports) failures += std::count(r.pass.begin(), r.pass.end(), false);
  if (failures == 1) {
    reports = split(run(secondary_seed(settings.seed)));
    for (McReport& r : reports) r.reruns = 1;
  }
  return reports;
}

McReport mc_extinction(const Model& model, const std::vector<long>& initial, double horizon,
                       const EnsembleSettings& settings, const std::vector<bool>& classMask,
                       long populationCap) {
  require_reps(settings);
  const std::size_t n = type_count(model);
  if (classMask.size() != n || initial.size() != n) throw ArgumentError("mask or initial has the wrong length");
  const Matrix G = generator_matrix(model);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!classMask[i] && classMask[j] && i != j && G(ix(i), ix(j)) > 0.0) {
        throw ArgumentError("an unmasked type produces a masked type");
      }
    }
  }
  const FixedPoint fp = pgf_fixed_point(model, classMask);
  double predicted = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    predicted *= std::pow(fp.s(ix(k)), static_cast<double>(initial[k]));
  }

  auto run = [&](std::uint64_t seed) {
    SimConfig config;
    config.horizon = horizon;
    config.recordGrid = {horizon};
    config.maxEvents = settings.maxEvents;
    config.populationCap = populationCap;
    config.extinctionMask = classMask;
    config.dropUnmasked = true;
    config.recordEvents = false;
    McReport r = run_ensemble(model, initial, config, settings.reps, seed, [](const EventLog& log) {
      return std::vector<double>{log.terminated == Termination::Extinct ? 1.0 : 0.0};
    });
    r.quantity = "P(masked types extinct)";
    r.label = "closed form";
    r.predicted = {predicted};
    return r;
  };
  return judged_with_rerun(run, settings.seed);
}

McReport mc_martingale_drift(const Model& model, std::size_t m, const std::vector<double>& grid,
                             const EnsembleSettings& settings) {
  require_reps(settings);
  const std::size_t n = type_count(model);
  std::vector<long> initial(n, 0);
  Statistic statistic;
  double predicted = 0.0;
  std::string quantity;

  if (const auto* s = std::get_if<SdcbpModel>(&model)) {
    const MartingaleCoeffs coeffs = martingale_coeffs(*s, m);
    const double alpha = generator_matrix(*s)(ix(m), ix(m));
    initial[0] = 1;
    predicted = coeffs.a(0);
    quantity = "M" + std::to_string(m + 1) + "(t)";
    statistic = [coeffs, alpha](const EventLog& log) {
      std::vector<double> out;
      for (const auto& [t, value] : martingale_series(log, coeffs, alpha)) out.push_back(value);
      return out;
    };
  } else if (const auto* v = std::get_if<VdcbpModel>(&model)) {
    if (m >= v->class1) throw ArgumentError("VDCBP martingale start must be a class-1 type");
    const VdcbpGrowth growth = vdcbp_growth(*v);
    const Vector w = vdcbp_martingale_weights(*v);
    initial[m] = 1;
    predicted = w(ix(m));
    quantity = "two-class martingale";
    const std::size_t n1 = v->class1;
    statistic = [growth, w, n1, n](const EventLog& log) {
      std::vector<double> out;
      for (std::size_t g = 0; g < log.grid.size(); ++g) {
        const auto& pop = log.snapshots[g].population;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = static_cast<double>(pop[i]);
          sum += i < n1 ? x * w(ix(i)) : x * growth.xi2R(ix(i - n1));
        }
        out.push_back(sum * std::exp(-growth.alpha2 * log.grid[g]));
      }
      return out;
    };
  } else {
    throw ArgumentError("martingale drift is defined for SDCBP and VDCBP models");
  }

  auto run = [&](std::uint64_t seed) {
    McReport r = run_ensemble(model, initial, grid_config(grid, settings), settings.reps, seed,
                              statistic);
    r.quantity = quantity;
    r.label = "closed form";
    r.predicted.assign(grid.size(), predicted);
    return r;
  };
  return judged_with_rerun(run, settings.seed);
}

std::vector<double> share_statistic(const TcvdbpModel& model, const EventLog& log) {
  const std::size_t M = model.mixed;
  const std::size_t n = model.types();
  std::vector<double> out;
  for (const Counters& c : log.snapshots) {
    long y = 0;
    for (std::size_t l = 0; l < M; ++l) y += c.offspring[l];
    for (std::size_t i = M; i < n; ++i) {
      y += c.shareEvents[i];
      if (i + 1 == n) y += c.typeChanges[i];
    }
    out.push_back(static_cast<double>(y));
  }
  return out;
}

McReport mc_shares(const TcvdbpModel& model, std::size_t startType,
                   const std::vector<double>& grid, const EnsembleSettings& settings) {
  require_reps(settings);
  if (startType >= model.types()) throw ArgumentError("start type out of range");
  ExpCurve curve;
  std::string label;
  if (startType >= model.mixed) {
    curve = exclusive_shares_curve(model, startType - model.mixed);
    label = "closed form";
  } else {
    const ShareCoeffs coeffs = mixed_shares_coeffs(model);
    curve = mixed_shares_curve(coeffs, startType);
    label = coeffs.mixedSubcritical ? "closed form (subcritical mixed class)" : "conjecture check";
  }
  std::vector<long> initial(model.types(), 0);
  initial[startType] = 1;
  const Model wrapped = model;

  auto run = [&](std::uint64_t seed) {
    McReport r = run_ensemble(wrapped, initial, grid_config(grid, settings), settings.reps, seed,
                              [&](const EventLog& log) { return share_statistic(model, log); });
    r.quantity = model.theta == 0.0 ? "total progeny" : "shares";
    r.label = label;
    r.predicted = curve.sample(grid);
    for (double t : grid) r.reference.push_back(exact_shares(model, startType, t));
    return r;
  };
  return judged_with_rerun(run, settings.seed);
}

void write_report_csv(std::ostream& out, const McReport& report) {
  out << "t,mcMean,mcStdErr,predicted,reference,verdict\n";
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    out << fmt(report.grid[g]) << ',' << fmt(report.mcMean[g]) << ',' << fmt(report.mcStdErr[g])
        << ',' << fmt(report.predicted[g]) << ',';
    if (g < report.reference.size()) out << fmt(report.reference[g]);
    out << ',' << (g < report.pass.size() && report.pass[g] ? "pass" : "fail") << '\n';
  }
}

void write_report_text(std::ostream& out, const McReport& report) {
  out << report.quantity << " [" << report.label << "] reps=" << report.reps
      << " excluded=" << report.excluded << " seed=" << report.seed
      << " reruns=" << report.reruns << (report.biased() ? " BIASED" : "") << '\n';
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    char line[256];
    std::snprintf(line, sizeof line, "  t=%-8g mean=%-14.8g se=%-12.6g predicted=%-14.8g %s\n",
                  report.grid[g], report.mcMean[g], report.mcStdErr[g], report.predicted[g],
                  g < report.pass.size() && report.pass[g] ? "pass" : "FAIL");
    out << line;
  }
  out << "  verdict: " << (report.all_pass() ? "pass" : "fail") << '\n';
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ArgumentError("KS statistic needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace dbp
