// Command-line front end: expect, extinction, simulate, shares, verify, matexp.
// Type indices are 1-based here and in every CSV; the library is 0-based.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbp/analytics.hpp"
#include "dbp/errors.hpp"
#include "dbp/linalg.hpp"
#include "dbp/model_io.hpp"
#include "dbp/rng.hpp"
#include "dbp/simulator.hpp"
#include "dbp/verify.hpp"

namespace fs = std::filesystem;
using namespace dbp;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum Exit { kOk = 0, kFailure = 1, kModel = 2, kDegenerate = 3, kConvergence = 4, kVerify = 5 };

struct Failure {
  int code;
  std::string reason;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> g_argv;

struct Common {
  std::string model;
  bool gnuplot = false;
};

Model load_valid(const std::string& path) {
  const Model model = load_model_file(path);
  const auto violations = validate(model);
  if (!violations.empty()) {
    for (const Violation& v : violations) {
      std::cerr << "violation: " << v.invariant << " at " << v.location << '\n';
    }
    throw Failure{kModel, "model violates " + std::to_string(violations.size()) + " invariant(s)"};
  }
  return model;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kFailure, "cannot write " + path.string()};
  out << content;
}

void write_manifest(const fs::path& path, const std::string& command, const std::string& model,
                    const json& settings, const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["argv"] = g_argv;
  m["model"] = model;
  m["settings"] = settings;
  m["outputs"] = outputs;
  m["toolVersion"] = kToolVersion;
  write_file(path, m.dump(2) + "\n");
}

fs::path manifest_for(const std::string& out) { return fs::path(out + ".manifest.json"); }

void write_gnuplot(const std::string& csv, const std::string& title, const std::string& plot) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set title '" << title << "'\n"
     << "set xlabel 't'\n"
     << "plot " << plot << '\n';
  write_file(csv + ".gp", gp.str());
}

std::vector<double> grid_or_default(const std::vector<double>& grid, double horizon) {
  if (!grid.empty()) return grid;
  return uniform_grid(horizon, horizon / 10.0);
}

std::size_t to_index(long oneBased, std::size_t count, const char* what) {
  if (oneBased < 1 || static_cast<std::size_t>(oneBased) > count) {
    throw Failure{kModel, std::string(what) + " out of range 1.." + std::to_string(count)};
  }
  return static_cast<std::size_t>(oneBased - 1);
}

// ---------------------------------------------------------------- expect

struct ExpectArgs {
  long start = 1;
  long target = 0;  // 0: every type
  double tMax = 1.0;
  double dt = 0.1;
  std::string out;
};

void cmd_expect(const Common& c, const ExpectArgs& a) {
  const Model model = load_valid(c.model);
  const std::size_t n = type_count(model);
  const std::size_t k = to_index(a.start, n, "start type");
  std::vector<std::size_t> targets;
  if (a.target == 0) {
    for (std::size_t m = 0; m < n; ++m) targets.push_back(m);
  } else {
    targets.push_back(to_index(a.target, n, "target type"));
  }
  const std::vector<double> grid = uniform_grid(a.tMax, a.dt);
  std::vector<long> initial(n, 0);
  initial[k] = 1;

  std::ostringstream csv;
  csv << "t,type,mean\n";
  const auto* sdcbp = std::get_if<SdcbpModel>(&model);
  std::vector<ExpCurve> curves;
  if (sdcbp) {
    for (std::size_t m : targets) curves.push_back(expectation_curve(*sdcbp, k, m));
  }
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    for (double t : grid) {
      const double value = sdcbp ? curves[ti].eval(t) : predicted_mean(model, initial, t)(
                                                            static_cast<Eigen::Index>(targets[ti]));
      csv << fmt(t) << ',' << targets[ti] + 1 << ',' << fmt(value) << '\n';
    }
  }
  write_file(a.out, csv.str());
  std::vector<std::string> outputs{a.out};
  if (c.gnuplot) {
    write_gnuplot(a.out, "expected population from type " + std::to_string(a.start),
                  "'" + a.out + "' using 1:3 with points");
    outputs.push_back(a.out + ".gp");
  }
  write_manifest(manifest_for(a.out), "expect", c.model,
                 {{"start", a.start}, {"target", a.target}, {"tMax", a.tMax}, {"dt", a.dt}},
                 outputs);
}

// ------------------------------------------------------------ extinction

struct ExtinctionArgs {
  double tol = 1e-12;
  long maxIter = 1000000;
  std::string out;
};

void cmd_extinction(const Common& c, const ExtinctionArgs& a) {
  const Model model = load_valid(c.model);
  const std::size_t n = type_count(model);
  const FixedPointOptions options{a.tol, a.maxIter};
  std::ostringstream csv;
  csv << "startType,targetClass,q,residual,iters\n";

  auto emit = [&](const std::vector<bool>& mask, const std::string& label) {
    FixedPoint fp;
    try {
      fp = pgf_fixed_point(model, mask, options);
    } catch (const ConvergenceError& e) {
      std::cerr << "class " << label << ": " << e.what() << " (residual " << e.residual()
                << ", iterations " << e.iterations() << ")\n";
      throw;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!mask[k]) continue;
      csv << k + 1 << ',' << label << ',' << fmt(fp.s(static_cast<Eigen::Index>(k))) << ','
          << fmt(fp.residual) << ',' << fp.iterations << '\n';
    }
  };

  if (std::holds_alternative<SdcbpModel>(model)) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<bool> mask(n, false);
      for (std::size_t k = 0; k <= i; ++k) mask[k] = true;
      emit(mask, std::to_string(i + 1));
    }
  } else {
    const std::vector<std::size_t> cls = class_of_types(model);
    std::vector<bool> first(n), second(n), all(n, true);
    for (std::size_t i = 0; i < n; ++i) {
      first[i] = cls[i] == 0;
      second[i] = cls[i] == 1;
    }
    emit(first, "1");
    emit(second, "2");
    emit(all, "12");
  }
  write_file(a.out, csv.str());
  write_manifest(manifest_for(a.out), "extinction", c.model,
                 {{"tol", a.tol}, {"maxIter", a.maxIter}}, {a.out});
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  std::vector<long> init;
  std::uint64_t seed = 1;
  double horizon = 1.0;
  long maxEvents = 10000000;
  long reps = 1;
  std::vector<double> grid;
  std::string outDir;
  bool aggregate = false;
  bool events = false;
};

void cmd_simulate(const Common& c, const SimulateArgs& a) {
  const Model model = load_valid(c.model);
  const std::size_t n = type_count(model);
  std::vector<long> initial = a.init;
  if (initial.empty()) {
    initial.assign(n, 0);
    initial[0] = 1;
  }
  if (initial.size() != n) throw Failure{kModel, "--init needs one count per type"};
  SimConfig config;
  config.horizon = a.horizon;
  config.maxEvents = a.maxEvents;
  config.recordGrid = grid_or_default(a.grid, a.horizon);
  config.recordEvents = a.events;
  const fs::path dir(a.outDir);
  std::vector<std::string> outputs;

  if (a.aggregate) {
    McReport packed = run_ensemble(model, initial, config, a.reps, a.seed, [&](const EventLog& log) {
      std::vector<double> out;
      for (std::size_t i = 0; i < n; ++i) {
        for (const Counters& s : log.snapshots) out.push_back(static_cast<double>(s.population[i]));
      }
      return out;
    });
    const std::size_t points = config.recordGrid.size();
    std::ostringstream csv;
    csv << "t,type,mean,stdErr\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t g = 0; g < points; ++g) {
        csv << fmt(config.recordGrid[g]) << ',' << i + 1 << ',' << fmt(packed.mcMean[i * points + g])
            << ',' << fmt(packed.mcStdErr[i * points + g]) << '\n';
      }
    }
    const std::string path = (dir / "aggregate.csv").string();
    write_file(path, csv.str());
    outputs.push_back(path);
    if (packed.excluded > 0) {
      std::cerr << packed.excluded << " replication(s) hit the event cap and were excluded\n";
    }
    if (c.gnuplot) {
      write_gnuplot(path, "ensemble mean", "'" + path + "' using 1:3 with points");
      outputs.push_back(path + ".gp");
    }
  } else {
    for (long r = 0; r < a.reps; ++r) {
      config.seed = stream_seed(a.seed, static_cast<std::uint64_t>(r));
      const EventLog log = simulate(model, initial, config);
      char name[64];
      std::snprintf(name, sizeof name, "rep_%06ld_snapshots.csv", r + 1);
      std::ostringstream csv;
      write_snapshots_csv(csv, log);
      write_file(dir / name, csv.str());
      outputs.push_back((dir / name).string());
      if (a.events) {
        std::snprintf(name, sizeof name, "rep_%06ld_events.csv", r + 1);
        std::ostringstream ev;
        write_events_csv(ev, log);
        write_file(dir / name, ev.str());
        outputs.push_back((dir / name).string());
      }
      if (log.terminated == Termination::EventCap) {
        std::cerr << "replication " << r + 1 << " hit the event cap\n";
      }
    }
  }
  write_manifest(dir / "manifest.json", "simulate", c.model,
                 {{"init", initial},
                  {"seed", a.seed},
                  {"horizon", a.horizon},
                  {"maxEvents", a.maxEvents},
                  {"reps", a.reps},
                  {"grid", config.recordGrid},
                  {"aggregate", a.aggregate},
                  {"events", a.events}},
                 outputs);
}

// ---------------------------------------------------------------- shares

struct SharesArgs {
  long start = 1;
  double tMax = 1.0;
  double dt = 0.1;
  std::string out;
};

void cmd_shares(const Common& c, const SharesArgs& a) {
  const Model model = load_valid(c.model);
  const auto* tc = std::get_if<TcvdbpModel>(&model);
  if (!tc) throw Failure{kModel, "shares needs a tcvdbp or social model"};
  const std::size_t start = to_index(a.start, tc->types(), "start type");
  const std::vector<double> grid = uniform_grid(a.tMax, a.dt);
  const std::string quantity = tc->theta == 0.0 ? "total progeny" : "shares";

  std::ostringstream csv;
  ExpCurve curve;
  csv << "# quantity: " << quantity << '\n';
  if (start >= tc->mixed) {
    curve = exclusive_shares_curve(*tc, start - tc->mixed);
    csv << "# exclusive start: g=" << fmt(curve.terms[0].coeff) << " h=" << fmt(curve.terms[1].coeff)
        << " alphaE=" << fmt(curve.terms[1].rate) << '\n';
  } else {
    const ShareCoeffs s = mixed_shares_coeffs(*tc);
    curve = mixed_shares_curve(s, start);
    const auto l = static_cast<Eigen::Index>(start);
    csv << "# mixed start" << (s.mixedSubcritical ? " (subcritical mixed class)" : " (conjecture)")
        << ": g=" << fmt(s.gl(l)) << " h=" << fmt(s.hl(l)) << " o=" << fmt(s.ol(l))
        << " g+h+o=" << fmt(s.gl(l) + s.hl(l) + s.ol(l)) << " alphaE=" << fmt(s.alphaE)
        << " alphaBar=" << fmt(s.alphaBar) << '\n';
    for (const std::string& w : s.warnings) {
      std::cerr << "warning: " << w << '\n';
      csv << "# warning: " << w << '\n';
    }
  }
  csv << "t,shares,exact\n";
  for (double t : grid) {
    csv << fmt(t) << ',' << fmt(curve.eval(t)) << ',' << fmt(exact_shares(*tc, start, t)) << '\n';
  }
  write_file(a.out, csv.str());
  std::vector<std::string> outputs{a.out};
  if (c.gnuplot) {
    write_gnuplot(a.out, quantity,
                  "'" + a.out + "' using 1:2 with lines, '' using 1:3 with points");
    outputs.push_back(a.out + ".gp");
  }
  write_manifest(manifest_for(a.out), "shares", c.model,
                 {{"start", a.start}, {"tMax", a.tMax}, {"dt", a.dt}}, outputs);
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string suite = "all";
  long reps = 2000;
  std::uint64_t seed = 1;
  std::string outDir;
  std::vector<double> grid{0.5, 1.0, 2.0};
  double horizon = 25.0;
  long start = 1;
};

void cmd_verify(const Common& c, const VerifyArgs& a) {
  const Model model = load_valid(c.model);
  const std::size_t n = type_count(model);
  const std::size_t start = to_index(a.start, n, "start type");
  const EnsembleSettings settings{a.reps, a.seed, 10000000};
  const fs::path dir(a.outDir);
  const bool all = a.suite == "all";
  std::vector<std::pair<std::string, McReport>> reports;

  if (all || a.suite == "expect") {
    std::vector<long> initial(n, 0);
    initial[start] = 1;
    const auto rs = mc_expectation(model, initial, a.grid, settings);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      reports.emplace_back("expect_type" + std::to_string(i + 1), rs[i]);
    }
  }
  if (all || a.suite == "extinction") {
    std::vector<long> initial(n, 0);
    initial[start] = 1;
    if (std::holds_alternative<SdcbpModel>(model)) {
      for (std::size_t i = start; i < n; ++i) {
        std::vector<bool> mask(n, false);
        for (std::size_t k = 0; k <= i; ++k) mask[k] = true;
        reports.emplace_back("extinction_upto" + std::to_string(i + 1),
                             mc_extinction(model, initial, a.horizon, settings, mask));
      }
    } else {
      const std::vector<std::size_t> cls = class_of_types(model);
      std::vector<bool> first(n), everything(n, true);
      for (std::size_t i = 0; i < n; ++i) first[i] = cls[i] == 0;
      if (cls[start] == 0) {
        reports.emplace_back("extinction_class1",
                             mc_extinction(model, initial, a.horizon, settings, first));
      }
      reports.emplace_back("extinction_all",
                           mc_extinction(model, initial, a.horizon, settings, everything));
    }
  }
  if ((all || a.suite == "martingale") && !std::holds_alternative<TcvdbpModel>(model)) {
    if (std::holds_alternative<SdcbpModel>(model)) {
      for (std::size_t m = 0; m < n; ++m) {
        try {
          reports.emplace_back("martingale_type" + std::to_string(m + 1),
                               mc_martingale_drift(model, m, a.grid, settings));
        } catch (const NearDegenerateSpectrumError& e) {
          std::cerr << "martingale for type " << m + 1 << " skipped: " << e.what() << '\n';
        }
      }
    } else {
      reports.emplace_back("martingale_start" + std::to_string(start + 1),
                           mc_martingale_drift(model, start, a.grid, settings));
    }
  }
  if ((all || a.suite == "shares")) {
    if (const auto* tc = std::get_if<TcvdbpModel>(&model)) {
      reports.emplace_back("shares_start" + std::to_string(start + 1),
                           mc_shares(*tc, start, a.grid, settings));
    } else if (!all) {
      throw Failure{kModel, "shares suite needs a tcvdbp or social model"};
    }
  }
  if (reports.empty()) throw Failure{kModel, "no applicable suite for this model"};

  std::vector<std::string> outputs;
  std::ostringstream summary;
  bool ok = true;
  for (const auto& [name, report] : reports) {
    std::ostringstream csv;
    write_report_csv(csv, report);
    const std::string path = (dir / (name + ".csv")).string();
    write_file(path, csv.str());
    outputs.push_back(path);
    summary << name << ": ";
    write_report_text(summary, report);
    ok = ok && report.all_pass();
  }
  const std::string summaryPath = (dir / "summary.txt").string();
  write_file(summaryPath, summary.str());
  outputs.push_back(summaryPath);
  write_manifest(dir / "manifest.json", "verify", c.model,
                 {{"suite", a.suite},
                  {"reps", a.reps},
                  {"seed", a.seed},
                  {"grid", a.grid},
                  {"horizon", a.horizon},
                  {"start", a.start}},
                 outputs);
  std::cerr << summary.str();
  if (!ok) throw Failure{kVerify, "verification failed (see " + summaryPath + ")"};
}

// ---------------------------------------------------------------- matexp

struct MatexpArgs {
  double t = 1.0;
  std::string method = "both";
  std::string out;
};

void cmd_matexp(const Common& c, const MatexpArgs& a) {
  const Model model = load_valid(c.model);
  const Matrix G = generator_matrix(model);
  Matrix shown;
  std::ostringstream text;
  if (a.method == "reference") {
    shown = matexp_reference(G, a.t);
  } else {
    shown = triangular_matexp_closed(TriangularSpectrum::from_matrix(G), a.t);
    if (a.method == "both") {
      text << "# maxAbsDiff=" << fmt(max_abs_diff(shown, matexp_reference(G, a.t))) << '\n';
    }
  }
  for (Eigen::Index r = 0; r < shown.rows(); ++r) {
    for (Eigen::Index col = 0; col < shown.cols(); ++col) {
      text << (col ? "," : "") << fmt(shown(r, col));
    }
    text << '\n';
  }
  if (a.out.empty()) {
    std::cerr << text.str();
  } else {
    write_file(a.out, text.str());
    write_manifest(manifest_for(a.out), "matexp", c.model, {{"t", a.t}, {"method", a.method}},
                   {a.out});
  }
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<long> parse_longs(const std::string& s) {
  std::vector<long> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(std::stol(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  CLI::App app{"Decomposable branching process analytics, simulation and verification"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", common.model, "model JSON file")->required();
    sub->add_flag("--gnuplot", common.gnuplot, "also write a gnuplot script next to the CSV");
  };

  ExpectArgs expect;
  auto* sExpect = app.add_subcommand("expect", "expected population curves");
  add_common(sExpect);
  sExpect->add_option("--start", expect.start, "start type (1-based)");
  sExpect->add_option("--target", expect.target, "target type (1-based, default all)");
  sExpect->add_option("--t-max", expect.tMax)->required();
  sExpect->add_option("--dt", expect.dt)->required();
  sExpect->add_option("--out", expect.out)->required();

  ExtinctionArgs ext;
  auto* sExt = app.add_subcommand("extinction", "extinction probabilities");
  add_common(sExt);
  sExt->add_option("--tol", ext.tol);
  sExt->add_option("--max-iter", ext.maxIter);
  sExt->add_option("--out", ext.out)->required();

  SimulateArgs sim;
  std::string initText, gridText;
  auto* sSim = app.add_subcommand("simulate", "simulate trajectories");
  add_common(sSim);
  sSim->add_option("--init", initText, "initial counts, comma separated");
  sSim->add_option("--seed", sim.seed);
  sSim->add_option("--horizon", sim.horizon)->required();
  sSim->add_option("--max-events", sim.maxEvents);
  sSim->add_option("--reps", sim.reps);
  sSim->add_option("--grid", gridText, "record times, comma separated");
  sSim->add_option("--out-dir", sim.outDir)->required();
  sSim->add_flag("--aggregate", sim.aggregate, "write ensemble means instead of per-run files");
  sSim->add_flag("--events", sim.events, "also write per-run event CSVs");

  SharesArgs shares;
  auto* sShares = app.add_subcommand("shares", "expected share curves");
  add_common(sShares);
  sShares->add_option("--start", shares.start, "start type (1-based)");
  sShares->add_option("--t-max", shares.tMax)->required();
  sShares->add_option("--dt", shares.dt)->required();
  sShares->add_option("--out", shares.out)->required();

  VerifyArgs ver;
  std::string verifyGrid;
  auto* sVer = app.add_subcommand("verify", "Monte Carlo verification of the closed forms");
  add_common(sVer);
  sVer->add_option("--suite", ver.suite)
      ->check(CLI::IsMember({"expect", "extinction", "martingale", "shares", "all"}));
  sVer->add_option("--reps", ver.reps);
  sVer->add_option("--seed", ver.seed);
  sVer->add_option("--grid", verifyGrid, "time points, comma separated");
  sVer->add_option("--horizon", ver.horizon, "extinction horizon");
  sVer->add_option("--start", ver.start, "start type (1-based)");
  sVer->add_option("--out", ver.outDir)->required();

  MatexpArgs mx;
  auto* sMx = app.add_subcommand("matexp", "matrix exponential of the generator");
  add_common(sMx);
  sMx->add_option("--t", mx.t)->required();
  sMx->add_option("--method", mx.method)->check(CLI::IsMember({"closed", "reference", "both"}));
  sMx->add_option("--out", mx.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cout << "FAIL: usage: " << e.what() << '\n';
    return kModel;
  }

  int code = kOk;
  std::string reason;
  try {
    if (*sExpect) cmd_expect(common, expect);
    if (*sExt) cmd_extinction(common, ext);
    if (*sSim) {
      sim.init = parse_longs(initText);
      sim.grid = parse_doubles(gridText);
      cmd_simulate(common, sim);
    }
    if (*sShares) cmd_shares(common, shares);
    if (*sVer) {
      if (!verifyGrid.empty()) ver.grid = parse_doubles(verifyGrid);
      cmd_verify(common, ver);
    }
    if (*sMx) cmd_matexp(common, mx);
  } catch (const Failure& f) {
    code = f.code;
    reason = f.reason;
  } catch (const ModelError& e) {
    code = kModel;
    reason = e.what();
  } catch (const ArgumentError& e) {
    code = kModel;
    reason = e.what();
  } catch (const NearDegenerateSpectrumError& e) {
    code = kDegenerate;
    reason = e.what();
  } catch (const ConvergenceError& e) {
    code = kConvergence;
    reason = std::string(e.what()) + " (residual " + fmt(e.residual()) + ")";
  } catch (const std::exception& e) {
    code = kFailure;
    reason = e.what();
  }
  if (code == kOk) {
    std::cout << "OK\n";
  } else {
    std::cerr << "error: " << reason << '\n';
    std::cout << "FAIL: " << reason << '\n';
  }
  return code;
}
