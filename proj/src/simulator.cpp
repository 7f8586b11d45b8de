#include "dbp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dbp/errors.hpp"
#include "dbp/rng.hpp"

namespace dbp {

namespace {

// Flattened, sampling-ready view of a model.
struct Compiled {
  std::size_t types = 0;
  std::vector<double> rate;
  double theta = 0.0;  // type-change probability per event
  bool typeChanging = false;
  std::vector<std::vector<double>> changeCum;  // cumulative type-change rows
  std::vector<std::vector<double>> atomCum;    // cumulative atom probabilities
  std::vector<std::vector<std::vector<int>>> atomCounts;
  std::vector<std::size_t> classOf;
  std::size_t classes = 0;
};

void compile_laws(Compiled& c, const std::vector<OffspringLaw>& laws) {
  for (const OffspringLaw& law : laws) {
    std::vector<double> cum;
    std::vector<std::vector<int>> counts;
    double acc = 0.0;
    for (const Atom& atom : law.atoms()) {
      if (atom.prob <= 0.0) continue;
      acc += atom.prob;
      cum.push_back(acc);
      counts.push_back(atom.counts);
    }
    if (counts.empty()) {
      cum.push_back(1.0);
      counts.emplace_back(c.types, 0);
    }
    c.atomCum.push_back(std::move(cum));
    c.atomCounts.push_back(std::move(counts));
  }
}

Compiled compile(const Model& model) {
  if (const auto v = validate(model); !v.empty()) {
    throw ModelError(v.front().invariant + " at " + v.front().location);
  }
  Compiled c;
  c.types = type_count(model);
  c.classOf = class_of_types(model);
  c.classes = c.classOf.empty() ? 0 : *std::max_element(c.classOf.begin(), c.classOf.end()) + 1;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TcvdbpModel>) {
          c.rate.assign(c.types, m.lambdaV);
          c.theta = m.theta;
          c.typeChanging = true;
          const Matrix a = m.type_change();
          for (std::size_t i = 0; i < c.types; ++i) {
            std::vector<double> cum(c.types);
            double acc = 0.0;
            for (std::size_t k = 0; k < c.types; ++k) {
              acc += a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
              cum[k] = acc;
            }
            c.changeCum.push_back(std::move(cum));
          }
          compile_laws(c, m.shareLaws);
        } else {
          c.rate = m.rates;
          compile_laws(c, m.laws);
        }
      },
      model);
  return c;
}

// Index of the first cumulative entry exceeding u*total; the last index
// absorbs rounding at the top end.
std::size_t pick(const std::vector<double>& cum, double u) {
  const double target = u * cum.back();
  for (std::size_t i = 0; i + 1 < cum.size(); ++i) {
    if (target < cum[i]) return i;
  }
  return cum.size() - 1;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Share: return "share";
    case EventKind::TypeChange: return "type-change";
    case EventKind::Death: return "death";
  }
  return "?";
}

const char* to_string(Termination reason) {
  switch (reason) {
    case Termination::Extinct: return "extinct";
    case Termination::Horizon: return "horizon";
    case Termination::EventCap: return "event-cap";
    case Termination::PopulationCap: return "population-cap";
  }
  return "?";
}

std::vector<std::size_t> class_of_types(const Model& model) {
  return std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        std::vector<std::size_t> out(m.types());
        if constexpr (std::is_same_v<T, SdcbpModel>) {
          std::iota(out.begin(), out.end(), std::size_t{0});
        } else if constexpr (std::is_same_v<T, VdcbpModel>) {
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = i < m.class1 ? 0 : 1;
        } else {
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = i < m.mixed ? 0 : 1;
        }
        return out;
      },
      model);
}

EventLog simulate(const Model& model, const std::vector<long>& initial, const SimConfig& config) {
  const Compiled c = compile(model);
  if (initial.size() != c.types) throw ArgumentError("initial population has the wrong length");
  for (long x : initial) {
    if (x < 0) throw ArgumentError("initial population must be nonnegative");
  }
  if (!(config.horizon > 0.0)) throw ArgumentError("horizon must be positive");
  if (config.maxEvents < 1) throw ArgumentError("maxEvents must be at least 1");
  for (std::size_t g = 0; g < config.recordGrid.size(); ++g) {
    const double t = config.recordGrid[g];
    if (t < 0.0 || t > config.horizon || (g > 0 && t < config.recordGrid[g - 1])) {
      throw ArgumentError("record grid must be sorted and inside [0, horizon]");
    }
  }
  std::vector<bool> mask = config.extinctionMask;
  if (mask.empty()) mask.assign(c.types, true);
  if (mask.size() != c.types) throw ArgumentError("extinction mask has the wrong length");

  EventLog log;
  log.initial = initial;
  if (config.dropUnmasked) {
    for (std::size_t i = 0; i < c.types; ++i) {
      if (!mask[i]) log.initial[i] = 0;
    }
  }
  log.grid = config.recordGrid;
  log.classes = c.classes;

  Rng rng(config.seed);
  Counters now;
  now.population = initial;
  if (config.dropUnmasked) {
    for (std::size_t i = 0; i < c.types; ++i) {
      if (!mask[i]) now.population[i] = 0;
    }
  }
  now.shareEvents.assign(c.types, 0);
  now.typeChanges.assign(c.types, 0);
  now.offspring.assign(c.types, 0);
  now.sharesByClass.assign(c.classes, 0);

  std::vector<double> weight(c.types);
  double t = 0.0;
  std::size_t gi = 0;
  auto masked_size = [&] {
    long total = 0;
    for (std::size_t i = 0; i < c.types; ++i) {
      if (mask[i]) total += now.population[i];
    }
    return total;
  };

  while (true) {
    const long tracked = masked_size();
    if (tracked == 0) {
      log.terminated = Termination::Extinct;
      break;
    }
    if (config.populationCap > 0 && tracked > config.populationCap) {
      log.terminated = Termination::PopulationCap;
      break;
    }
    if (log.eventCount >= config.maxEvents) {
      log.terminated = Termination::EventCap;
      break;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < c.types; ++i) {
      total += static_cast<double>(now.population[i]) * c.rate[i];
      weight[i] = total;
    }
    const double next = t + rng.exponential(total);
    while (gi < log.grid.size() && log.grid[gi] < next) {
      log.snapshots.push_back(now);
      ++gi;
    }
    if (next > config.horizon) {
      t = config.horizon;
      log.terminated = Termination::Horizon;
      break;
    }
    t = next;

    const std::size_t parent = pick(weight, rng.uniform());
    Event event;
    event.time = t;
    event.parentType = static_cast<int>(parent);
    --now.population[parent];
    if (c.typeChanging && rng.uniform() < c.theta) {
      const std::size_t to = pick(c.changeCum[parent], rng.uniform());
      if (!config.dropUnmasked || mask[to]) ++now.population[to];
      ++now.typeChanges[parent];
      ++now.totalProgeny;
      event.kind = EventKind::TypeChange;
      if (config.recordEvents) {
        event.offspring.assign(c.types, 0);
        event.offspring[to] = 1;
      }
    } else {
      const std::size_t atom = pick(c.atomCum[parent], rng.uniform());
      const std::vector<int>& counts = c.atomCounts[parent][atom];
      long born = 0;
      for (std::size_t k = 0; k < c.types; ++k) {
        if (counts[k] == 0) continue;
        if (!config.dropUnmasked || mask[k]) now.population[k] += counts[k];
        now.sharesByClass[c.classOf[k]] += counts[k];
        born += counts[k];
      }
      ++now.shareEvents[parent];
      now.offspring[parent] += born;
      now.totalProgeny += born;
      event.kind = (c.typeChanging || born > 0) ? EventKind::Share : EventKind::Death;
      if (config.recordEvents) event.offspring = counts;
    }
    ++log.eventCount;
    if (config.recordEvents) log.events.push_back(std::move(event));
  }

  // Grid points past an early stop carry the final state.
  while (gi < log.grid.size()) {
    log.snapshots.push_back(now);
    ++gi;
  }
  log.endTime = t;
  return log;
}

bool replay_check(const EventLog& log) {
  std::vector<long> pop = log.initial;
  std::size_t e = 0;
  for (std::size_t g = 0; g < log.grid.size(); ++g) {
    while (e < log.events.size() && log.events[e].time <= log.grid[g]) {
      const Event& ev = log.events[e];
      if (e > 0 && !(ev.time > log.events[e - 1].time)) return false;
      if (ev.offspring.size() != pop.size()) return false;
      --pop[static_cast<std::size_t>(ev.parentType)];
      for (std::size_t k = 0; k < pop.size(); ++k) pop[k] += ev.offspring[k];
      ++e;
    }
    if (pop != log.snapshots[g].population) return false;
  }
  return static_cast<long>(log.events.size()) == log.eventCount;
}

std::vector<std::pair<double, double>> martingale_series(const EventLog& log,
                                                         const MartingaleCoeffs& coeffs,
                                                         double alphaM) {
  if (static_cast<std::size_t>(coeffs.a.size()) > log.initial.size()) {
    throw ArgumentError("martingale coefficients exceed the type count");
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t g = 0; g < log.grid.size(); ++g) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < coeffs.a.size(); ++i) {
      sum += coeffs.a(i) * static_cast<double>(log.snapshots[g].population[static_cast<std::size_t>(i)]);
    }
    out.emplace_back(log.grid[g], sum * std::exp(-alphaM * log.grid[g]));
  }
  return out;
}

double estimate_w(const EventLog& log, std::size_t targetType, double alphaM) {
  if (log.grid.empty() || targetType >= log.initial.size()) {
    throw ArgumentError("estimate_w needs a grid ending at the horizon and a valid type");
  }
  const double T = log.grid.back();
  return static_cast<double>(log.snapshots.back().population[targetType]) * std::exp(-alphaM * T);
}

void write_events_csv(std::ostream& out, const EventLog& log) {
  out << "time,parentType,kind";
  for (std::size_t k = 0; k < log.initial.size(); ++k) out << ",offspring" << k + 1;
  out << '\n';
  for (const Event& ev : log.events) {
    out << fmt(ev.time) << ',' << ev.parentType + 1 << ',' << to_string(ev.kind);
    for (int x : ev.offspring) out << ',' << x;
    out << '\n';
  }
}

void write_snapshots_csv(std::ostream& out, const EventLog& log) {
  out << 't';
  for (std::size_t k = 0; k < log.initial.size(); ++k) out << ",pop" << k + 1;
  for (std::size_t k = 0; k < log.classes; ++k) out << ",sharesClass" << k + 1;
  out << ",totalProgeny\n";
  for (std::size_t g = 0; g < log.grid.size(); ++g) {
    const Counters& s = log.snapshots[g];
    out << fmt(log.grid[g]);
    for (long x : s.population) out << ',' << x;
    for (long x : s.sharesByClass) out << ',' << x;
    out << ',' << s.totalProgeny << '\n';
  }
}

}  // namespace dbp
