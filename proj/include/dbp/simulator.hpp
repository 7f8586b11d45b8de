#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "dbp/analytics.hpp"
#include "dbp/model.hpp"

namespace dbp {

struct SimConfig {
  double horizon = 1.0;
  long maxEvents = 10000000;
  std::uint64_t seed = 1;
  std::vector<double> recordGrid;
  /// Stop as soon as the tracked population exceeds this size (0 disables).
  /// Used by extinction runs, where a large population counts as survival.
  long populationCap = 0;
  /// Types whose joint death counts as extinction; empty means all types.
  std::vector<bool> extinctionMask;
  /// Do not track particles of unmasked types at all. Only meaningful when
  /// they cannot produce masked types; snapshots then omit them.
  bool dropUnmasked = false;
  bool recordEvents = true;
};

enum class EventKind { Share, TypeChange, Death };
enum class Termination { Extinct, Horizon, EventCap, PopulationCap };

const char* to_string(EventKind kind);
const char* to_string(Termination reason);

struct Event {
  double time = 0.0;
  int parentType = 0;
  EventKind kind = EventKind::Share;
  /// Particles that replace the parent; a unit vector for type changes.
  std::vector<int> offspring;
};

/// Cumulative counters at one grid point.
struct Counters {
  std::vector<long> population;
  std::vector<long> shareEvents;  // per parent type
  std::vector<long> typeChanges;  // per parent type
  std::vector<long> offspring;    // per parent type, new particles produced
  std::vector<long> sharesByClass;  // new particles, by offspring class
  long totalProgeny = 0;            // new particles plus type changes
};

struct EventLog {
  std::vector<long> initial;
  std::vector<double> grid;
  std::vector<Counters> snapshots;  // one per grid point
  std::vector<Event> events;        // empty unless recordEvents
  Termination terminated = Termination::Horizon;
  double endTime = 0.0;
  long eventCount = 0;
  std::size_t classes = 0;
};

/// Class index of each type: one per type for SDCBP, two classes otherwise.
std::vector<std::size_t> class_of_types(const Model& model);

/// Exact event-driven simulation of one trajectory.
EventLog simulate(const Model& model, const std::vector<long>& initial, const SimConfig& config);

/// Rebuilds every snapshot population from the initial state and the event
/// list; true when they all match.
bool replay_check(const EventLog& log);

/// (t, sum_i a_i X_i(t) e^{-alphaM t}) on the record grid.
std::vector<std::pair<double, double>> martingale_series(const EventLog& log,
                                                         const MartingaleCoeffs& coeffs,
                                                         double alphaM);

/// X_m(T) e^{-alphaM T} at the last grid point, which must be the horizon.
double estimate_w(const EventLog& log, std::size_t targetType, double alphaM);

void write_events_csv(std::ostream& out, const EventLog& log);
void write_snapshots_csv(std::ostream& out, const EventLog& log);

}  // namespace dbp
