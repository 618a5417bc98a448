#pragma once

#include "qnsp/ledger.hpp"
#include "qnsp/renorm.hpp"

namespace qnsp {

/// Geometric parameter ladder (strictly decreasing positive values).
struct SweepSchedule {
  std::string param;  // eta | delta | mu | eps | eps_friction
  double start = 1e-2;
  double ratio = 0.1;
  int count = 3;

  std::vector<double> values() const;
  void validate() const;
};

struct SweepRung {
  double value = 0;
  bool completed = false;
  std::string cause;
  std::map<std::string, double> quantities;
};

struct SweepReport {
  SweepSchedule schedule;
  std::vector<SweepRung> rungs;
  std::map<std::string, double> slopes;  // log-log slope vs parameter
  bool isolation_ok = true;              // rung configs differ only in the parameter
  nlohmann::json to_json() const;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs one trajectory per rung (identical initial data) and reports the
/// vanishing quantities of the swept parameter as log-log slopes.
SweepReport sweep(const RunConfig& base, const SweepSchedule& sched);

}  // namespace qnsp
