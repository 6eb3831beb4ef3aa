#pragma once

#include "tdhfb/diagnostics.hpp"
#include "tdhfb/rhs.hpp"

#include <functional>
#include <vector>

namespace tdhfb {

enum class Scheme { lawson_rk4, rk4 };

const char* to_string(Scheme s);

struct StepController {
  double dt = 1e-2;
  double rtol = 1e-8;
  double max_dt = 5e-2;
  double min_dt = 1e-8;
  Scheme scheme = Scheme::lawson_rk4;
  // Step doubling with rejection; otherwise fixed steps of dt.
  bool adaptive = true;

  void validate() const;
};

struct StepStats {
  double dt_used = 0.0;
  double error_estimate = 0.0;
};

template <class S>
struct Trajectory {
  std::vector<double> times;
  std::vector<DiagnosticsRow> rows;
  S final_state;
  long accepted = 0;
  long rejected = 0;
};

template <class S>
using Monitor = std::function<DiagnosticsRow(double t, const S& state, const StepStats& stats)>;

State step(const State& st, const Potential& pot, double dt, Scheme scheme, const RhsOptions& opts = {});
PairState step(const PairState& ps, const Potential& pot, double dt, Scheme scheme);

// Advances to T. Rows are recorded at t = 0 and at every sample time in (0, T]
// (T itself is always sampled); steps are shortened to land on sample times.
Trajectory<State> evolve(const State& initial, const Potential& pot, double T, const StepController& ctl,
                         const std::vector<double>& sample_times, const Monitor<State>& monitor,
                         const RhsOptions& opts = {});
Trajectory<PairState> evolve(const PairState& initial, const Potential& pot, double T,
                             const StepController& ctl, const std::vector<double>& sample_times,
                             const Monitor<PairState>& monitor);

// Condensate-only Hartree flow d/dt phi = i Lap phi - i (v_N * |phi|^2) phi,
// returning phi at each requested sample time.
std::vector<Field> evolve_hartree(const Field& phi0, const Potential& pot, const StepController& ctl,
                                  const std::vector<double>& sample_times);

// Uniform sample times k T / count, k = 1..count.
std::vector<double> uniform_samples(double T, int count);

}  // namespace tdhfb
