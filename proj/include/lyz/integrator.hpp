#pragma once

// Time stepping for both flow formulations. The two evolving fields of either
// formulation are handled through the FlowSystem interface, so the steppers
// and the run loop are written once. Schemes:
//   rk4   classical four stage explicit scheme, requires dt below an explicit
//         diffusion stability limit,
//   imex  implicit Euler on the constant-coefficient part min(c) * lap0 of
//         each field, explicit Euler on the rest; first order, stable well
//         past the rk4 limit.
// The explicit limit is computed from the modes actually populated in the
// state (doubled for quadratic products, capped at the dealias cutoff), not
// from the full grid, so nearly-flat states can take large steps.

#include <functional>
#include <string>

#include "lyz/grid.hpp"
#include "lyz/potential_flow.hpp"
#include "lyz/surface_flow.hpp"

namespace lyz {

enum class Scheme { rk4, imex };

enum class Termination { Converged, TimeExhausted, MetricDegenerate, NonFinite };

const char* to_string(Scheme s);
const char* to_string(Termination t);

// Two coupled scalar fields (a, b) on one grid with da/dt, db/dt given by
// rhs(). Implementations adapt the concrete flow formulations below; tests
// also subclass this directly for linear model problems.
class FlowSystem {
 public:
  virtual ~FlowSystem() = default;
  virtual const Grid& grid() const = 0;
  virtual void rhs(const Field& a, const Field& b, double t, Field& da,
                   Field& db) const = 0;
  // Throws (MetricDegenerateError, NonFiniteError) if the state is not
  // admissible at time t.
  virtual void validate(const Field& a, const Field& b, double t) const = 0;
  // Bounds on the coefficient multiplying lap0 in each field's rhs, taken
  // over the grid. max_* drive the explicit stability limit, min_* the
  // implicit split.
  virtual void stiffness(const Field& a, const Field& b, double& max_a,
                         double& max_b, double& min_a, double& min_b) const = 0;
  // sup |da| + sup |db|; the stationarity stop measure.
  virtual double stationarity(const Field& a, const Field& b, double t) const;
  virtual const char* field_name_a() const = 0;
  virtual const char* field_name_b() const = 0;
};

// Conformal surface flow, fields (phi, tau).
class SurfaceSystem : public FlowSystem {
 public:
  SurfaceSystem(const Grid& g, SurfaceParams params);
  const Grid& grid() const override { return grid_; }
  void rhs(const Field& a, const Field& b, double t, Field& da,
           Field& db) const override;
  void validate(const Field& a, const Field& b, double t) const override;
  void stiffness(const Field& a, const Field& b, double& max_a, double& max_b,
                 double& min_a, double& min_b) const override;
  const char* field_name_a() const override { return "phi"; }
  const char* field_name_b() const override { return "tau"; }
  const SurfaceParams& params() const { return params_; }

 private:
  Grid grid_;
  SurfaceParams params_;
};

// Potential flow, fields (varphi, F).
class PotentialSystem : public FlowSystem {
 public:
  explicit PotentialSystem(FlowProblem problem);
  const Grid& grid() const override { return problem_.grid; }
  void rhs(const Field& a, const Field& b, double t, Field& da,
           Field& db) const override;
  void validate(const Field& a, const Field& b, double t) const override;
  void stiffness(const Field& a, const Field& b, double& max_a, double& max_b,
                 double& min_a, double& min_b) const override;
  const char* field_name_a() const override { return "varphi"; }
  const char* field_name_b() const override { return "F"; }
  const FlowProblem& problem() const { return problem_; }

 private:
  FlowProblem problem_;
};

struct StepperConfig {
  Scheme scheme = Scheme::rk4;
  double dt = 0.0;  // <= 0 selects adaptive step control
  double cfl_safety = 0.8;
  double t_end = 1.0;
  int sample_stride = 1;
  double stop_tolerance = 0.0;  // <= 0 disables the stationarity stop
};

// Largest explicit step the current state admits: cfl_safety over the
// stiffest reachable mode times the largest diffusion coefficient. Infinity
// for spatially constant states.
double cfl_dt_limit(const FlowSystem& sys, const Field& a, const Field& b,
                    double cfl_safety);

// One classical RK4 step from (a, b) at time t; result is cleaned with
// spectral_clean. Throws CflViolationError if dt exceeds the stability limit
// and NonFiniteError if the update degrades.
void step_rk4(const FlowSystem& sys, const Field& a, const Field& b, double t,
              double dt, Field& na, Field& nb);

// One IMEX Euler step: each field's Fourier modes are updated as
//   u' = (u + dt rhs + dt c mu u) / (1 + dt c mu),  mu = |k|^2 / 2,
// with c the current spatial min of that field's diffusion coefficient. No
// step size restriction from the implicit part; throws NonFiniteError if the
// explicit remainder still blows up.
void step_imex(const FlowSystem& sys, const Field& a, const Field& b, double t,
               double dt, Field& na, Field& nb);

// Called at every sample point with the current state and step count.
using SampleFn =
    std::function<void(const Field& a, const Field& b, double t, long step)>;

struct RunResult {
  Field a, b;  // final accepted state
  double t = 0.0;
  Termination termination = Termination::TimeExhausted;
  long steps = 0;
  long sample_count = 0;
  double dt_final = 0.0;
  // Last measured stationarity, NaN if the stop check never ran.
  double stationarity_final;

  RunResult(Field a0, Field b0, double t0);
};

// Advance (a0, b0) from t0 until t_end or stationarity < stop_tolerance.
// Samples at t0 and then every sample_stride accepted steps (plus the final
// state). A degenerate or non-finite state ends the run with the matching
// termination and the last good state; samples already taken are kept.
// With cfg.dt <= 0 the step starts at the stability limit, halves on a
// non-finite trial step, grows by 1.2 after 50 clean steps, and is re-capped
// at the current limit every step (10x the rk4 limit for imex).
RunResult run(const FlowSystem& sys, const Field& a0, const Field& b0,
              double t0, const StepperConfig& cfg,
              const SampleFn& on_sample = nullptr);

}  // namespace lyz
