#pragma once

#include <functional>
#include <string>

#include "cox/partial_likelihood.hpp"

namespace cox {

enum class Continuity { right, left };
enum class Monotonicity { nonincreasing, nondecreasing };

// Piecewise-constant function on the real line with finitely many jumps.
// values[k] is the value taken on the piece that starts at jumps[k]; which
// endpoint each piece owns follows from the continuity side.
struct StepFunction {
  Vector jumps;   // strictly ascending
  Vector values;  // same length as jumps
  double initial_value = 0.0;
  Continuity side = Continuity::right;

  double operator()(double t) const;
  Index num_jumps() const { return jumps.size(); }
  double last_value() const {
    return jumps.size() == 0 ? initial_value : values(values.size() - 1);
  }
};

// Breslow cumulative baseline hazard estimate under the fitted rates
// exp(beta'Z): right-continuous, starts at 0, jumps at each distinct
// uncensored time by (events there) / (n * risk_mass there).
StepFunction breslow_estimator(const Dataset& ds, const Vector& beta);

// The map t -> risk_mass(t, beta, ds) as a left-continuous step function.
StepFunction risk_mass_curve(const Dataset& ds, const Vector& beta);

// Exact sup of |step - f| over [a, b) for continuous monotone f: on each
// constant piece the distance is largest at an endpoint, so endpoint limits
// are enough. f is queried on [a, b]; f(b) serves as the left limit at b.
// Throws std::invalid_argument if sampling detects f violating the stated
// direction.
double sup_distance(const StepFunction& step, const std::function<double(double)>& f,
                    Monotonicity direction, double a, double b);

// Value of a cumulative-hazard curve with a domain guard: *outside is set
// when t lies at or beyond domain_end, where the estimate is not reported.
double evaluate_in_domain(const StepFunction& f, double t, double domain_end,
                          bool* outside);

// Writes `t,value` rows; the first row is `-inf,<initial_value>`.
void write_csv(const StepFunction& f, const std::string& path);
StepFunction load_step_csv(const std::string& path, Continuity side);

}  // namespace cox
