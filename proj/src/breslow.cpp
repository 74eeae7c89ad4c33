#include "cox/breslow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace cox {

double StepFunction::operator()(double t) const {
  const double* begin = jumps.data();
  const double* end = begin + jumps.size();
  // Index of the last jump at or before t (right-continuous) or strictly
  // before t (left-continuous).
  const Index k = (side == Continuity::right ? std::upper_bound(begin, end, t)
                                             : std::lower_bound(begin, end, t)) -
                  begin - 1;
  return k < 0 ? initial_value : values(k);
}

StepFunction breslow_estimator(const Dataset& ds, const Vector& beta) {
  const RiskSetCurves curves = risk_set_curves(ds, beta, false);
  const Index n = ds.size();
  const Index distinct = curves.times.size();

  std::vector<Index> event_counts(static_cast<std::size_t>(distinct), 0);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    if (ds.time(i) != curves.times(k)) ++k;
    event_counts[static_cast<std::size_t>(k)] += ds.status_of(i);
  }

  Index jump_count = 0;
  for (Index c : event_counts) jump_count += (c > 0);

  StepFunction out;
  out.side = Continuity::right;
  out.initial_value = 0.0;
  out.jumps.resize(jump_count);
  out.values.resize(jump_count);
  double running = 0.0;
  Index j = 0;
  for (Index m = 0; m < distinct; ++m) {
    const Index c = event_counts[static_cast<std::size_t>(m)];
    if (c == 0) continue;
    running += static_cast<double>(c) /
               (static_cast<double>(n) * curves.mass(m));
    out.jumps(j) = curves.times(m);
    out.values(j) = running;
    ++j;
  }
  return out;
}

StepFunction risk_mass_curve(const Dataset& ds, const Vector& beta) {
  const RiskSetCurves curves = risk_set_curves(ds, beta, false);
  const Index distinct = curves.times.size();
  StepFunction out;
  out.side = Continuity::left;
  out.initial_value = curves.mass(0);
  out.jumps = curves.times;
  out.values.resize(distinct);
  for (Index k = 0; k + 1 < distinct; ++k) out.values(k) = curves.mass(k + 1);
  out.values(distinct - 1) = 0.0;
  return out;
}

double sup_distance(const StepFunction& step, const std::function<double(double)>& f,
                    Monotonicity direction, double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("sup_distance: requires finite a < b");

  // Spot-check the claimed monotone direction on a grid.
  {
    const int grid = 256;
    double prev = f(a);
    double scale = std::abs(prev);
    std::vector<double> samples(grid + 1);
    samples[0] = prev;
    for (int i = 1; i <= grid; ++i) {
      const double t = a + (b - a) * static_cast<double>(i) / grid;
      samples[static_cast<std::size_t>(i)] = f(t);
      scale = std::max(scale, std::abs(samples[static_cast<std::size_t>(i)]));
    }
    const double slack = 1e-9 * (1.0 + scale);
    for (int i = 1; i <= grid; ++i) {
      const double cur = samples[static_cast<std::size_t>(i)];
      const bool bad = direction == Monotonicity::nonincreasing
                           ? cur > samples[static_cast<std::size_t>(i - 1)] + slack
                           : cur < samples[static_cast<std::size_t>(i - 1)] - slack;
      if (bad)
        throw std::invalid_argument("sup_distance: reference function is not monotone in "
                                    "the stated direction");
    }
  }

  struct Piece {
    double lo, hi;
    bool lo_closed, hi_closed;
    double value;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Piece> pieces;
  const Index count = step.num_jumps();
  const bool right = step.side == Continuity::right;
  if (count == 0) {
    pieces.push_back({-inf, inf, false, false, step.initial_value});
  } else {
    pieces.push_back({-inf, step.jumps(0), false, !right, step.initial_value});
    for (Index k = 0; k < count; ++k) {
      const double hi = k + 1 < count ? step.jumps(k + 1) : inf;
      pieces.push_back({step.jumps(k), hi, right, k + 1 < count && !right, step.values(k)});
    }
  }

  double best = 0.0;
  for (const Piece& p : pieces) {
    const double lo = std::max(p.lo, a);
    const double hi = std::min(p.hi, b);
    const bool lo_closed = p.lo < a ? true : p.lo_closed;
    const bool hi_closed = p.hi > b ? false : p.hi_closed && p.hi < b;
    if (lo > hi) continue;
    if (lo == hi && !(lo_closed && hi_closed)) continue;
    // f is continuous, so endpoint values dominate |value - f| on the piece
    // whether or not the endpoints belong to it.
    best = std::max({best, std::abs(p.value - f(lo)), std::abs(p.value - f(hi))});
  }
  return best;
}

double evaluate_in_domain(const StepFunction& f, double t, double domain_end,
                          bool* outside) {
  if (outside != nullptr) *outside = !(t < domain_end);
  return f(t);
}

void write_csv(const StepFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open file for writing");
  char buf[64];
  out << "t,value\n";
  std::snprintf(buf, sizeof(buf), "%.17g", f.initial_value);
  out << "-inf," << buf << "\n";
  for (Index k = 0; k < f.num_jumps(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", f.jumps(k));
    out << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", f.values(k));
    out << "," << buf << "\n";
  }
  if (!out) throw CsvError(path + ": write failed");
}

StepFunction load_step_csv(const std::string& path, Continuity side) {
  std::ifstream in(path);
  if (!in) throw CsvError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0)
    throw CsvError(path + ", row 1: header must be t,value");

  StepFunction out;
  out.side = side;
  std::vector<double> jumps, values;
  long row = 1;
  bool have_initial = false;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream ls(line);
    std::string tf, vf;
    if (!std::getline(ls, tf, ',') || !std::getline(ls, vf))
      throw CsvError(path + ", row " + std::to_string(row) + ": expected t,value");
    const double v = std::strtod(vf.c_str(), nullptr);
    if (!have_initial) {
      if (tf != "-inf")
        throw CsvError(path + ", row 2: first row must carry t=-inf and the initial value");
      out.initial_value = v;
      have_initial = true;
      continue;
    }
    jumps.push_back(std::strtod(tf.c_str(), nullptr));
    values.push_back(v);
  }
  if (!have_initial) throw CsvError(path + ": missing initial-value row");
  out.jumps.resize(static_cast<Index>(jumps.size()));
  out.values.resize(static_cast<Index>(values.size()));
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    out.jumps(static_cast<Index>(k)) = jumps[k];
    out.values(static_cast<Index>(k)) = values[k];
  }
  for (Index k = 1; k < out.num_jumps(); ++k)
    if (!(out.jumps(k) > out.jumps(k - 1)))
      throw CsvError(path + ": jump times must be strictly increasing");
  return out;
}

}  // namespace cox
