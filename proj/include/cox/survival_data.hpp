#pragma once

#include <stdexcept>
#include <string>

#include "cox/types.hpp"

namespace cox {

// One right-censored observation: follow-up time, event indicator (1 = the
// event was observed, 0 = censored), covariate row.
struct Observation {
  double time = 0.0;
  int status = 0;
  Vector covariates;
};

struct ValidationReport {
  Index n = 0;
  Index dim = 0;
  Index events = 0;
  Index tied_times = 0;  // observations sharing a time with an earlier row
  bool has_ties() const { return tied_times > 0; }
};

struct CsvError : std::runtime_error {
  explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

// Immutable sample of right-censored survival rows, kept sorted by time
// (stable, so equal times preserve input order).
class Dataset {
 public:
  Dataset(Vector times, IntVector status, Matrix covariates);

  Index size() const { return times_.size(); }
  Index dim() const { return covariates_.cols(); }

  const Vector& times() const { return times_; }
  const IntVector& status() const { return status_; }
  const Matrix& covariates() const { return covariates_; }

  double time(Index i) const { return times_(i); }
  int status_of(Index i) const { return status_(i); }
  Eigen::MatrixXd::ConstRowXpr covariate_row(Index i) const {
    return covariates_.row(i);
  }

  Index num_events() const;
  // Uncensored times in ascending order, duplicates retained.
  Vector event_times() const;
  ValidationReport validation() const;

 private:
  Vector times_;
  IntVector status_;
  Matrix covariates_;
};

// Reads `time,status,z1,...,zd` with a header row. Errors carry the
// 1-based physical line number (header is line 1).
Dataset load_csv(const std::string& path);
void write_csv(const Dataset& ds, const std::string& path);

}  // namespace cox
