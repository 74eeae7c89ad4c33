#include "cox/survival_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

namespace cox {

namespace {

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(trimmed(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& field, const std::string& where) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end || field.empty())
    throw CsvError(where + ": expected a number, got \"" + field + "\"");
  return value;
}

}  // namespace

Dataset::Dataset(Vector times, IntVector status, Matrix covariates)
    : times_(std::move(times)),
      status_(std::move(status)),
      covariates_(std::move(covariates)) {
  const Index n = times_.size();
  if (n == 0) throw std::invalid_argument("dataset must contain at least one observation");
  if (status_.size() != n || covariates_.rows() != n)
    throw std::invalid_argument("times, status and covariates must have matching lengths");
  if (covariates_.cols() < 1)
    throw std::invalid_argument("dataset must have at least one covariate column");
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(times_(i)) || times_(i) < 0.0)
      throw std::invalid_argument("times must be finite and nonnegative");
    if (status_(i) != 0 && status_(i) != 1)
      throw std::invalid_argument("status must be 0 or 1");
  }
  if (!covariates_.allFinite())
    throw std::invalid_argument("covariates must be finite");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return times_(a) < times_(b); });

  Vector t(n);
  IntVector s(n);
  Matrix z(n, covariates_.cols());
  for (Index k = 0; k < n; ++k) {
    t(k) = times_(order[static_cast<std::size_t>(k)]);
    s(k) = status_(order[static_cast<std::size_t>(k)]);
    z.row(k) = covariates_.row(order[static_cast<std::size_t>(k)]);
  }
  times_ = std::move(t);
  status_ = std::move(s);
  covariates_ = std::move(z);
}

Index Dataset::num_events() const {
  Index m = 0;
  for (Index i = 0; i < size(); ++i) m += status_(i);
  return m;
}

Vector Dataset::event_times() const {
  Vector out(num_events());
  Index k = 0;
  for (Index i = 0; i < size(); ++i)
    if (status_(i) == 1) out(k++) = times_(i);
  return out;
}

ValidationReport Dataset::validation() const {
  ValidationReport rep;
  rep.n = size();
  rep.dim = dim();
  rep.events = num_events();
  for (Index i = 1; i < size(); ++i)
    if (times_(i) == times_(i - 1)) ++rep.tied_times;
  return rep;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path + ": cannot open file");

  std::string line;
  if (!std::getline(in, line)) throw CsvError(path + ": empty file");
  const auto header = split_fields(line);
  if (header.size() < 3 || header[0] != "time" || header[1] != "status")
    throw CsvError(path + ", row 1: header must be time,status,z1,...,zd");
  const Index d = static_cast<Index>(header.size()) - 2;

  std::vector<double> times;
  std::vector<int> status;
  std::vector<double> covs;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trimmed(line).empty()) continue;
    const std::string where = path + ", row " + std::to_string(row);
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != d + 2)
      throw CsvError(where + ": expected " + std::to_string(d + 2) +
                     " fields, got " + std::to_string(fields.size()));
    const double t = parse_double(fields[0], where);
    if (!std::isfinite(t) || t < 0.0)
      throw CsvError(where + ": time must be finite and nonnegative");
    const double sraw = parse_double(fields[1], where);
    if (sraw != 0.0 && sraw != 1.0)
      throw CsvError(where + ": status must be 0 or 1 (got " + fields[1] + ")");
    times.push_back(t);
    status.push_back(static_cast<int>(sraw));
    for (Index k = 0; k < d; ++k) {
      const double z = parse_double(fields[static_cast<std::size_t>(k) + 2], where);
      if (!std::isfinite(z)) throw CsvError(where + ": covariate must be finite");
      covs.push_back(z);
    }
  }
  const Index n = static_cast<Index>(times.size());
  if (n == 0) throw CsvError(path + ": no data rows");

  Vector t(n);
  IntVector s(n);
  Matrix z(n, d);
  for (Index i = 0; i < n; ++i) {
    t(i) = times[static_cast<std::size_t>(i)];
    s(i) = status[static_cast<std::size_t>(i)];
    for (Index k = 0; k < d; ++k)
      z(i, k) = covs[static_cast<std::size_t>(i * d + k)];
  }
  return Dataset(std::move(t), std::move(s), std::move(z));
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open file for writing");
  out << "time,status";
  for (Index k = 0; k < ds.dim(); ++k) out << ",z" << (k + 1);
  out << "\n";
  char buf[64];
  for (Index i = 0; i < ds.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", ds.time(i));
    out << buf << "," << ds.status_of(i);
    for (Index k = 0; k < ds.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.covariates()(i, k));
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw CsvError(path + ": write failed");
}

}  // namespace cox
