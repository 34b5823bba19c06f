#ifndef PARFIT_DATASET_HPP
#define PARFIT_DATASET_HPP

#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "parfit/errors.hpp"
#include "parfit/variable.hpp"

namespace parfit {

// Host-side unbinned container. addEvent snapshots the current value of
// each bound observable; later mutation of the Variable leaves stored rows
// untouched.
class UnbinnedDataSet {
public:
  explicit UnbinnedDataSet(std::vector<VariablePtr> observables)
      : observables_(std::move(observables)) {
    if (observables_.empty())
      throw Error("empty-observables", "UnbinnedDataSet needs >= 1 observable");
    for (std::size_t i = 0; i < observables_.size(); ++i)
      for (std::size_t j = i + 1; j < observables_.size(); ++j)
        if (observables_[i] == observables_[j] ||
            observables_[i]->name == observables_[j]->name)
          throw Error("duplicate-observable", observables_[i]->name);
  }

  explicit UnbinnedDataSet(const VariablePtr& obs)
      : UnbinnedDataSet(std::vector<VariablePtr>{obs}) {}

  void add_event() {
    std::vector<double> row;
    row.reserve(observables_.size());
    for (const auto& o : observables_) row.push_back(o->value);
    rows_.push_back(std::move(row));
  }

  const std::vector<VariablePtr>& observables() const { return observables_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::size_t n_events() const { return rows_.size(); }
  std::size_t n_columns() const { return observables_.size(); }

private:
  std::vector<VariablePtr> observables_;
  std::vector<std::vector<double>> rows_;
};

// Uniformly binned container. Bin b of observable i spans
// [lower + b*w, lower + (b+1)*w); the last bin's upper edge is inclusive.
class BinnedDataSet {
public:
  BinnedDataSet(std::vector<VariablePtr> observables, std::vector<std::size_t> bins)
      : observables_(std::move(observables)), bins_(std::move(bins)) {
    if (observables_.empty())
      throw Error("empty-observables", "BinnedDataSet needs >= 1 observable");
    if (observables_.size() != bins_.size())
      throw Error("dimension-mismatch", "observable/bin count mismatch");
    for (std::size_t b : bins_)
      if (b < 1) throw Error("dimension-mismatch", "bins must be >= 1");
    std::size_t total = 1;
    for (std::size_t b : bins_) total *= b;
    contents_.assign(total, 0.0);
  }

  void fill(const std::vector<double>& point, double weight = 1.0) {
    if (point.size() != observables_.size())
      throw Error("dimension-mismatch", "fill point arity");
    contents_[flat_bin(point)] += weight;
  }

  std::size_t flat_bin(const std::vector<double>& point) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < observables_.size(); ++i) {
      const auto& o = *observables_[i];
      double w = (o.upper - o.lower) / static_cast<double>(bins_[i]);
      double x = point[i];
      if (x < o.lower || x > o.upper)
        throw Error("out-of-range", "fill: '" + o.name + "' outside range");
      std::size_t b = static_cast<std::size_t>((x - o.lower) / w);
      if (b >= bins_[i]) {
        // only the exact upper edge lands here; it belongs to the last bin
        if (x == o.upper)
          b = bins_[i] - 1;
        else
          throw Error("out-of-range", "fill: '" + o.name + "' outside range");
      }
      // interior upper edges are exclusive by the floor above, but the
      // overall upper edge is only in range when it is the last bin's
      if (x == o.upper && b != bins_[i] - 1)
        throw Error("out-of-range", "fill: '" + o.name + "' at excluded edge");
      idx = idx * bins_[i] + b;
    }
    return idx;
  }

  double bin_center(std::size_t obs, std::size_t b) const {
    const auto& o = *observables_[obs];
    double w = (o.upper - o.lower) / static_cast<double>(bins_[obs]);
    return o.lower + (static_cast<double>(b) + 0.5) * w;
  }

  double bin_volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < observables_.size(); ++i) {
      const auto& o = *observables_[i];
      v *= (o.upper - o.lower) / static_cast<double>(bins_[i]);
    }
    return v;
  }

  double total_content() const {
    return std::accumulate(contents_.begin(), contents_.end(), 0.0);
  }

  const std::vector<VariablePtr>& observables() const { return observables_; }
  const std::vector<std::size_t>& bins() const { return bins_; }
  const std::vector<double>& contents() const { return contents_; }
  std::size_t n_bins() const { return contents_.size(); }

private:
  std::vector<VariablePtr> observables_;
  std::vector<std::size_t> bins_;
  std::vector<double> contents_;
};

// Flat, contiguous, column-major event store: all events of column 0, then
// column 1, and so on. Binned sets emit one pseudo-event per bin whose
// columns are the bin centers followed by a content column and a bin-volume
// column.
struct EventTable {
  std::size_t n_events = 0;
  std::size_t n_columns = 0;
  std::vector<double> values; // size n_events * n_columns

  double at(std::size_t event, std::size_t column) const {
    return values[column * n_events + event];
  }

  void gather_row(std::size_t event, std::vector<double>& out) const {
    for (std::size_t c = 0; c < n_columns; ++c)
      out[c] = values[c * n_events + event];
  }
};

inline EventTable to_event_table(const UnbinnedDataSet& ds) {
  EventTable t;
  t.n_events = ds.n_events();
  t.n_columns = ds.n_columns();
  t.values.resize(t.n_events * t.n_columns);
  for (std::size_t e = 0; e < t.n_events; ++e)
    for (std::size_t c = 0; c < t.n_columns; ++c)
      t.values[c * t.n_events + e] = ds.rows()[e][c];
  return t;
}

inline EventTable to_event_table(const BinnedDataSet& ds) {
  const std::size_t nobs = ds.observables().size();
  EventTable t;
  t.n_events = ds.n_bins();
  t.n_columns = nobs + 2; // centers, content, volume
  t.values.resize(t.n_events * t.n_columns);
  const double vol = ds.bin_volume();
  for (std::size_t flat = 0; flat < ds.n_bins(); ++flat) {
    // decode flat index (row-major over observables, as in flat_bin)
    std::size_t rem = flat;
    std::vector<std::size_t> idx(nobs);
    for (std::size_t i = nobs; i-- > 0;) {
      idx[i] = rem % ds.bins()[i];
      rem /= ds.bins()[i];
    }
    for (std::size_t i = 0; i < nobs; ++i)
      t.values[i * t.n_events + flat] = ds.bin_center(i, idx[i]);
    t.values[nobs * t.n_events + flat] = ds.contents()[flat];
    t.values[(nobs + 1) * t.n_events + flat] = vol;
  }
  return t;
}

// Text format: '#'-prefixed header naming the observables, then one event
// per line, columns in observable order, printed at full round-trip
// precision (%.17g).
inline void write_text(const UnbinnedDataSet& ds, std::ostream& out) {
  out << '#';
  for (const auto& o : ds.observables()) out << ' ' << o->name;
  out << '\n';
  char buf[40];
  for (const auto& row : ds.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      if (c) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

inline void write_text_file(const UnbinnedDataSet& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("io-error", "cannot open '" + path + "' for writing");
  write_text(ds, f);
}

inline UnbinnedDataSet read_text(std::istream& in,
                                 const std::vector<VariablePtr>& observables) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw Error("bad-format", "missing '#' header line");
  {
    std::istringstream hs(line.substr(1));
    std::string name;
    std::size_t i = 0;
    while (hs >> name) {
      if (i >= observables.size() || observables[i]->name != name)
        throw Error("bad-format", "header observable '" + name +
                                      "' does not match expected order");
      ++i;
    }
    if (i != observables.size())
      throw Error("bad-format", "header names fewer observables than expected");
  }
  UnbinnedDataSet ds(observables);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    for (const auto& o : observables) {
      double v;
      if (!(ls >> v)) throw Error("bad-format", "short row in data file");
      o->value = v;
    }
    ds.add_event();
  }
  return ds;
}

inline UnbinnedDataSet read_text_file(const std::string& path,
                                      const std::vector<VariablePtr>& observables) {
  std::ifstream f(path);
  if (!f) throw Error("io-error", "cannot open '" + path + "'");
  return read_text(f, observables);
}

} // namespace parfit

#endif
