#ifndef PARFIT_GENERATE_HPP
#define PARFIT_GENERATE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "parfit/dataset.hpp"
#include "parfit/engine.hpp"
#include "parfit/errors.hpp"
#include "parfit/pdf.hpp"

namespace parfit {

// Deterministic uniform doubles in [0, 1); the bit recipe is fixed here
// rather than left to the distribution implementation so identical seeds
// give identical files everywhere.
class ToyRng {
public:
  explicit ToyRng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::mt19937_64 gen_;
};

// Accept-reject sampling against the normalized density. The envelope is
// the maximum density found on the normalization grid, padded by 10%; a
// candidate density above the envelope aborts rather than biasing the
// sample.
inline UnbinnedDataSet generate_events(const PdfPtr& pdf,
                                       const std::vector<VariablePtr>& observables,
                                       std::size_t n_events, std::uint64_t seed,
                                       GridSpec grid = GridSpec{}) {
  if (n_events < 1) throw Error("bad-arity", "generate_events: n_events >= 1");
  ParameterRegistry reg;
  IndexTable table = finalize(reg, pdf, observables);
  std::vector<double> params = reg.export_values();
  pdf->refresh_normalizations(params, table, grid);
  const double norm = pdf->cached_norm();

  const auto& box = pdf->box();
  std::vector<double> evt(table.n_columns(), 0.0);

  // scan the midpoint grid for the density maximum
  double dmax = 0.0;
  {
    const std::size_t dims = box.size();
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) total *= grid.points;
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t d = dims; d-- > 0;) {
        std::size_t k = rem % grid.points;
        rem /= grid.points;
        const auto& o = *box[d].first;
        double h = (o.upper - o.lower) / static_cast<double>(grid.points);
        evt[box[d].second] = o.lower + (static_cast<double>(k) + 0.5) * h;
      }
      double d_here = pdf->raw(evt, params, table) / norm;
      if (d_here > dmax) dmax = d_here;
    }
  }
  const double envelope = dmax * 1.1;
  if (!(envelope > 0))
    throw Error("envelope-failure", "density maximum is not positive");

  UnbinnedDataSet ds(observables);
  ToyRng rng(seed);
  while (ds.n_events() < n_events) {
    for (const auto& [var, col] : box)
      evt[col] = rng.uniform(var->lower, var->upper);
    double density = pdf->raw(evt, params, table) / norm;
    if (density > envelope)
      throw Error("envelope-failure",
                  "density " + std::to_string(density) + " exceeds envelope " +
                      std::to_string(envelope));
    if (rng.uniform() * envelope < density) {
      for (const auto& [var, col] : box) var->value = evt[col];
      ds.add_event();
    }
  }
  return ds;
}

} // namespace parfit

#endif
