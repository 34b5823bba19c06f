#ifndef PARFIT_ENGINE_HPP
#define PARFIT_ENGINE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "parfit/dataset.hpp"
#include "parfit/errors.hpp"
#include "parfit/pdf.hpp"
#include "parfit/variable.hpp"

namespace parfit {

struct Backend {
  enum class Kind { Serial, Threads };
  Kind kind = Kind::Serial;
  unsigned threads = 1;
  std::size_t chunk_size = 4096; // events per work unit

  static Backend serial() { return Backend{}; }
  static Backend with_threads(unsigned n, std::size_t chunk = 4096) {
    if (n < 1) throw Error("bad-backend", "threads must be >= 1");
    return Backend{Kind::Threads, n, chunk};
  }
};

// Default worker count: the PARFIT_THREADS environment variable when set,
// hardware concurrency otherwise; explicit flags take precedence upstream.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("PARFIT_THREADS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw Error("bad-backend", "PARFIT_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

enum class MetricKind { NegLogLikelihood, ChiSquared };

inline constexpr double kLogFloor = 1e-300;
inline constexpr double kChiSqEps = 1e-9;
inline constexpr double kPenaltyValue = 1e300;
inline constexpr std::size_t kReduceChunk = 4096;

namespace detail {

inline long double chunk_sum(std::span<const double> terms) {
  long double s = 0.0L;
  for (double t : terms) s += t;
  return s;
}

inline long double pairwise(std::span<const long double> parts) {
  if (parts.empty()) return 0.0L;
  if (parts.size() == 1) return parts[0];
  std::size_t half = parts.size() / 2;
  return pairwise(parts.first(half)) + pairwise(parts.subspan(half));
}

} // namespace detail

// Fixed-shape reduction: sequential sums over fixed-size chunks, combined
// by a balanced pairwise tree. The summation order is a pure function of
// the input length, so worker count and scheduling cannot change the
// result. Chunk accumulation in extended precision keeps the rounding
// noise near one ulp of the total, which the finite-difference gradients
// in the fit manager depend on.
inline double reduce(std::span<const double> terms) {
  if (terms.empty()) return 0.0;
  std::vector<long double> parts;
  parts.reserve(terms.size() / kReduceChunk + 1);
  for (std::size_t lo = 0; lo < terms.size(); lo += kReduceChunk) {
    std::size_t hi = std::min(lo + kReduceChunk, terms.size());
    parts.push_back(detail::chunk_sum(terms.subspan(lo, hi - lo)));
  }
  return static_cast<double>(detail::pairwise(parts));
}

inline double reduce(const std::vector<double>& terms) {
  return reduce(std::span<const double>(terms));
}

namespace detail {

// Runs fn(chunk_begin, chunk_end) over [0, n) in chunk_size pieces. Workers
// pull chunks from a shared counter; all writes are element-disjoint so the
// schedule is invisible in the output.
template <typename Fn>
void parallel_chunks(std::size_t n, const Backend& backend, Fn&& fn) {
  if (n == 0) return;
  const std::size_t chunk = backend.chunk_size;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  const unsigned n_workers =
      backend.kind == Backend::Kind::Serial ? 1u : backend.threads;
  if (n_workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      fn(c * chunk, std::min((c + 1) * chunk, n));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    try {
      for (;;) {
        std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= n_chunks) break;
        fn(c * chunk, std::min((c + 1) * chunk, n));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

} // namespace detail

// A PDF graph bound to a data set: the flat EventTable, the finalized
// IndexTable and the registry live here, ready for metric evaluation.
// Safe to move between threads, but a single evaluation at a time.
class BoundModel {
public:
  BoundModel(PdfPtr pdf, const UnbinnedDataSet& ds, GridSpec grid = GridSpec{})
      : pdf_(std::move(pdf)), grid_(grid), binned_(false) {
    GraphFinalizer fin(registry_, ds.observables());
    table_ = fin.finalize(pdf_);
    events_ = to_event_table(ds);
  }

  BoundModel(PdfPtr pdf, const BinnedDataSet& ds, GridSpec grid = GridSpec{})
      : pdf_(std::move(pdf)), grid_(grid), binned_(true) {
    // content and volume columns sit directly after the observable columns
    GraphFinalizer fin(registry_, ds.observables(), /*reserved_columns=*/2);
    table_ = fin.finalize(pdf_);
    events_ = to_event_table(ds);
    n_data_obs_ = ds.observables().size();
    total_content_ = ds.total_content();
  }

  ParameterRegistry& registry() { return registry_; }
  const ParameterRegistry& registry() const { return registry_; }
  const IndexTable& table() const { return table_; }
  const PdfPtr& pdf() const { return pdf_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t n_events() const { return events_.n_events; }
  bool binned() const { return binned_; }
  std::uint64_t log_floor_count() const { return floor_count_.load(); }

  double eval_metric(std::span<const double> params, MetricKind metric,
                     const Backend& backend) {
    if (params.size() != registry_.n_parameters())
      throw Error("size-mismatch", "eval_metric: parameter vector length");
    if (binned_ && metric == MetricKind::NegLogLikelihood)
      throw Error("metric-mismatch", "NLL needs an unbinned data set");
    if (!binned_ && metric == MetricKind::ChiSquared)
      throw Error("metric-mismatch", "chi-squared needs a binned data set");
    if (!pdf_->params_valid(params, table_)) return kPenaltyValue;
    try {
      pdf_->refresh_normalizations(params, table_, grid_);
    } catch (const Error&) {
      return kPenaltyValue; // degenerate normalization: let the search retreat
    }

    const std::size_t n = events_.n_events;
    terms_.resize(n);
    const double norm = pdf_->cached_norm();

    detail::parallel_chunks(n, backend, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> evt(table_.n_columns(), 0.0);
      if (metric == MetricKind::NegLogLikelihood) {
        for (std::size_t e = lo; e < hi; ++e) {
          gather(e, evt);
          double v = pdf_->raw(evt, params, table_) / norm;
          if (v < kLogFloor) {
            v = kLogFloor;
            floor_count_.fetch_add(1, std::memory_order_relaxed);
          }
          terms_[e] = -std::log(v);
        }
      } else {
        for (std::size_t e = lo; e < hi; ++e) {
          gather(e, evt);
          double content = evt[n_data_obs_];
          double volume = evt[n_data_obs_ + 1];
          double mu =
              total_content_ * (pdf_->raw(evt, params, table_) / norm) * volume;
          double diff = content - mu;
          terms_[e] = diff * diff / std::max(mu, kChiSqEps);
        }
      }
    });

    double result = reduce(terms_);
    if (!std::isfinite(result)) {
      for (std::size_t e = 0; e < n; ++e)
        if (!std::isfinite(terms_[e]))
          throw Error("non-finite-metric",
                      "first offending event index " + std::to_string(e));
      throw Error("non-finite-metric", "non-finite reduction");
    }
    return result;
  }

private:
  void gather(std::size_t event, std::vector<double>& evt) const {
    for (std::size_t c = 0; c < events_.n_columns; ++c)
      evt[c] = events_.values[c * events_.n_events + event];
  }

  PdfPtr pdf_;
  ParameterRegistry registry_;
  IndexTable table_;
  EventTable events_;
  GridSpec grid_;
  bool binned_ = false;
  std::size_t n_data_obs_ = 0;
  double total_content_ = 0.0;
  std::vector<double> terms_;
  std::atomic<std::uint64_t> floor_count_{0};
};

} // namespace parfit

#endif
