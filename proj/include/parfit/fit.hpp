#ifndef PARFIT_FIT_HPP
#define PARFIT_FIT_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "parfit/engine.hpp"
#include "parfit/errors.hpp"
#include "parfit/variable.hpp"

namespace parfit {

enum class MinimizerKind { QuasiNewton, NelderMead };

struct FitConfig {
  MinimizerKind minimizer = MinimizerKind::QuasiNewton;
  std::size_t max_iterations = 10000;
  double gradient_tolerance = 1e-6; // max-norm of the internal-space gradient
  double simplex_tolerance = 1e-8;  // relative simplex spread
};

enum class FitStatus { Converged, MaxIterations, Failed };

struct FitResult {
  FitStatus status = FitStatus::Failed;
  std::vector<std::string> names;
  std::vector<double> params;        // external values
  std::vector<double> uncertainties; // external; empty meaning depends on flag
  bool uncertainties_available = false;
  double metric_value = 0.0;
  std::size_t n_metric_calls = 0;
  double wall_time_s = 0.0;
  double grad_max_norm = std::numeric_limits<double>::quiet_NaN();

  bool converged() const { return status == FitStatus::Converged; }

  // Stable-keyed text report; one "key value..." pair per line.
  std::string to_report() const {
    std::ostringstream out;
    const char* st = status == FitStatus::Converged      ? "converged"
                     : status == FitStatus::MaxIterations ? "max-iterations"
                                                          : "failed";
    char buf[64];
    out << "status " << st << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", metric_value);
    out << "metric_value " << buf << '\n';
    out << "metric_calls " << n_metric_calls << '\n';
    std::snprintf(buf, sizeof buf, "%.6g", wall_time_s);
    out << "wall_time_s " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.6g", grad_max_norm);
    out << "grad_max_norm " << buf << '\n';
    out << "uncertainties " << (uncertainties_available ? "available" : "unavailable")
        << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << "param " << names[i] << ' ';
      std::snprintf(buf, sizeof buf, "%.17g", params[i]);
      out << buf << ' ';
      std::snprintf(buf, sizeof buf, "%.17g",
                    uncertainties_available ? uncertainties[i] : 0.0);
      out << buf << '\n';
    }
    return out.str();
  }
};

// MINUIT-style bound transform: external p in [a, b] maps to unbounded
// internal u through p = a + (b - a) (sin u + 1) / 2, so every value the
// objective sees is inside its limits.
class BoundTransform {
public:
  explicit BoundTransform(const ParameterRegistry& reg) {
    for (const auto& p : reg.parameters()) {
      lower_.push_back(p->lower);
      upper_.push_back(p->upper);
      steps_.push_back(p->step);
    }
  }

  std::size_t size() const { return lower_.size(); }

  double to_external(std::size_t i, double u) const {
    return lower_[i] + (upper_[i] - lower_[i]) * (std::sin(u) + 1.0) / 2.0;
  }

  double to_internal(std::size_t i, double p) const {
    double z = 2.0 * (p - lower_[i]) / (upper_[i] - lower_[i]) - 1.0;
    z = std::clamp(z, -1.0, 1.0);
    return std::asin(z);
  }

  // dp/du
  double jacobian(std::size_t i, double u) const {
    return (upper_[i] - lower_[i]) * std::cos(u) / 2.0;
  }

  std::vector<double> to_external(const std::vector<double>& u) const {
    std::vector<double> p(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) p[i] = to_external(i, u[i]);
    return p;
  }

  std::vector<double> to_internal(const std::vector<double>& p) const {
    std::vector<double> u(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) u[i] = to_internal(i, p[i]);
    return u;
  }

  // Finite-difference step per internal coordinate, from the Variable's
  // external step scaled through the local Jacobian. The step balances two
  // error sources of the five-point gradient stencil: rounding noise of the
  // summed metric (falls as 1/h) against the O(h^4) truncation term, which
  // grows with n_events through the fifth derivative.
  double fd_step(std::size_t i, double u) const {
    double j = std::abs(jacobian(i, u));
    double scaled = j > 1e-12 ? steps_[i] / j : steps_[i];
    return std::max(1e-5, 2e-3 * scaled);
  }

private:
  std::vector<double> lower_, upper_, steps_;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Richardson-extrapolated central differences (five-point stencil); the
// extrapolation cancels the h^2 truncation term, which otherwise leaves a
// bias above the gradient tolerance near the minimum of a large summed
// metric. A probe that comes back non-finite falls back to a one-sided
// difference and sets the flag.
inline std::vector<double> numeric_gradient(const Objective& f,
                                            const std::vector<double>& u,
                                            const std::vector<double>& h,
                                            bool* one_sided_flag = nullptr) {
  std::vector<double> g(u.size());
  std::vector<double> probe = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + h[i];
    double fp = f(probe);
    probe[i] = u[i] - h[i];
    double fm = f(probe);
    probe[i] = u[i] + 2.0 * h[i];
    double fp2 = f(probe);
    probe[i] = u[i] - 2.0 * h[i];
    double fm2 = f(probe);
    probe[i] = u[i];
    if (std::isfinite(fp) && std::isfinite(fm) && std::isfinite(fp2) &&
        std::isfinite(fm2)) {
      g[i] = (8.0 * (fp - fm) - (fp2 - fm2)) / (12.0 * h[i]);
    } else if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h[i]);
    } else {
      double f0 = f(u);
      if (std::isfinite(fp))
        g[i] = (fp - f0) / h[i];
      else if (std::isfinite(fm))
        g[i] = (f0 - fm) / h[i];
      else
        throw Error("non-finite-objective", "gradient probe failed both sides");
      if (one_sided_flag) *one_sided_flag = true;
    }
  }
  return g;
}

inline double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Symmetric finite-difference Hessian.
inline std::vector<std::vector<double>> numeric_hessian(const Objective& f,
                                                        const std::vector<double>& u,
                                                        const std::vector<double>& h) {
  const std::size_t n = u.size();
  std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
  double f0 = f(u);
  std::vector<double> x = u;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = u[i] + h[i];
    double fp = f(x);
    x[i] = u[i] - h[i];
    double fm = f(x);
    x[i] = u[i];
    H[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      x[i] = u[i] + h[i]; x[j] = u[j] + h[j];
      double fpp = f(x);
      x[j] = u[j] - h[j];
      double fpm = f(x);
      x[i] = u[i] - h[i]; x[j] = u[j] + h[j];
      double fmp = f(x);
      x[j] = u[j] - h[j];
      double fmm = f(x);
      x[i] = u[i]; x[j] = u[j];
      H[i][j] = H[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return H;
}

// Cholesky-based inverse; returns false when the matrix is not positive
// definite (uncertainties then flagged unavailable).
inline bool invert_spd(const std::vector<std::vector<double>>& A,
                       std::vector<std::vector<double>>& inv) {
  const std::size_t n = A.size();
  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  // solve L L^T X = I column by column
  inv.assign(n, std::vector<double>(n, 0.0));
  std::vector<double> y(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= L[i][k] * y[k];
      y[i] = s / L[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= L[k][i] * inv[k][c];
      inv[i][c] = s / L[i][i];
    }
  }
  return true;
}

// Inverse finite-difference Hessian at a converged point; empty on a
// non-positive-definite Hessian.
inline std::vector<std::vector<double>> covariance(const Objective& f,
                                                   const std::vector<double>& u_star,
                                                   const std::vector<double>& h) {
  auto H = numeric_hessian(f, u_star, h);
  std::vector<std::vector<double>> cov;
  if (!invert_spd(H, cov)) return {};
  return cov;
}

namespace detail {

struct MinimizeOutcome {
  std::vector<double> u;
  double f = 0.0;
  FitStatus status = FitStatus::Failed;
  std::vector<double> grad;
};

// BFGS with Armijo backtracking (c1 = 1e-4, halving) in internal space.
// Near the optimum the objective goes numerically flat; equal function
// values still satisfy the Armijo inequality there, so the quasi-Newton
// steps keep shrinking the gradient until the tolerance is met.
inline MinimizeOutcome bfgs(const Objective& f, std::vector<double> u,
                            const FitConfig& cfg,
                            const std::function<std::vector<double>(const std::vector<double>&)>& grad_fn) {
  const std::size_t n = u.size();
  MinimizeOutcome out;
  double fu = f(u);
  if (!std::isfinite(fu)) {
    out.u = std::move(u);
    out.status = FitStatus::Failed;
    return out;
  }
  std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) H[i][i] = 1.0;
  std::vector<double> g = grad_fn(u);
  const double c1 = 1e-4;
  bool reset_used = false;
  std::size_t iter = 0;
  FitStatus status = FitStatus::MaxIterations;
  for (; iter < cfg.max_iterations; ++iter) {
    if (max_norm(g) <= cfg.gradient_tolerance) {
      status = FitStatus::Converged;
      break;
    }
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i] -= H[i][j] * g[j];
    double gd = 0.0;
    for (std::size_t i = 0; i < n; ++i) gd += g[i] * d[i];
    if (!(gd < 0.0)) { // not a descent direction: restart from steepest
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(H[i].begin(), H[i].end(), 0.0);
        H[i][i] = 1.0;
        d[i] = -g[i];
      }
      gd = 0.0;
      for (std::size_t i = 0; i < n; ++i) gd += g[i] * d[i];
      if (!(gd < 0.0)) { status = FitStatus::Converged; break; } // g == 0
    }
    double t = 1.0;
    std::vector<double> u_new(n);
    double f_new = fu;
    bool accepted = false;
    while (t > 1e-16) {
      for (std::size_t i = 0; i < n; ++i) u_new[i] = u[i] + t * d[i];
      f_new = f(u_new);
      if (std::isfinite(f_new) && f_new <= fu + c1 * t * gd) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    bool stagnant = accepted;
    if (accepted)
      for (std::size_t i = 0; i < n; ++i)
        if (u_new[i] != u[i]) { stagnant = false; break; }
    if (!accepted || stagnant) {
      if (!accepted && !reset_used) { // one restart with a fresh identity metric
        reset_used = true;
        for (std::size_t i = 0; i < n; ++i) {
          std::fill(H[i].begin(), H[i].end(), 0.0);
          H[i][i] = 1.0;
        }
        continue;
      }
      // Endgame: near the minimum the objective decrease per step drops
      // below its own rounding quantum and the Armijo test goes blind (it
      // either freezes on a zero step or rejects everything). The numeric
      // gradient still resolves, since its differences span many quanta, so
      // finish with damped quasi-Newton steps accepted on gradient-norm
      // decrease instead.
      bool moved = false;
      const double gnorm = max_norm(g);
      double td = 1.0;
      for (int attempt = 0; attempt < 8 && !moved; ++attempt, td *= 0.5) {
        bool distinct = false;
        for (std::size_t i = 0; i < n; ++i) {
          u_new[i] = u[i] + td * d[i];
          if (u_new[i] != u[i]) distinct = true;
        }
        if (!distinct) break;
        std::vector<double> g_try = grad_fn(u_new);
        if (max_norm(g_try) < gnorm) {
          double f_try = f(u_new);
          if (std::isfinite(f_try)) {
            u = u_new;
            fu = f_try;
            g = std::move(g_try);
            moved = true;
          }
        }
      }
      if (!moved) break; // gradient floor reached; status decided below
      reset_used = false;
      continue; // curvature pair unreliable at this scale: skip the update
    }
    reset_used = false;
    std::vector<double> g_new = grad_fn(u_new);
    std::vector<double> s(n), y(n);
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = u_new[i] - u[i];
      y[i] = g_new[i] - g[i];
      sy += s[i] * y[i];
    }
    // curvature condition: any positive s.y keeps the update well defined;
    // near the minimum the pairs get tiny, and refusing them would freeze
    // the metric at a stale scale and stall the last few digits
    if (sy > 0.0 && std::isfinite(sy)) {
      // BFGS inverse update: H <- (I - s y^T/sy) H (I - y s^T/sy) + s s^T/sy
      std::vector<double> Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i][j] * y[j];
      double yHy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yHy += y[i] * Hy[i];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          H[i][j] += (sy + yHy) * s[i] * s[j] / (sy * sy) -
                     (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
    }
    u = std::move(u_new);
    fu = f_new;
    g = std::move(g_new);
  }
  if (status != FitStatus::Converged && max_norm(g) <= cfg.gradient_tolerance)
    status = FitStatus::Converged;
  out.u = std::move(u);
  out.f = fu;
  out.grad = std::move(g);
  out.status = status;
  return out;
}

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5); stops on relative simplex spread.
inline MinimizeOutcome nelder_mead(const Objective& f, std::vector<double> u0,
                                   const FitConfig& cfg,
                                   const std::vector<double>& init_scale) {
  const std::size_t n = u0.size();
  MinimizeOutcome out;
  std::vector<std::vector<double>> simplex;
  std::vector<double> fv;
  simplex.push_back(u0);
  fv.push_back(f(u0));
  if (!std::isfinite(fv[0])) {
    out.u = std::move(u0);
    out.status = FitStatus::Failed;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto v = u0;
    v[i] += init_scale[i];
    simplex.push_back(v);
    fv.push_back(f(v));
  }
  auto order = [&] {
    std::vector<std::size_t> idx(simplex.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return fv[a] < fv[b];
    });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (std::size_t i : idx) {
      s2.push_back(simplex[i]);
      f2.push_back(fv[i]);
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };
  order();
  FitStatus status = FitStatus::MaxIterations;
  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    double spread = std::abs(fv.back() - fv.front()) /
                    std::max(1.0, std::abs(fv.front()));
    if (spread <= cfg.simplex_tolerance) {
      status = FitStatus::Converged;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t v = 0; v < n; ++v) centroid[i] += simplex[v][i];
      centroid[i] /= static_cast<double>(n);
    }
    auto point = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i)
        p[i] = centroid[i] + coeff * (centroid[i] - simplex.back()[i]);
      return p;
    };
    auto refl = point(1.0);
    double f_refl = f(refl);
    if (f_refl < fv.front()) {
      auto exp_p = point(2.0);
      double f_exp = f(exp_p);
      if (f_exp < f_refl) {
        simplex.back() = exp_p; fv.back() = f_exp;
      } else {
        simplex.back() = refl; fv.back() = f_refl;
      }
    } else if (f_refl < fv[fv.size() - 2]) {
      simplex.back() = refl; fv.back() = f_refl;
    } else {
      auto con = point(-0.5);
      double f_con = f(con);
      if (f_con < fv.back()) {
        simplex.back() = con; fv.back() = f_con;
      } else {
        for (std::size_t v = 1; v < simplex.size(); ++v) {
          for (std::size_t i = 0; i < n; ++i)
            simplex[v][i] = simplex[0][i] + 0.5 * (simplex[v][i] - simplex[0][i]);
          fv[v] = f(simplex[v]);
        }
      }
    }
    order();
  }
  out.u = simplex.front();
  out.f = fv.front();
  out.status = status;
  return out;
}

} // namespace detail

// Orchestrates the minimization over the bound model's registry. On
// success the fitted values are written back into the Variables and
// uncertainties come from the inverse finite-difference Hessian, mapped to
// external space through the transform's Jacobian.
inline FitResult fit(BoundModel& bm, MetricKind metric, const Backend& backend,
                     const FitConfig& cfg = FitConfig{}) {
  auto& reg = bm.registry();
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < reg.n_parameters(); ++i)
    if (!reg.parameters()[i]->fixed) free_idx.push_back(i);
  if (free_idx.empty())
    throw Error("no-parameters", "fit needs >= 1 free parameter");
  const auto t0 = std::chrono::steady_clock::now();

  // The minimizer works in the internal space of the free parameters only;
  // fixed parameters keep their registered values in every evaluation.
  BoundTransform transform(reg);
  const std::vector<double> p_template = reg.export_values();
  auto expand = [&](const std::vector<double>& u) {
    std::vector<double> p = p_template;
    for (std::size_t k = 0; k < u.size(); ++k)
      p[free_idx[k]] = transform.to_external(free_idx[k], u[k]);
    return p;
  };
  std::size_t n_calls = 0;
  Objective objective = [&](const std::vector<double>& u) {
    ++n_calls;
    return bm.eval_metric(expand(u), metric, backend);
  };
  auto grad_fn = [&](const std::vector<double>& u) {
    std::vector<double> h(u.size());
    for (std::size_t k = 0; k < u.size(); ++k)
      h[k] = transform.fd_step(free_idx[k], u[k]);
    return numeric_gradient(objective, u, h);
  };

  std::vector<double> u0(free_idx.size());
  for (std::size_t k = 0; k < free_idx.size(); ++k)
    u0[k] = transform.to_internal(free_idx[k], p_template[free_idx[k]]);

  detail::MinimizeOutcome mo;
  if (cfg.minimizer == MinimizerKind::QuasiNewton) {
    mo = detail::bfgs(objective, u0, cfg, grad_fn);
  } else {
    std::vector<double> scale(u0.size());
    for (std::size_t k = 0; k < u0.size(); ++k)
      scale[k] = transform.fd_step(free_idx[k], u0[k]) * 100.0;
    mo = detail::nelder_mead(objective, u0, cfg, scale);
  }

  FitResult result;
  result.status = mo.status;
  for (const auto& p : reg.parameters()) result.names.push_back(p->name);
  result.params = expand(mo.u);
  result.metric_value = mo.f;
  if (mo.grad.empty() && mo.status != FitStatus::Failed)
    mo.grad = grad_fn(mo.u);
  result.grad_max_norm = mo.grad.empty()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : max_norm(mo.grad);

  if (mo.status != FitStatus::Failed) {
    reg.import_values(result.params);
    // Hessian steps larger than the gradient steps so the curvature rises
    // above the flat floor of the summed metric
    std::vector<double> hh(mo.u.size());
    for (std::size_t k = 0; k < mo.u.size(); ++k)
      hh[k] = 10.0 * transform.fd_step(free_idx[k], mo.u[k]);
    auto cov = covariance(objective, mo.u, hh);
    if (!cov.empty()) {
      result.uncertainties_available = true;
      result.uncertainties.assign(reg.n_parameters(), 0.0);
      // chi-squared curvature carries an extra factor 2 relative to NLL
      double scale = metric == MetricKind::ChiSquared ? 2.0 : 1.0;
      for (std::size_t k = 0; k < mo.u.size(); ++k) {
        double var_int = scale * cov[k][k];
        double j = transform.jacobian(free_idx[k], mo.u[k]);
        result.uncertainties[free_idx[k]] =
            var_int > 0 ? std::sqrt(var_int) * std::abs(j) : 0.0;
      }
    }
  }

  result.n_metric_calls = n_calls;
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

} // namespace parfit

#endif
