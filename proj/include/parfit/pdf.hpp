#ifndef PARFIT_PDF_HPP
#define PARFIT_PDF_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "parfit/errors.hpp"
#include "parfit/index_table.hpp"
#include "parfit/variable.hpp"

namespace parfit {

enum class PdfKind {
  Exponential,
  Gaussian,
  BreitWigner,
  Polynomial,
  Product,
  Sum,
  Composite,
  Mapped,
  Convolution
};

struct GridSpec {
  std::size_t points = 1024; // per observable; midpoint rule over [lower, upper]
  GridSpec() = default;
  explicit GridSpec(std::size_t p) : points(p) {
    if (p < 2) throw Error("bad-grid", "GridSpec needs >= 2 points");
  }
};

inline std::uint64_t hash_params(std::span<const double> p) {
  std::uint64_t h = 14695981039346656037ull;
  for (double v : p) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

class PdfNode;
using PdfPtr = std::shared_ptr<PdfNode>;

// One node of the composable PDF graph. Subclasses implement the raw
// (unnormalized) kernel; normalization is a midpoint-rule integral over the
// node's observable box, cached against a fingerprint of the parameter
// vector. The graph is finalized once against a registry and a data-set
// column layout before any evaluation.
class PdfNode {
public:
  PdfNode(std::string name, PdfKind kind) : name_(std::move(name)), kind_(kind) {}
  virtual ~PdfNode() = default;

  const std::string& name() const { return name_; }
  PdfKind kind() const { return kind_; }
  std::size_t id() const { return id_; }
  const std::vector<PdfPtr>& children() const { return children_; }
  const std::vector<VariablePtr>& declared_parameters() const { return params_; }
  const std::vector<VariablePtr>& declared_observables() const { return obs_; }

  // Observables this node integrates over, with their resolved event
  // columns; available after finalize.
  const std::vector<std::pair<VariablePtr, std::uint32_t>>& box() const { return box_; }

  // Unnormalized kernel. evt is indexed by global event column and may be
  // scribbled on below this node's own columns (composite/convolution do).
  virtual double raw(std::vector<double>& evt, std::span<const double> p,
                     const IndexTable& t) const = 0;

  // Normalized density; requires refresh_normalizations for these params.
  double density(std::vector<double>& evt, std::span<const double> p,
                 const IndexTable& t) const {
    return raw(evt, p, t) / cached_norm();
  }

  double cached_norm() const {
    if (!norm_valid_) throw Error("stale-normalization", name_);
    return norm_;
  }
  double norm_error_estimate() const { return norm_err_; }

  // True when the parameter vector is inside this subtree's domain (e.g.
  // AddPdf fraction sums). Violations make the metric return a penalty.
  virtual bool params_valid(std::span<const double> p, const IndexTable& t) const {
    for (const auto& c : children_)
      if (!c->params_valid(p, t)) return false;
    return true;
  }

  // True when this node consumes its children's normalized densities (only
  // the mixture does); every other combinator works on raw kernels and
  // renormalizes its own output, so a child whose kernel happens to be
  // degenerate over the box (e.g. a resolution function centered outside
  // it) must not be normalized on its own.
  virtual bool needs_child_norms() const { return false; }

  // Recomputes stale normalization caches bottom-up. Single-threaded;
  // workers only read the frozen caches afterwards.
  void refresh_normalizations(std::span<const double> p, const IndexTable& t,
                              const GridSpec& grid) {
    if (needs_child_norms())
      for (const auto& c : children_) c->refresh_normalizations(p, t, grid);
    else
      for (const auto& c : children_) c->propagate_child_norms(p, t, grid);
    std::uint64_t fp = hash_params(p);
    if (norm_valid_ && fingerprint_ == fp) return;
    compute_normalization(p, t, grid);
    fingerprint_ = fp;
    norm_valid_ = true;
  }

  // Walks a subtree whose own norm is not consumed, still refreshing any
  // deeper nodes that are (children of mixtures at any depth).
  void propagate_child_norms(std::span<const double> p, const IndexTable& t,
                             const GridSpec& grid) {
    if (needs_child_norms())
      for (const auto& c : children_) c->refresh_normalizations(p, t, grid);
    else
      for (const auto& c : children_) c->propagate_child_norms(p, t, grid);
  }

  double normalize(std::span<const double> p, const IndexTable& t, const GridSpec& grid) {
    refresh_normalizations(p, t, grid);
    return norm_;
  }

protected:
  double param(const IndexTable& t, std::size_t slot, std::span<const double> p) const {
    return p[t.param_index(id_, slot)];
  }
  std::uint32_t obs_col(const IndexTable& t, std::size_t slot) const {
    return t.obs_column(id_, slot);
  }

  // Midpoint sum at n points per box dimension; deterministic order.
  double midpoint_sum(std::span<const double> p, const IndexTable& t,
                      std::size_t n) const {
    const std::size_t dims = box_.size();
    if (dims == 0) throw Error("no-observables", name_);
    std::vector<double> lo(dims), h(dims);
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) {
      const auto& o = *box_[d].first;
      lo[d] = o.lower;
      h[d] = (o.upper - o.lower) / static_cast<double>(n);
      total *= n;
    }
    std::vector<double> evt(t.n_columns(), 0.0);
    // extended precision: rounding jitter in the normalization is amplified
    // by n_events once it enters the summed metric through log(norm)
    long double sum = 0.0L;
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t d = dims; d-- > 0;) {
        std::size_t k = rem % n;
        rem /= n;
        evt[box_[d].second] = lo[d] + (static_cast<double>(k) + 0.5) * h[d];
      }
      sum += raw(evt, p, t);
    }
    double vol = 1.0;
    for (std::size_t d = 0; d < dims; ++d) vol *= h[d];
    return static_cast<double>(sum) * vol;
  }

  virtual void compute_normalization(std::span<const double> p, const IndexTable& t,
                                     const GridSpec& grid) {
    // Midpoint sums at n and 2n per dimension, Richardson-combined; the
    // n/2n spread also yields the grid-error estimate.
    double coarse = midpoint_sum(p, t, grid.points);
    double fine = midpoint_sum(p, t, 2 * grid.points);
    norm_ = fine + (fine - coarse) / 3.0;
    norm_err_ = std::abs(fine - coarse) / 3.0;
    if (!(norm_ > 0.0) || !std::isfinite(norm_))
      throw Error("zero-integral", "degenerate PDF '" + name_ + "'");
  }

  void invalidate_norm() { norm_valid_ = false; }

  std::string name_;
  PdfKind kind_;
  std::vector<PdfPtr> children_;
  std::vector<VariablePtr> params_; // declared, node-local order
  std::vector<VariablePtr> obs_;    // declared, node-local order (primitives)
  mutable std::size_t id_ = 0;
  std::vector<std::pair<VariablePtr, std::uint32_t>> box_;
  double norm_ = 1.0;
  double norm_err_ = 0.0;
  std::uint64_t fingerprint_ = 0;
  bool norm_valid_ = false;

  friend class GraphFinalizer;
};

// ---------------------------------------------------------------------------
// Primitives

class ExpPdf final : public PdfNode {
public:
  ExpPdf(std::string name, VariablePtr x, VariablePtr alpha)
      : PdfNode(std::move(name), PdfKind::Exponential) {
    require_roles(x, alpha);
    obs_ = {std::move(x)};
    params_ = {std::move(alpha)};
  }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double x = evt[obs_col(t, 0)];
    double alpha = param(t, 0, p);
    return std::exp(alpha * x);
  }

private:
  void require_roles(const VariablePtr& x, const VariablePtr& alpha) {
    if (!x || x->role != Role::Observable)
      throw Error("wrong-role", name_ + ": x must be an observable");
    if (!alpha || alpha->role != Role::Parameter)
      throw Error("wrong-role", name_ + ": alpha must be a parameter");
  }
};

class GaussianPdf final : public PdfNode {
public:
  GaussianPdf(std::string name, VariablePtr x, VariablePtr mean, VariablePtr sigma)
      : PdfNode(std::move(name), PdfKind::Gaussian) {
    if (!x || x->role != Role::Observable)
      throw Error("wrong-role", name_ + ": x must be an observable");
    if (!mean || mean->role != Role::Parameter)
      throw Error("wrong-role", name_ + ": mean must be a parameter");
    if (!sigma || sigma->role != Role::Parameter)
      throw Error("wrong-role", name_ + ": sigma must be a parameter");
    if (!(sigma->lower > 0))
      throw Error("nonpositive-sigma", name_ + ": sigma limits must exclude 0");
    obs_ = {std::move(x)};
    params_ = {std::move(mean), std::move(sigma)};
  }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double x = evt[obs_col(t, 0)];
    double mean = param(t, 0, p);
    double sigma = param(t, 1, p);
    if (!(sigma > 0))
      throw Error("nonpositive-sigma", name_);
    double ret = std::exp(-0.5 * (x - mean) * (x - mean) / (sigma * sigma));
    return ret;
  }
};

// Relativistic s-wave shape: 1 / ((x^2 - m^2)^2 + m^2 G^2).
class BreitWignerPdf final : public PdfNode {
public:
  BreitWignerPdf(std::string name, VariablePtr x, VariablePtr mass, VariablePtr width)
      : PdfNode(std::move(name), PdfKind::BreitWigner) {
    if (!x || x->role != Role::Observable)
      throw Error("wrong-role", name_ + ": x must be an observable");
    if (!mass || mass->role != Role::Parameter)
      throw Error("wrong-role", name_ + ": mass must be a parameter");
    if (!width || width->role != Role::Parameter)
      throw Error("wrong-role", name_ + ": width must be a parameter");
    if (!(width->lower > 0))
      throw Error("nonpositive-width", name_ + ": width limits must exclude 0");
    obs_ = {std::move(x)};
    params_ = {std::move(mass), std::move(width)};
  }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double x = evt[obs_col(t, 0)];
    double m = param(t, 0, p);
    double g = param(t, 1, p);
    if (!(g > 0)) throw Error("nonpositive-width", name_);
    double d = x * x - m * m;
    return 1.0 / (d * d + m * m * g * g);
  }
};

// max(0, sum c_i x^i); clamps are counted, not raised.
class PolynomialPdf final : public PdfNode {
public:
  PolynomialPdf(std::string name, VariablePtr x, std::vector<VariablePtr> coeffs)
      : PdfNode(std::move(name), PdfKind::Polynomial) {
    if (!x || x->role != Role::Observable)
      throw Error("wrong-role", name_ + ": x must be an observable");
    if (coeffs.empty())
      throw Error("bad-arity", name_ + ": need >= 1 coefficient");
    for (const auto& c : coeffs)
      if (!c || c->role != Role::Parameter)
        throw Error("wrong-role", name_ + ": coefficients must be parameters");
    obs_ = {std::move(x)};
    params_ = std::move(coeffs);
  }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double x = evt[obs_col(t, 0)];
    double acc = 0.0;
    for (std::size_t i = params_.size(); i-- > 0;)
      acc = acc * x + param(t, i, p);
    if (acc < 0.0) {
      clamp_count_.fetch_add(1, std::memory_order_relaxed);
      return 0.0;
    }
    return acc;
  }

  std::uint64_t clamp_count() const { return clamp_count_.load(); }
  void reset_clamp_count() { clamp_count_.store(0); }

private:
  mutable std::atomic<std::uint64_t> clamp_count_{0};
};

// ---------------------------------------------------------------------------
// Combinators

class ProdPdf final : public PdfNode {
public:
  ProdPdf(std::string name, std::vector<PdfPtr> children)
      : PdfNode(std::move(name), PdfKind::Product) {
    if (children.size() < 2)
      throw Error("bad-arity", name_ + ": product needs >= 2 children");
    children_ = std::move(children);
  }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double acc = 1.0;
    for (const auto& c : children_) acc *= c->raw(evt, p, t);
    return acc;
  }
};

// density = sum_{i<n-1} f_i * child_i density + (1 - sum f) * last child
// density. Fractions are fit parameters; sum f > 1 is a penalty condition,
// not an exception.
class AddPdf final : public PdfNode {
public:
  bool needs_child_norms() const override { return true; }

  AddPdf(std::string name, std::vector<PdfPtr> children, std::vector<VariablePtr> fractions)
      : PdfNode(std::move(name), PdfKind::Sum) {
    if (children.size() < 2)
      throw Error("bad-arity", name_ + ": sum needs >= 2 children");
    if (fractions.size() != children.size() - 1)
      throw Error("fraction-count-mismatch",
                  name_ + ": need n_children - 1 fractions");
    for (const auto& f : fractions)
      if (!f || f->role != Role::Parameter)
        throw Error("wrong-role", name_ + ": fractions must be parameters");
    children_ = std::move(children);
    params_ = std::move(fractions);
  }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double fsum = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      double f = param(t, i, p);
      fsum += f;
      acc += f * children_[i]->density(evt, p, t);
    }
    acc += (1.0 - fsum) * children_.back()->density(evt, p, t);
    return acc;
  }

  bool params_valid(std::span<const double> p, const IndexTable& t) const override {
    double fsum = 0.0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      double f = param(t, i, p);
      if (f < 0.0 || f > 1.0) return false;
      fsum += f;
    }
    if (fsum > 1.0) return false;
    return PdfNode::params_valid(p, t);
  }
};

// raw(x) = outer.raw(inner.raw(x)); the outer node's observable lives in a
// synthetic event column allocated at finalize.
class CompositePdf final : public PdfNode {
public:
  CompositePdf(std::string name, PdfPtr outer, PdfPtr inner)
      : PdfNode(std::move(name), PdfKind::Composite) {
    if (!outer || !inner) throw Error("bad-arity", name_ + ": null child");
    children_ = {std::move(outer), std::move(inner)};
  }

  const PdfPtr& outer() const { return children_[0]; }
  const PdfPtr& inner() const { return children_[1]; }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double g = inner()->raw(evt, p, t);
    std::uint32_t col = outer()->box().front().second;
    double saved = evt[col];
    evt[col] = g;
    double v = outer()->raw(evt, p, t);
    evt[col] = saved;
    return v;
  }
};

// Piecewise selection: target_i on [x_i, x_{i+1}); the last interval is
// closed at x_N.
class MappedPdf final : public PdfNode {
public:
  MappedPdf(std::string name, std::vector<double> boundaries, std::vector<PdfPtr> targets)
      : PdfNode(std::move(name), PdfKind::Mapped), boundaries_(std::move(boundaries)) {
    if (targets.empty())
      throw Error("bad-arity", name_ + ": need >= 1 target");
    if (boundaries_.size() != targets.size() + 1)
      throw Error("bad-arity", name_ + ": need n_targets + 1 boundaries");
    for (std::size_t i = 1; i < boundaries_.size(); ++i)
      if (!(boundaries_[i - 1] < boundaries_[i]))
        throw Error("non-monotone-boundaries", name_);
    children_ = std::move(targets);
  }

  const std::vector<double>& boundaries() const { return boundaries_; }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    double x = evt[box_.front().second];
    return children_[region_of(x)]->raw(evt, p, t);
  }

  std::size_t region_of(double x) const {
    if (x < boundaries_.front() || x > boundaries_.back())
      throw Error("out-of-domain", name_ + ": x outside mapped range");
    if (x == boundaries_.back()) return children_.size() - 1;
    std::size_t lo = 0, hi = boundaries_.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (x < boundaries_[mid]) hi = mid; else lo = mid;
    }
    return lo;
  }

private:
  std::vector<double> boundaries_;
};

// raw(x) = integral of model.raw(tau) * resolution.raw(x - tau) dtau,
// midpoint quadrature over the model observable's range. Both children
// must be one-dimensional in the same observable; the resolution's
// observable is read as the shift variable.
class ConvolutionPdf final : public PdfNode {
public:
  ConvolutionPdf(std::string name, PdfPtr model, PdfPtr resolution,
                 std::size_t quadrature_points = 1024)
      : PdfNode(std::move(name), PdfKind::Convolution), qpoints_(quadrature_points) {
    if (!model || !resolution) throw Error("bad-arity", name_ + ": null child");
    if (qpoints_ < 2) throw Error("bad-grid", name_ + ": need >= 2 quadrature points");
    children_ = {std::move(model), std::move(resolution)};
  }

  const PdfPtr& model() const { return children_[0]; }
  const PdfPtr& resolution() const { return children_[1]; }
  std::size_t quadrature_points() const { return qpoints_; }

  double raw(std::vector<double>& evt, std::span<const double> p,
             const IndexTable& t) const override {
    const auto& dim = *box_.front().first;
    const std::uint32_t col = box_.front().second;
    const double x = evt[col];
    const double h = (dim.upper - dim.lower) / static_cast<double>(qpoints_);
    double sum = 0.0;
    for (std::size_t j = 0; j < qpoints_; ++j) {
      double tau = dim.lower + (static_cast<double>(j) + 0.5) * h;
      evt[col] = tau;
      double m = model()->raw(evt, p, t);
      evt[col] = x - tau;
      double r = resolution()->raw(evt, p, t);
      sum += m * r;
    }
    evt[col] = x;
    return sum * h;
  }

private:
  std::size_t qpoints_;
};

// ---------------------------------------------------------------------------
// Finalization: assigns node ids in pre-order, registers every declared
// parameter/observable, resolves observables to event columns, and emits
// the immutable IndexTable. Composite outers get synthetic columns past the
// data columns.
class GraphFinalizer {
public:
  // reserved_columns: extra data columns (e.g. binned content/volume) that
  // sit after the observable columns; synthetic columns go after those.
  GraphFinalizer(ParameterRegistry& registry,
                 const std::vector<VariablePtr>& data_observables,
                 std::size_t reserved_columns = 0)
      : registry_(registry) {
    for (std::size_t c = 0; c < data_observables.size(); ++c)
      columns_[data_observables[c].get()] = static_cast<std::uint32_t>(c);
    next_column_ = data_observables.size() + reserved_columns;
  }

  IndexTable finalize(const PdfPtr& root) {
    nodes_.clear();
    if (root) collect(root);
    IndexTableBuilder builder;
    for (const auto& [node, synthetic] : nodes_) {
      std::vector<std::uint32_t> row;
      row.push_back(static_cast<std::uint32_t>(node->params_.size()));
      for (const auto& pv : node->params_)
        row.push_back(static_cast<std::uint32_t>(registry_.register_parameter(pv)));
      row.push_back(static_cast<std::uint32_t>(node->obs_.size()));
      for (const auto& ov : node->obs_) {
        registry_.register_observable(ov);
        row.push_back(column_of(ov, synthetic));
      }
      node->id_ = builder.add_node(std::move(row));
      node->invalidate_norm();
    }
    IndexTable table = builder.finish(next_column_, registry_.n_parameters());
    for (const auto& [node, synthetic] : nodes_) resolve_box(*node);
    return table;
  }

private:
  void collect(const PdfPtr& node, bool synthetic = false) {
    nodes_.emplace_back(node.get(), synthetic);
    if (node->kind() == PdfKind::Composite) {
      auto* comp = static_cast<CompositePdf*>(node.get());
      collect(comp->outer(), true);
      collect(comp->inner(), synthetic);
    } else {
      for (const auto& c : node->children()) collect(c, synthetic);
    }
  }

  std::uint32_t column_of(const VariablePtr& ov, bool synthetic) {
    auto it = columns_.find(ov.get());
    if (it != columns_.end()) return it->second;
    if (!synthetic)
      throw Error("unbound-observable",
                  "'" + ov->name + "' is not in the bound data set");
    std::uint32_t col = static_cast<std::uint32_t>(next_column_++);
    columns_.emplace(ov.get(), col);
    return col;
  }

  void resolve_box(PdfNode& node) {
    node.box_.clear();
    switch (node.kind()) {
      case PdfKind::Composite: {
        auto& comp = static_cast<CompositePdf&>(node);
        resolve_box(*comp.outer());
        if (comp.outer()->box().size() != 1)
          throw Error("arity-mismatch",
                      node.name() + ": composite outer must be one-dimensional");
        resolve_box(*comp.inner());
        node.box_ = comp.inner()->box_;
        break;
      }
      case PdfKind::Convolution: {
        auto& conv = static_cast<ConvolutionPdf&>(node);
        resolve_box(*conv.model());
        resolve_box(*conv.resolution());
        if (conv.model()->box().size() != 1 || conv.resolution()->box().size() != 1 ||
            conv.model()->box().front().first != conv.resolution()->box().front().first)
          throw Error("dimensionality-mismatch",
                      node.name() + ": convolution children must share one observable");
        node.box_ = conv.model()->box_;
        break;
      }
      default: {
        if (node.children().empty()) {
          for (const auto& ov : node.obs_)
            node.box_.emplace_back(ov, columns_.at(ov.get()));
        } else {
          for (const auto& c : node.children()) {
            resolve_box(*c);
            for (const auto& entry : c->box_) {
              bool seen = false;
              for (const auto& have : node.box_)
                if (have.first == entry.first) { seen = true; break; }
              if (!seen) node.box_.push_back(entry);
            }
          }
          if (node.kind() == PdfKind::Mapped && node.box_.size() != 1)
            throw Error("dimensionality-mismatch",
                        node.name() + ": mapped targets must share one observable");
        }
        break;
      }
    }
  }

  ParameterRegistry& registry_;
  std::unordered_map<const Variable*, std::uint32_t> columns_;
  std::size_t next_column_ = 0;
  std::vector<std::pair<PdfNode*, bool>> nodes_;
};

inline IndexTable finalize(ParameterRegistry& registry, const PdfPtr& root,
                           const std::vector<VariablePtr>& data_observables) {
  GraphFinalizer fin(registry, data_observables);
  return fin.finalize(root);
}

// Convenience constructors mirroring the node classes.
inline PdfPtr exp_pdf(std::string name, VariablePtr x, VariablePtr alpha) {
  return std::make_shared<ExpPdf>(std::move(name), std::move(x), std::move(alpha));
}
inline PdfPtr gaussian_pdf(std::string name, VariablePtr x, VariablePtr mean,
                           VariablePtr sigma) {
  return std::make_shared<GaussianPdf>(std::move(name), std::move(x), std::move(mean),
                                       std::move(sigma));
}
inline PdfPtr breit_wigner_pdf(std::string name, VariablePtr x, VariablePtr mass,
                               VariablePtr width) {
  return std::make_shared<BreitWignerPdf>(std::move(name), std::move(x),
                                          std::move(mass), std::move(width));
}
inline PdfPtr polynomial_pdf(std::string name, VariablePtr x,
                             std::vector<VariablePtr> coeffs) {
  return std::make_shared<PolynomialPdf>(std::move(name), std::move(x), std::move(coeffs));
}
inline PdfPtr prod_pdf(std::string name, std::vector<PdfPtr> children) {
  return std::make_shared<ProdPdf>(std::move(name), std::move(children));
}
inline PdfPtr add_pdf(std::string name, std::vector<PdfPtr> children,
                      std::vector<VariablePtr> fractions) {
  return std::make_shared<AddPdf>(std::move(name), std::move(children),
                                  std::move(fractions));
}
inline PdfPtr composite_pdf(std::string name, PdfPtr outer, PdfPtr inner) {
  return std::make_shared<CompositePdf>(std::move(name), std::move(outer),
                                        std::move(inner));
}
inline PdfPtr mapped_pdf(std::string name, std::vector<double> boundaries,
                         std::vector<PdfPtr> targets) {
  return std::make_shared<MappedPdf>(std::move(name), std::move(boundaries),
                                     std::move(targets));
}
inline PdfPtr convolution_pdf(std::string name, PdfPtr model, PdfPtr resolution,
                              std::size_t quadrature_points = 1024) {
  return std::make_shared<ConvolutionPdf>(std::move(name), std::move(model),
                                          std::move(resolution), quadrature_points);
}

} // namespace parfit

#endif
