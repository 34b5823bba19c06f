#ifndef PARFIT_VARIABLE_HPP
#define PARFIT_VARIABLE_HPP

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "parfit/errors.hpp"

namespace parfit {

enum class Role { Observable, Parameter };

// Named scalar: either a measured observable (with a range) or a fit
// parameter (with init/step/limits). Identity matters: two nodes sharing
// the same Variable object resolve to the same registry slot.
struct Variable {
  std::string name;
  double value = 0;
  double lower = 0;
  double upper = 0;
  double step = 0;     // 0 for observables
  bool fixed = false;  // fixed parameters keep their value during a fit
  Role role = Role::Observable;
  int global_index = -1; // assigned at registration
};

using VariablePtr = std::shared_ptr<Variable>;

inline VariablePtr new_observable(const std::string& name, double lower, double upper) {
  if (!(lower < upper))
    throw Error("invalid-range", "observable '" + name + "': lower must be < upper");
  auto v = std::make_shared<Variable>();
  v->name = name;
  v->value = lower;
  v->lower = lower;
  v->upper = upper;
  v->step = 0;
  v->role = Role::Observable;
  return v;
}

inline VariablePtr new_parameter(const std::string& name, double init, double step,
                                 double lower, double upper) {
  if (!(lower < upper))
    throw Error("invalid-range", "parameter '" + name + "': lower must be < upper");
  if (!(lower <= init && init <= upper))
    throw Error("invalid-range", "parameter '" + name + "': init outside [lower, upper]");
  if (!(step > 0))
    throw Error("invalid-step", "parameter '" + name + "': step must be > 0");
  auto v = std::make_shared<Variable>();
  v->name = name;
  v->value = init;
  v->lower = lower;
  v->upper = upper;
  v->step = step;
  v->role = Role::Parameter;
  return v;
}

// Ordered registry of distinct fit parameters and observables. Registration
// is idempotent per Variable object; two distinct objects with the same name
// are rejected rather than silently aliased.
class ParameterRegistry {
public:
  std::size_t register_parameter(const VariablePtr& v) {
    if (!v) throw Error("null-variable", "register_parameter");
    if (v->role != Role::Parameter)
      throw Error("wrong-role", "'" + v->name + "' is not a parameter");
    return register_into(parameters_, param_by_name_, v);
  }

  std::size_t register_observable(const VariablePtr& v) {
    if (!v) throw Error("null-variable", "register_observable");
    if (v->role != Role::Observable)
      throw Error("wrong-role", "'" + v->name + "' is not an observable");
    return register_into(observables_, obs_by_name_, v);
  }

  const std::vector<VariablePtr>& parameters() const { return parameters_; }
  const std::vector<VariablePtr>& observables() const { return observables_; }
  std::size_t n_parameters() const { return parameters_.size(); }

  // Current values of all registered parameters, in registration order.
  std::vector<double> export_values() const {
    std::vector<double> out;
    out.reserve(parameters_.size());
    for (const auto& p : parameters_) out.push_back(p->value);
    return out;
  }

  // Writes fitted values back into the Variables.
  void import_values(const std::vector<double>& vals) {
    if (vals.size() != parameters_.size())
      throw Error("size-mismatch", "import_values: wrong parameter count");
    for (std::size_t i = 0; i < vals.size(); ++i) parameters_[i]->value = vals[i];
  }

private:
  static std::size_t register_into(std::vector<VariablePtr>& list,
                                   std::unordered_map<std::string, Variable*>& by_name,
                                   const VariablePtr& v) {
    auto it = by_name.find(v->name);
    if (it != by_name.end()) {
      if (it->second != v.get())
        throw Error("name-collision",
                    "distinct Variables both named '" + v->name + "'");
      return static_cast<std::size_t>(it->second->global_index);
    }
    v->global_index = static_cast<int>(list.size());
    list.push_back(v);
    by_name.emplace(v->name, v.get());
    return static_cast<std::size_t>(v->global_index);
  }

  std::vector<VariablePtr> parameters_;
  std::vector<VariablePtr> observables_;
  std::unordered_map<std::string, Variable*> param_by_name_;
  std::unordered_map<std::string, Variable*> obs_by_name_;
};

} // namespace parfit

#endif
