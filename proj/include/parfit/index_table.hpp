#ifndef PARFIT_INDEX_TABLE_HPP
#define PARFIT_INDEX_TABLE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "parfit/errors.hpp"

namespace parfit {

// Flattened per-node integer slots. Layout per node:
//   [n_params, param global indices..., n_obs, observable column indices...]
// Parameters are looked up through the registry's flat vector, observables
// through the event row, so every node reads shared state via one integer
// table (the double indirection).
class IndexTable {
public:
  IndexTable() = default;

  std::size_t n_nodes() const { return slots_.size(); }
  std::size_t n_columns() const { return n_columns_; }
  std::size_t n_parameters() const { return n_parameters_; }
  bool finalized() const { return finalized_; }

  std::span<const std::uint32_t> node(std::size_t node_id) const {
    if (node_id >= slots_.size())
      throw Error("bad-node-id", "IndexTable::node");
    return slots_[node_id];
  }

  std::size_t n_params_of(std::size_t node_id) const { return node(node_id)[0]; }

  std::uint32_t param_index(std::size_t node_id, std::size_t local_slot) const {
    auto s = node(node_id);
    if (local_slot >= s[0])
      throw Error("out-of-bounds", "param slot");
    return s[1 + local_slot];
  }

  std::uint32_t obs_column(std::size_t node_id, std::size_t local_slot) const {
    auto s = node(node_id);
    std::size_t np = s[0];
    if (local_slot >= s[1 + np])
      throw Error("out-of-bounds", "observable slot");
    return s[2 + np + local_slot];
  }

  bool operator==(const IndexTable& other) const {
    return slots_ == other.slots_ && n_columns_ == other.n_columns_ &&
           n_parameters_ == other.n_parameters_;
  }

private:
  friend class IndexTableBuilder;
  std::vector<std::vector<std::uint32_t>> slots_;
  std::size_t n_columns_ = 0;
  std::size_t n_parameters_ = 0;
  bool finalized_ = false;
};

class IndexTableBuilder {
public:
  std::size_t add_node(std::vector<std::uint32_t> slot_row) {
    table_.slots_.push_back(std::move(slot_row));
    return table_.slots_.size() - 1;
  }

  IndexTable finish(std::size_t n_columns, std::size_t n_parameters) {
    for (const auto& row : table_.slots_) {
      std::size_t np = row[0];
      for (std::size_t i = 0; i < np; ++i)
        if (row[1 + i] >= n_parameters)
          throw Error("bad-param-index", "slot exceeds registry size");
      std::size_t no = row[1 + np];
      for (std::size_t i = 0; i < no; ++i)
        if (row[2 + np + i] >= n_columns)
          throw Error("bad-obs-column", "slot exceeds column count");
    }
    table_.n_columns_ = n_columns;
    table_.n_parameters_ = n_parameters;
    table_.finalized_ = true;
    return std::move(table_);
  }

private:
  IndexTable table_;
};

// The read side of the double indirection, made explicit for tests:
// value = params[table[node].param_indices[slot]].
inline double lookup_param(const IndexTable& table, std::size_t node_id,
                           std::size_t local_slot, std::span<const double> params) {
  std::uint32_t gi = table.param_index(node_id, local_slot);
  if (gi >= params.size())
    throw Error("out-of-bounds", "parameter vector shorter than index");
  return params[gi];
}

} // namespace parfit

#endif
