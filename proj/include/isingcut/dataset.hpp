#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isingcut/model.hpp"

namespace isingcut {

/// n samples of p spins, row-major, every entry -1 or +1.
struct Dataset {
  int p = 0;
  int n = 0;
  std::vector<std::int8_t> values;
  std::uint64_t seed = 0;
  std::string generator;
  std::string model_hash;

  std::span<const std::int8_t> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(p),
            static_cast<std::size_t>(p)};
  }
  std::int8_t at(int i, int v) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(p) + static_cast<std::size_t>(v)];
  }
};

/// Throws std::invalid_argument if shape or entries are inconsistent.
void validate(const Dataset& data);

/// eta_v = column means, eta_uv = means of columnwise products.
MeanVector empirical_means(const Dataset& data);

}  // namespace isingcut
