#pragma once

#include <memory>

#include "arlequin/solver.hpp"

namespace arlequin::testing {

// H = 0.5, h = 0.1 on the default geometry
inline std::shared_ptr<const Discretization> small_disc() {
  static const auto disc = Discretization::create(DomainSpec{}, 0.5, 5);
  return disc;
}

}  // namespace arlequin::testing
