#include "march_impl.hpp"

namespace fbsde {

MarchResult march_serial(const FbsdeProblem& problem, const SpaceTimeGrid& grid, const SchemeConfig& cfg) {
  return detail::march_impl(problem, grid, cfg, [](std::size_t count, auto&& body) {
    for (std::size_t i = 0; i < count; ++i) body(i);
  });
}

}  // namespace fbsde
