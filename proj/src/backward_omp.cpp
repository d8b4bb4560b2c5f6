#include <exception>
#include <limits>

#include <omp.h>

#include "march_impl.hpp"

namespace fbsde {

namespace {

// Exceptions cannot leave a parallel region. The one thrown at the lowest
// node index is kept so the reported failure does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  std::exception_ptr first;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(fbsde_march_error)
      {
        if (static_cast<std::size_t>(i) < first_index) {
          first_index = static_cast<std::size_t>(i);
          first = std::current_exception();
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace

MarchResult march(const FbsdeProblem& problem, const SpaceTimeGrid& grid, const SchemeConfig& cfg) {
  return detail::march_impl(problem, grid, cfg,
                            [](std::size_t count, auto&& body) { parallel_for(count, body); });
}

}  // namespace fbsde
