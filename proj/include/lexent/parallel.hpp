#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lexent {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_num_threads([[maybe_unused]] int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

}  // namespace lexent
