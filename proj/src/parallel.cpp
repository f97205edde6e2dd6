#include "fundmatch/parallel.hpp"

#include <omp.h>

namespace fundmatch::parallel {

namespace {
const int runtime_default = omp_get_max_threads();
}

void set_max_threads(int n) { omp_set_num_threads(n > 0 ? n : runtime_default); }

int max_threads() { return omp_get_max_threads(); }

}  // namespace fundmatch::parallel
