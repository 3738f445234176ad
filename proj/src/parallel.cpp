#include "ouk/parallel.hpp"

#include <algorithm>

namespace ouk {

namespace {
int g_workers = 1;
}

int worker_count() { return g_workers; }

void set_worker_count(int n) { g_workers = std::max(1, n); }

}  // namespace ouk
