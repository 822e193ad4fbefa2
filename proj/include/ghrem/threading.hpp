#pragma once

namespace ghrem {

/// Thread count for parallel kernels: an explicit request wins, then the
/// GHREM_THREADS environment variable, then the OpenMP default. At least 1.
int resolve_threads(int requested);

}  // namespace ghrem
