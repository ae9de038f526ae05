#pragma once

#include <functional>

namespace pinnflow {

/// Number of worker threads: PINNFLOW_WORKERS env var if set, else the
/// hardware concurrency. A value of 1 means strictly serial execution.
int configured_workers();

/// Runs job(i) for i in [0, njobs). With workers <= 1 (or njobs == 1) the
/// jobs run inline on the calling thread, in index order. Jobs must be
/// independent; callers get determinism by reducing job outputs in index
/// order afterwards.
void parallel_run(int njobs, const std::function<void(int)>& job, int workers);

}  // namespace pinnflow
