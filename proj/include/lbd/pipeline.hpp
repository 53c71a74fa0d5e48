#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lbd/artifacts.hpp"
#include "lbd/run_config.hpp"
#include "lbd/verifier.hpp"

namespace lbd::pipeline {

// Stage drivers shared by the CLI and the tests. Each stage reads its inputs
// from the run directory, writes its artifacts and refreshes the manifest.

void validate(const RunConfig& cfg, std::ostream& out);

void simulate(const RunConfig& cfg, int threads);

void solve(const RunConfig& cfg);

void estimate(const RunConfig& cfg);

// Returns the evaluated checks (also written to verdicts.json).
std::vector<BoundCheck> verify(const RunConfig& cfg);

SweepTable sweep(const RunConfig& cfg, int threads);

// Renders the summary table; returns 0 only if every check passed.
int report(const RunConfig& cfg, std::ostream& out);

}  // namespace lbd::pipeline
