#pragma once

#include <span>
#include <string>

#include "qbl/experiment.hpp"

namespace qbl {

// Self-contained SVG line chart of mean pseudo-regret vs k: one polyline +
// 95% CI band per policy, plus a dashed reference curve c * envelope(k) with
// c least-squares fitted to the query_then_ucbv series (omitted when that
// series is absent). Inline styles only; no external resources.
std::string render_sweep_svg(const ExperimentConfig& config, std::span<const SweepRow> rows);

}  // namespace qbl
