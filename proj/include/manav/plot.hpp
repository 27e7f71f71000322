#pragma once

#include "manav/episode.hpp"
#include "manav/scenario.hpp"

#include <string>

namespace manav {

// Renders the episode as a standalone SVG: arena, obstacles, corridor
// skeleton, every route version, the executed trajectory and re-plan markers.
// Coordinates are written in meters (y negated for screen orientation), so
// geometry in the file matches the telemetry numerically.
void emit_plots(const EpisodeLog& log, const Scenario& scenario, const std::string& svg_path);

}  // namespace manav
