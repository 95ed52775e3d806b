#pragma once

// Deterministic SVG 1.1 renders of forests (one color per tree) and of
// coupled aggregate pairs (red / blue / common sites, green common edges).

#include <string>

#include "idla/coupling.hpp"
#include "idla/snapshot.hpp"

namespace idla {

/// d=2 draws sites and parent edges; d=3 draws an oblique projection of the
/// sites only; other dimensions raise UnsupportedDimension.
std::string forest_svg(const Snapshot& snap);

/// Renders the larger aggregate of a coupled pair colored by `report`.
std::string coupling_svg(const Aggregate& small, const Aggregate& large, const DiscrepancyReport& report);

/// Palette color of the tree rooted at `root`.
std::string tree_color(const Site& root);

}  // namespace idla
