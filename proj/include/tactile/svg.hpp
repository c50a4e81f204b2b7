#pragma once

#include <iosfwd>
#include <string>

#include "tactile/policy.hpp"
#include "tactile/scene.hpp"

namespace tactile {

struct SvgOptions {
  int size_px = 800;
  int heatmap_grid = 60;  // 0 disables the GP heatmap layer
  bool trajectory = true;
  bool contacts = true;
  bool contours = true;
  bool ground_truth = true;
  std::string caption;  // plain text drawn in the top-left corner
};

/// Overlay of ground truth, GP std heatmap, trajectory, contacts and extracted contours.
void render_svg(const Scene& scene, const EpisodeLog* log, const SvgOptions& options,
                std::ostream& out);

}  // namespace tactile
