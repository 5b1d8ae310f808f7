#pragma once

#include <string>

#include <Eigen/Dense>

#include "bgeva/inference.hpp"

namespace bgeva {

struct PlotOptions {
  int width = 480;
  int height = 360;
  int decimals = 2;  // edf in the axis caption
};

// SVG 1.1 document: one <path> for the estimate, one <polygon> for the band,
// one <line class="rug"> per covariate value and the y caption "s(name,edf)".
std::string smooth_svg(const CiBand& band, const Eigen::VectorXd& rug, double edf, const PlotOptions& opts = {});

// Formats edf as it appears in the caption.
std::string edf_caption(const std::string& term, double edf, int decimals = 2);

}  // namespace bgeva
