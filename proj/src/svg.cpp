#include "bgeva/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bgeva {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string edf_caption(const std::string& term, double edf, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, edf);
  return "s(" + term + "," + buf + ")";
}

std::string smooth_svg(const CiBand& band, const Eigen::VectorXd& rug, double edf, const PlotOptions& opts) {
  const double left = 64, right = 16, top = 16, bottom = 48;
  const double pw = opts.width - left - right;
  const double ph = opts.height - top - bottom;

  double x0 = band.x.minCoeff(), x1 = band.x.maxCoeff();
  if (rug.size() > 0) {
    x0 = std::min(x0, rug.minCoeff());
    x1 = std::max(x1, rug.maxCoeff());
  }
  double y0 = std::min(band.lower.minCoeff(), band.fit.minCoeff());
  double y1 = std::max(band.upper.maxCoeff(), band.fit.maxCoeff());
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << opts.width << "\" height=\"" << opts.height << "\" fill=\"white\"/>\n";

  out << "<polygon class=\"band\" fill=\"#c8c8c8\" stroke=\"none\" points=\"";
  for (Eigen::Index i = 0; i < band.x.size(); ++i) out << num(sx(band.x[i])) << ',' << num(sy(band.upper[i])) << ' ';
  for (Eigen::Index i = band.x.size(); i-- > 0;) {
    out << num(sx(band.x[i])) << ',' << num(sy(band.lower[i]));
    if (i > 0) out << ' ';
  }
  out << "\"/>\n";

  out << "<path class=\"curve\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" d=\"";
  for (Eigen::Index i = 0; i < band.x.size(); ++i)
    out << (i == 0 ? "M" : " L") << num(sx(band.x[i])) << ',' << num(sy(band.fit[i]));
  out << "\"/>\n";

  const double axis_y = top + ph;
  out << "<line class=\"axis\" x1=\"" << num(left) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(left + pw)
      << "\" y2=\"" << num(axis_y) << "\" stroke=\"black\"/>\n";
  out << "<line class=\"axis\" x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(axis_y) << "\" stroke=\"black\"/>\n";
  if (y0 < 0 && y1 > 0)
    out << "<line class=\"zero\" x1=\"" << num(left) << "\" y1=\"" << num(sy(0)) << "\" x2=\"" << num(left + pw)
        << "\" y2=\"" << num(sy(0)) << "\" stroke=\"#888888\" stroke-dasharray=\"3,3\"/>\n";

  out << "<g class=\"rug\" stroke=\"black\" stroke-width=\"0.5\">\n";
  for (Eigen::Index i = 0; i < rug.size(); ++i) {
    const std::string x = num(sx(rug[i]));
    out << "<line class=\"rug\" x1=\"" << x << "\" y1=\"" << num(axis_y) << "\" x2=\"" << x << "\" y2=\""
        << num(axis_y - 6) << "\"/>\n";
  }
  out << "</g>\n";

  out << "<text class=\"xlabel\" x=\"" << num(left + pw / 2) << "\" y=\"" << num(opts.height - 12)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(band.term) << "</text>\n";
  const double cy = top + ph / 2;
  out << "<text class=\"ylabel\" x=\"16\" y=\"" << num(cy) << "\" text-anchor=\"middle\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << num(cy) << ")\">" << escape(edf_caption(band.term, edf, opts.decimals))
      << "</text>\n";
  out << "<text class=\"tick\" x=\"" << num(left - 4) << "\" y=\"" << num(top + 4)
      << "\" text-anchor=\"end\" font-size=\"10\">" << num(y1) << "</text>\n";
  out << "<text class=\"tick\" x=\"" << num(left - 4) << "\" y=\"" << num(axis_y)
      << "\" text-anchor=\"end\" font-size=\"10\">" << num(y0) << "</text>\n";
  out << "<text class=\"tick\" x=\"" << num(left) << "\" y=\"" << num(axis_y + 14)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << num(x0) << "</text>\n";
  out << "<text class=\"tick\" x=\"" << num(left + pw) << "\" y=\"" << num(axis_y + 14)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << num(x1) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace bgeva
