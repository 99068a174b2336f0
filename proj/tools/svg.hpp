#ifndef BBR_TOOLS_SVG_HPP
#define BBR_TOOLS_SVG_HPP

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace bbrcli {

/// Static SVG histogram of inconclusive percentages (values in [0, 1]),
/// 20 bins of 5 points each. Deterministic output for identical input.
inline std::string histogram_svg(const std::vector<double>& proportions,
                                 const std::string& title) {
  constexpr int kBins = 20;
  constexpr double kWidth = 640.0, kHeight = 400.0;
  constexpr double kLeft = 56.0, kRight = 16.0, kTop = 44.0, kBottom = 48.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::vector<int> counts(kBins, 0);
  for (double p : proportions) {
    int bin = static_cast<int>(p * kBins);
    bin = std::clamp(bin, 0, kBins - 1);
    counts[bin]++;
  }
  int max_count = 1;
  for (int c : counts) max_count = std::max(max_count, c);

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";

  // y-axis ticks at 0, max/2, max
  for (int tick : {0, max_count / 2, max_count}) {
    const double y = kTop + plot_h * (1.0 - static_cast<double>(tick) / max_count);
    svg << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(kLeft) << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick
        << "</text>\n";
  }

  for (int b = 0; b < kBins; ++b) {
    const double h = plot_h * static_cast<double>(counts[b]) / max_count;
    const double x = kLeft + plot_w * b / kBins;
    const double y = kTop + plot_h - h;
    svg << "<rect x=\"" << num(x + 1) << "\" y=\"" << num(y) << "\" width=\""
        << num(plot_w / kBins - 2) << "\" height=\"" << num(h)
        << "\" fill=\"#4878a8\"/>\n";
  }

  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
      << num(kLeft + plot_w) << "\" y2=\"" << num(kTop + plot_h)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\""
      << num(kLeft) << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"black\"/>\n";

  for (int pct : {0, 25, 50, 75, 100}) {
    const double x = kLeft + plot_w * pct / 100.0;
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\""
        << num(x) << "\" y2=\"" << num(kTop + plot_h + 4) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << pct
        << "%</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "inconclusive percentage</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace bbrcli

#endif  // BBR_TOOLS_SVG_HPP
