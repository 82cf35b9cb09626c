#include "maxrf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "maxrf/common.hpp"

namespace maxrf {

namespace {
constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 55.0;
}  // namespace

void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const std::vector<SvgBand>& bands, const std::string& title,
                    const std::string& x_label, const std::string& y_label) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (!(xmax > xmin)) { xmax = xmin + 1.0; }
  if (!(ymax > ymin)) { ymax = ymin + 1.0; }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) {
    return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin);
  };
  auto py = [&](double y) {
    return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
  };

  std::ofstream out(path);
  if (!out) throw DataError("cannot write svg: " + path);
  out.precision(7);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& b : bands) {
    out << "<rect x=\"" << px(b.x0) << "\" y=\"" << kMargin << "\" width=\""
        << std::max(0.5, px(b.x1) - px(b.x0)) << "\" height=\""
        << kHeight - 2 * kMargin << "\" fill=\"" << b.color
        << "\" fill-opacity=\"0.4\"/>\n";
  }

  // axes
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
      << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
      << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"15\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 "
      << kHeight / 2 << ")\">" << y_label << "</text>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 15
      << "\" font-size=\"10\">" << xmin << "</text>\n";
  out << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 15
      << "\" text-anchor=\"end\" font-size=\"10\">" << xmax << "</text>\n";
  out << "<text x=\"" << kMargin - 5 << "\" y=\"" << kHeight - kMargin
      << "\" text-anchor=\"end\" font-size=\"10\">" << ymin << "</text>\n";
  out << "<text x=\"" << kMargin - 5 << "\" y=\"" << kMargin
      << "\" text-anchor=\"end\" font-size=\"10\">" << ymax << "</text>\n";

  int legend_row = 0;
  for (const auto& s : series) {
    if (s.points) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
            << "\" r=\"2\" fill=\"" << s.color << "\"/>\n";
      }
    } else if (!s.x.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      out << "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = kMargin + 15.0 * legend_row++;
      out << "<rect x=\"" << kWidth - kMargin - 110 << "\" y=\"" << ly - 8
          << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
      out << "<text x=\"" << kWidth - kMargin - 95 << "\" y=\"" << ly
          << "\" font-size=\"11\">" << s.label << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace maxrf
