#include "mmc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmc/errors.hpp"

namespace mmc {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double nice_step(double span) {
  if (span <= 0) return 1.0;
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (raw <= mult * mag) return mult * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_line_plot(const std::string& title, const std::string& xlabel,
                             const std::string& ylabel,
                             const std::vector<PlotSeries>& series, double gap_x) {
  const int width = 760, height = 480;
  const int ml = 70, mr = 170, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmin < xmax)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymin < ymax)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + pw * (x - xmin) / (xmax - xmin); };
  auto py = [&](double y) { return mt + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // Axes box and ticks.
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  double xs = nice_step(xmax - xmin);
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-12; t += xs) {
    double gx = px(t);
    out << "<line x1=\"" << num(gx) << "\" y1=\"" << mt + ph << "\" x2=\"" << num(gx)
        << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(gx) << "\" y=\"" << mt + ph + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(t) << "</text>\n";
  }
  double ys = nice_step(ymax - ymin);
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-12; t += ys) {
    double gy = py(t);
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << num(gy) << "\" x2=\"" << ml
        << "\" y2=\"" << num(gy) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 9 << "\" y=\"" << num(gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(t) << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << xlabel << "</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << ylabel
      << "</text>\n";

  // Series.
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 8];
    const auto& pts = series[i].points;
    std::ostringstream poly;
    size_t run = 0;
    auto flush = [&]() {
      std::string body = poly.str();
      if (run >= 2)
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"" << body << "\"/>\n";
      poly.str("");
      run = 0;
    };
    for (size_t k = 0; k < pts.size(); ++k) {
      bool gap = k > 0 && gap_x > 0 && pts[k].first - pts[k - 1].first > gap_x;
      if (gap) flush();
      poly << num(px(pts[k].first)) << "," << num(py(pts[k].second)) << " ";
      ++run;
      out << "<circle cx=\"" << num(px(pts[k].first)) << "\" cy=\""
          << num(py(pts[k].second)) << "\" r=\"1.6\" fill=\"" << color << "\"/>\n";
    }
    flush();
    double ly = mt + 16 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << ml + pw + 34 << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw + 40 << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[i].label
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace mmc
