#include "pattern_ising/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pattern_ising {

namespace {

// Fixed 6-decimal formatting keeps the output byte-stable across platforms.
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v + 0.0);  // +0.0 kills negative zero
  return buf;
}

}  // namespace

std::string render_svg(const CirclePattern& pattern, const SvgOptions& options) {
  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& v : pattern.vertices()) {
    xmin = std::min(xmin, v.pos.real() - v.radius);
    xmax = std::max(xmax, v.pos.real() + v.radius);
    ymin = std::min(ymin, v.pos.imag() - v.radius);
    ymax = std::max(ymax, v.pos.imag() + v.radius);
  }
  if (pattern.vertex_count() == 0) xmin = xmax = ymin = ymax = 0.0;
  xmin -= options.margin;
  ymin -= options.margin;
  xmax += options.margin;
  ymax += options.margin;

  const double s = options.scale;
  const double w = (xmax - xmin) * s;
  const double h = (ymax - ymin) * s;
  // SVG y runs down; geometry y runs up.
  auto X = [&](double x) { return (x - xmin) * s; };
  auto Y = [&](double y) { return (ymax - y) * s; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w)
      << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << " "
      << num(h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (options.draw_circles) {
    out << "<g fill=\"none\" stroke=\"#bbd4ee\" stroke-width=\"1\">\n";
    for (const auto& v : pattern.vertices())
      out << "<circle cx=\"" << num(X(v.pos.real())) << "\" cy=\""
          << num(Y(v.pos.imag())) << "\" r=\"" << num(v.radius * s) << "\"/>\n";
    out << "</g>\n";
  }
  if (options.draw_edges && options.edge_values.empty()) {
    out << "<g stroke=\"#333333\" stroke-width=\"1.5\">\n";
    for (const auto& e : pattern.edges()) {
      const Point a = pattern.vertex(e.u).pos;
      const Point b = pattern.vertex(e.v).pos;
      out << "<line x1=\"" << num(X(a.real())) << "\" y1=\"" << num(Y(a.imag()))
          << "\" x2=\"" << num(X(b.real())) << "\" y2=\"" << num(Y(b.imag()))
          << "\"/>\n";
    }
    out << "</g>\n";
  } else if (options.draw_edges) {
    if (static_cast<int>(options.edge_values.size()) != pattern.edge_count())
      throw Error("edge overlay needs one value per edge");
    double top = 0.0;
    for (double v : options.edge_values) top = std::max(top, std::abs(v));
    if (top == 0.0) top = 1.0;
    out << "<g stroke-linecap=\"round\">\n";
    for (int e = 0; e < pattern.edge_count(); ++e) {
      const Point a = pattern.vertex(pattern.edge(e).u).pos;
      const Point b = pattern.vertex(pattern.edge(e).v).pos;
      const double t = std::abs(options.edge_values[e]) / top;
      const int red = static_cast<int>(221 + t * (178 - 221));
      const int green = static_cast<int>(221 + t * (34 - 221));
      const int blue = static_cast<int>(221 + t * (0 - 221));
      out << "<line x1=\"" << num(X(a.real())) << "\" y1=\""
          << num(Y(a.imag())) << "\" x2=\"" << num(X(b.real())) << "\" y2=\""
          << num(Y(b.imag())) << "\" stroke=\"rgb(" << red << "," << green
          << "," << blue << ")\" stroke-width=\"" << num(1.0 + 2.5 * t)
          << "\"/>\n";
    }
    out << "</g>\n";
  }
  if (options.draw_chords) {
    out << "<g stroke=\"#cc5533\" stroke-width=\"1\" stroke-dasharray=\"4 3\">\n";
    for (const auto& e : pattern.edges()) {
      const Point a = pattern.dual_position(e.du);
      const Point b = pattern.dual_position(e.dv);
      out << "<line x1=\"" << num(X(a.real())) << "\" y1=\"" << num(Y(a.imag()))
          << "\" x2=\"" << num(X(b.real())) << "\" y2=\"" << num(Y(b.imag()))
          << "\"/>\n";
    }
    out << "</g>\n";
  }

  out << "<g fill=\"#1a4a8a\">\n";
  for (const auto& v : pattern.vertices())
    out << "<circle cx=\"" << num(X(v.pos.real())) << "\" cy=\""
        << num(Y(v.pos.imag())) << "\" r=\"3\"/>\n";
  out << "</g>\n";
  out << "<g fill=\"#cc5533\">\n";
  for (int d = 0; d < pattern.dual_count(); ++d) {
    const Point p = pattern.dual_position(d);
    out << "<circle cx=\"" << num(X(p.real())) << "\" cy=\""
        << num(Y(p.imag())) << "\" r=\"2\"/>\n";
  }
  out << "</g>\n";

  if (options.label_vertices) {
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#1a4a8a\">\n";
    for (int v = 0; v < pattern.vertex_count(); ++v) {
      const Point p = pattern.vertex(v).pos;
      out << "<text x=\"" << num(X(p.real()) + 4) << "\" y=\""
          << num(Y(p.imag()) - 4) << "\">" << v << "</text>\n";
    }
    out << "</g>\n";
  }

  out << "</svg>\n";
  return out.str();
}

void save_svg(const CirclePattern& pattern, const std::string& path,
              const SvgOptions& options) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << render_svg(pattern, options);
}

}  // namespace pattern_ising
