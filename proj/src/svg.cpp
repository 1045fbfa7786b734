#include "circorb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

namespace circorb {

namespace {

constexpr int kSize = 512;
constexpr int kMargin = 32;
constexpr int kSamples = 512;

const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Window {
  Rational lo{0};
  Rational hi{1};

  double x(const Rational& v) const { return kMargin + to_double((v - lo) / (hi - lo)) * kSize; }
  double y(const Rational& v) const { return kMargin + kSize - to_double((v - lo) / (hi - lo)) * kSize; }
};

Window window_for(const GeneratorSystem& system, const std::vector<Rational>& points) {
  Window w;
  if (system.domain != DomainKind::Line) return w;
  std::vector<Rational> all = points;
  for (const auto& p : system.designated) all.push_back(p.value);
  if (all.empty()) return w;
  const auto [mn, mx] = std::minmax_element(all.begin(), all.end());
  w.lo = Rational(floor_int(*mn)) - 1;
  w.hi = Rational(ceil_int(*mx)) + 1;
  return w;
}

}  // namespace

std::string render_svg(const GeneratorSystem& system, const std::vector<Rational>& points) {
  const Window w = window_for(system, points);
  const int full = kSize + 2 * kMargin;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << full << "\" height=\"" << full << "\" viewBox=\"0 0 "
      << full << ' ' << full << "\">\n";
  out << "<title>" << system.name << "</title>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" fill=\"none\" stroke=\"#000\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << num(w.x(w.lo)) << "\" y1=\"" << num(w.y(w.lo)) << "\" x2=\"" << num(w.x(w.hi))
      << "\" y2=\"" << num(w.y(w.hi)) << "\" stroke=\"#bbb\" stroke-width=\"1\" stroke-dasharray=\"4 4\"/>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << full - 8 << "\" font-size=\"12\">" << to_string(w.lo)
      << "</text>\n";
  out << "<text x=\"" << kMargin + kSize << "\" y=\"" << full - 8 << "\" font-size=\"12\" text-anchor=\"end\">"
      << to_string(w.hi) << "</text>\n";

  const Rational prec = pow2(-24);
  for (std::size_t g = 0; g < system.generators.size(); ++g) {
    const PiecewiseMap& map = system.generators[g];
    const char* colour = kColours[g % std::size(kColours)];
    std::vector<std::vector<std::pair<double, double>>> runs(1);
    double last_y = 0;
    for (int i = 0; i < kSamples; ++i) {
      const Rational x = w.lo + (w.hi - w.lo) * make_rational(i, kSamples - 1);
      Rational y;
      try {
        y = eval(map, x, prec).mid();
      } catch (const Error&) {
        if (!runs.back().empty()) runs.emplace_back();
        continue;
      }
      if (system.domain == DomainKind::Circle) y = mod1(y);
      y = std::clamp(y, w.lo, w.hi);
      const double py = w.y(y);
      if (system.domain == DomainKind::Circle && !runs.back().empty() && std::abs(py - last_y) > kSize / 2.0)
        runs.emplace_back();
      runs.back().emplace_back(w.x(x), py);
      last_y = py;
    }
    for (const auto& run : runs) {
      if (run.size() < 2) continue;
      out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < run.size(); ++k) out << (k ? " " : "") << num(run[k].first) << ',' << num(run[k].second);
      out << "\"/>\n";
    }
    out << "<text x=\"" << kMargin + 6 << "\" y=\"" << kMargin + 16 + 14 * static_cast<int>(g)
        << "\" font-size=\"12\" fill=\"" << colour << "\">" << map.name() << "</text>\n";
  }

  const double axis = kMargin + kSize;
  for (const auto& p : points) {
    if (p < w.lo || p > w.hi) continue;
    out << "<circle cx=\"" << num(w.x(p)) << "\" cy=\"" << num(axis) << "\" r=\"2\" fill=\"#000\"/>\n";
  }
  for (const auto& d : system.designated) {
    if (d.value < w.lo || d.value > w.hi) continue;
    const double cx = w.x(d.value);
    out << "<path d=\"M" << num(cx) << ',' << num(axis - 4) << " l-5,-9 h10 z\" fill=\"#e377c2\"/>\n";
    out << "<text x=\"" << num(cx) << "\" y=\"" << num(axis - 16) << "\" font-size=\"10\" text-anchor=\"middle\">"
        << d.name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace circorb
