#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "dap/error.hpp"

namespace dap::plot {

namespace {

constexpr double kWidth = 720, kHeight = 420, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Canvas {
  std::ostringstream svg;
  double x0, x1, y0, y1;

  Canvas(const std::string& title, double xmin, double xmax, double ymin, double ymax)
      : x0(xmin), x1(xmax), y0(ymin), y1(ymax) {
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double fx = x0 + (x1 - x0) * t / 4, fy = y0 + (y1 - y0) * t / 4;
      svg << "<text x=\"" << num(px(fx)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
          << num(fx) << "</text>\n";
      svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">" << num(fy)
          << "</text>\n";
    }
  }
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) svg << num(px(x)) << ',' << num(py(y)) << ' ';
    svg << "\"/>\n";
  }
  void legend(std::size_t i, const std::string& label, const char* color) {
    const double y = kTop + 14.0 * static_cast<double>(i);
    svg << "<rect x=\"" << kWidth - 170 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\"" << color
        << "\"/><text x=\"" << kWidth - 155 << "\" y=\"" << y << "\">" << escape(label) << "</text>\n";
  }
  std::string finish() {
    svg << "</svg>\n";
    return svg.str();
  }
};

std::string render_histogram(const nlohmann::json& j, const std::string& title) {
  constexpr int kBins = 40;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  double ymax = 0;
  for (const auto& [name, values] : j.items()) {
    std::vector<double> density(kBins, 0.0);
    const auto vals = values.get<std::vector<double>>();
    for (double v : vals) {
      const int b = std::clamp(static_cast<int>((v + 1.0) / 2.0 * kBins), 0, kBins - 1);
      density[b] += 1.0;
    }
    for (auto& d : density) {
      d = vals.empty() ? 0.0 : d / static_cast<double>(vals.size());
      ymax = std::max(ymax, d);
    }
    series.emplace_back(name, std::move(density));
  }
  Canvas c(title.empty() ? "cosine similarity distributions" : title, -1, 1, 0, ymax);
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::vector<std::pair<double, double>> pts;
    for (int b = 0; b < kBins; ++b) pts.emplace_back(-1.0 + (b + 0.5) * 2.0 / kBins, series[s].second[b]);
    const char* color = kColors[s % std::size(kColors)];
    c.polyline(pts, color);
    c.legend(s, series[s].first, color);
  }
  return c.finish();
}

std::string render_history(std::istream& is, const std::string& title) {
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::pair<double, double>> loss, mrr;
  while (std::getline(is, line)) {
    double e, l, m;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &e, &l, &m) == 3) {
      loss.emplace_back(e, l);
      mrr.emplace_back(e, m);
    }
  }
  if (loss.empty()) throw Error(ErrorKind::ParseError, "training history has no rows");
  double ymax = 1.0;
  for (const auto& p : loss) ymax = std::max(ymax, p.second);
  Canvas c(title.empty() ? "training history" : title, loss.front().first, loss.back().first, 0, ymax);
  c.polyline(loss, kColors[0]);
  c.legend(0, "loss", kColors[0]);
  c.polyline(mrr, kColors[1]);
  c.legend(1, "dev MRR", kColors[1]);
  return c.finish();
}

std::string render_ssrc(const nlohmann::json& j, const std::string& title) {
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& [k, v] : j.at("per_category").items()) bars.emplace_back(k, v.get<double>());
  for (const auto& [k, v] : j.at("per_perturbation").items()) bars.emplace_back("* " + k, v.get<double>());
  const double height = 60 + 18.0 * static_cast<double>(bars.size());
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title.empty() ? "SSRC MRR by category (*: perturbation)" : title) << "</text>\n";
  const double x0 = 200, span = kWidth - x0 - 60;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = 40 + 18.0 * static_cast<double>(i);
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << y + 11 << "\" text-anchor=\"end\">" << escape(bars[i].first)
        << "</text><rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << num(span * bars[i].second)
        << "\" height=\"14\" fill=\"" << kColors[bars[i].first[0] == '*' ? 1 : 0] << "\"/><text x=\""
        << num(x0 + span * bars[i].second + 4) << "\" y=\"" << y + 11 << "\">" << num(bars[i].second) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string render_file(const std::string& path, const std::string& title) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return render_history(is, title);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  if (j.contains("per_category")) return render_ssrc(j, title);
  if (j.is_object() && !j.contains("protocol")) return render_histogram(j, title);
  throw Error(ErrorKind::ParseError, path + ": not a histogram, history or SSRC report");
}

}  // namespace dap::plot
