#include "ubad/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ubad/errors.hpp"

namespace ubad {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series,
                           int width, int height) {
  const double ml = 60, mr = 20, mt = 36, mb = 46;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin < xmax)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymin < ymax)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
         "font-family=\"sans-serif\">" << escape(title) << "</text>\n";

  // axes and ticks
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 5.0;
    const double fy = ymin + (ymax - ymin) * i / 5.0;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(fx)
        << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 16
        << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">" << fmt(fx)
        << "</text>\n"
        << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
        << py(fy) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << ml - 6 << "\" y=\"" << py(fy) + 3
        << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">" << fmt(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
      << escape(x_label) << "</text>\n"
      << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 14 " << mt + ph / 2 << ")\">" << escape(y_label)
      << "</text>\n";

  for (const auto& s : series) {
    if (s.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
        << s.stroke_width << "\" points=\"";
    for (const auto& [x, y] : s.points) out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    out << "\"/>\n";
  }

  double ly = mt + 8;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    out << "<line x1=\"" << ml + pw - 110 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw - 90
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\""
        << s.stroke_width << "\"/>\n"
        << "<text x=\"" << ml + pw - 84 << "\" y=\"" << ly + 3
        << "\" font-size=\"10\" font-family=\"sans-serif\">" << escape(s.label) << "</text>\n";
    ly += 14;
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_matrix_heatmap(const CompoundMatrix& matrix, const FrameConfig& frames,
                               double delta_cap) {
  const int cell = 10;
  const int label_w = 190;
  const int rows_per_block = matrix.features * matrix.frames;
  const int gap = 14;
  const int width = label_w + matrix.days * cell + 10;
  const int height = 24 + 2 * rows_per_block * cell + gap + 20;

  const auto color = [&](double v) {
    const double t = std::clamp(v / delta_cap, -1.0, 1.0);
    // white at 0, red positive, blue negative
    int r = 255, g = 255, b = 255;
    if (t > 0) {
      g = b = static_cast<int>(std::lround(255 * (1.0 - t)));
    } else if (t < 0) {
      r = g = static_cast<int>(std::lround(255 * (1.0 + t)));
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"4\" y=\"14\" font-size=\"12\" font-family=\"sans-serif\">"
      << escape(matrix.user_id) << " ending " << format_date(matrix.end_day) << "</text>\n";

  const auto block = [&](const std::vector<double>& sigma, const std::vector<double>& weight,
                         int top, const char* name) {
    out << "<text x=\"4\" y=\"" << top - 3 << "\" font-size=\"10\" "
        << "font-family=\"sans-serif\">" << name << "</text>\n";
    for (int f = 0; f < matrix.features; ++f) {
      for (int t = 0; t < matrix.frames; ++t) {
        const int row = f * matrix.frames + t;
        out << "<text x=\"" << label_w - 6 << "\" y=\"" << top + row * cell + cell - 2
            << "\" text-anchor=\"end\" font-size=\"8\" font-family=\"sans-serif\">"
            << escape(matrix.feature_names[f]) << '/' << escape(frames.labels[t])
            << "</text>\n";
        for (int k = 0; k < matrix.days; ++k) {
          const std::size_t i = matrix.cell_index(f, t, k);
          out << "<rect x=\"" << label_w + k * cell << "\" y=\"" << top + row * cell
              << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
              << color(sigma[i] * weight[i]) << "\" stroke=\"#dddddd\" stroke-width=\"0.3\"/>\n";
        }
      }
    }
  };
  block(matrix.user_sigma, matrix.user_weight, 36, "user");
  block(matrix.group_sigma, matrix.group_weight, 36 + rows_per_block * cell + gap, "group");
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  if (!out) throw DataError("I/O error while writing: " + path);
}

}  // namespace ubad
