#include "seqdesign/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "seqdesign/errors.hpp"

namespace seqdesign {
namespace {

constexpr double kPanelWidth = 480.0;
constexpr double kPanelHeight = 360.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;
constexpr std::size_t kHistogramBins = 30;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v, const char* pattern = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  double width = 1.5;
};

struct Histogram {
  std::string label;
  std::vector<double> values;
};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      const double pad = std::max(1e-12, std::abs(lo) * 1e-3);
      lo -= pad;
      hi += pad;
    }
  }
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  Range x_range;
  Range y_range;
  std::vector<Series> lines;
  std::vector<Histogram> histograms;
};

class Canvas {
 public:
  explicit Canvas(std::size_t panels) : panels_(std::max<std::size_t>(panels, 1)) {}

  double width() const { return kPanelWidth * static_cast<double>(panels_); }

  void draw(const Panel& in, std::size_t index) {
    Panel p = in;
    if (!p.histograms.empty()) prepare_histograms(p);
    p.x_range.finish();
    p.y_range.finish();
    const double ox = kPanelWidth * static_cast<double>(index) + kMarginLeft;
    const double oy = kMarginTop;
    const double w = kPanelWidth - kMarginLeft - kMarginRight;
    const double h = kPanelHeight - kMarginTop - kMarginBottom;
    auto sx = [&](double x) { return ox + (x - p.x_range.lo) / (p.x_range.hi - p.x_range.lo) * w; };
    auto sy = [&](double y) {
      return oy + h - (y - p.y_range.lo) / (p.y_range.hi - p.y_range.lo) * h;
    };

    body_ << "<g>\n";
    body_ << "<text x=\"" << fmt(ox + w / 2) << "\" y=\"" << fmt(oy - 15)
          << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(p.title) << "</text>\n";
    body_ << "<rect x=\"" << fmt(ox) << "\" y=\"" << fmt(oy) << "\" width=\"" << fmt(w)
          << "\" height=\"" << fmt(h) << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double fx = p.x_range.lo + (p.x_range.hi - p.x_range.lo) * t / 4.0;
      const double fy = p.y_range.lo + (p.y_range.hi - p.y_range.lo) * t / 4.0;
      body_ << "<line x1=\"" << fmt(sx(fx)) << "\" y1=\"" << fmt(oy + h) << "\" x2=\"" << fmt(sx(fx))
            << "\" y2=\"" << fmt(oy + h + 5) << "\" stroke=\"#000000\"/>\n";
      body_ << "<text x=\"" << fmt(sx(fx)) << "\" y=\"" << fmt(oy + h + 18)
            << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(fx, "%.4g") << "</text>\n";
      body_ << "<line x1=\"" << fmt(ox - 5) << "\" y1=\"" << fmt(sy(fy)) << "\" x2=\"" << fmt(ox)
            << "\" y2=\"" << fmt(sy(fy)) << "\" stroke=\"#000000\"/>\n";
      body_ << "<text x=\"" << fmt(ox - 8) << "\" y=\"" << fmt(sy(fy) + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(fy, "%.4g") << "</text>\n";
    }
    body_ << "<text x=\"" << fmt(ox + w / 2) << "\" y=\"" << fmt(oy + h + 38)
          << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.x_label) << "</text>\n";
    body_ << "<text x=\"" << fmt(ox - 55) << "\" y=\"" << fmt(oy + h / 2)
          << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << fmt(ox - 55)
          << " " << fmt(oy + h / 2) << ")\">" << escape(p.y_label) << "</text>\n";

    std::size_t color = 0;
    for (const auto& bars : bars_) {
      const char* c = kPalette[color++ % std::size(kPalette)];
      for (const auto& [x0, x1, count] : bars) {
        if (count <= 0.0) continue;
        body_ << "<rect x=\"" << fmt(sx(x0)) << "\" y=\"" << fmt(sy(count)) << "\" width=\""
              << fmt(sx(x1) - sx(x0)) << "\" height=\"" << fmt(sy(0.0) - sy(count)) << "\" fill=\""
              << c << "\" fill-opacity=\"0.45\" stroke=\"" << c << "\"/>\n";
      }
    }
    for (const auto& s : p.lines) {
      const char* c = kPalette[color++ % std::size(kPalette)];
      if (s.x.empty()) continue;
      body_ << "<path fill=\"none\" stroke=\"" << c << "\" stroke-width=\"" << fmt(s.width)
            << "\" d=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        body_ << (i ? " L" : "M") << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i]));
      }
      body_ << "\"/>\n";
    }
    // Legend.
    std::vector<std::string> labels;
    for (const auto& hgram : p.histograms) labels.push_back(hgram.label);
    for (const auto& s : p.lines) labels.push_back(s.label);
    for (std::size_t i = 0; i < labels.size() && i < 8; ++i) {
      const double ly = oy + 12 + 14 * static_cast<double>(i);
      body_ << "<rect x=\"" << fmt(ox + w - 110) << "\" y=\"" << fmt(ly - 8)
            << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[i % std::size(kPalette)]
            << "\"/>\n";
      body_ << "<text x=\"" << fmt(ox + w - 95) << "\" y=\"" << fmt(ly + 1) << "\" font-size=\"10\">"
            << escape(labels[i]) << "</text>\n";
    }
    body_ << "</g>\n";
    bars_.clear();
  }

  std::string finish() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width(), "%.0f")
        << "\" height=\"" << fmt(kPanelHeight, "%.0f") << "\" viewBox=\"0 0 "
        << fmt(width(), "%.0f") << " " << fmt(kPanelHeight, "%.0f") << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  struct Bar {
    double x0, x1, count;
  };

  void prepare_histograms(Panel& p) {
    Range r;
    for (const auto& h : p.histograms) {
      for (double v : h.values) r.add(v);
    }
    r.finish();
    const double width = (r.hi - r.lo) / static_cast<double>(kHistogramBins);
    double top = 0.0;
    for (const auto& h : p.histograms) {
      std::vector<double> counts(kHistogramBins, 0.0);
      for (double v : h.values) {
        if (!std::isfinite(v)) continue;
        auto b = static_cast<std::size_t>(std::floor((v - r.lo) / width));
        counts[std::min(b, kHistogramBins - 1)] += 1.0;
      }
      std::vector<Bar> bars;
      for (std::size_t b = 0; b < kHistogramBins; ++b) {
        bars.push_back({r.lo + width * static_cast<double>(b),
                        r.lo + width * static_cast<double>(b + 1), counts[b]});
        top = std::max(top, counts[b]);
      }
      bars_.push_back(std::move(bars));
    }
    p.x_range = r;
    p.y_range = Range{};
    p.y_range.add(0.0);
    p.y_range.add(top > 0.0 ? top : 1.0);
  }

  std::size_t panels_;
  std::ostringstream body_;
  std::vector<std::vector<Bar>> bars_;
};

bool cell_number(const std::string& text, double& out) { return parse_double(text, out); }

std::string render_prd(const CsvTable& t) {
  Panel p;
  p.title = "PRD curve";
  p.x_label = "recall";
  p.y_label = "precision";
  p.x_range.add(0.0);
  p.x_range.add(1.0);
  p.y_range.add(0.0);
  p.y_range.add(1.0);
  const auto curve = t.column_index("curve");
  const auto rc = t.column_index("recall");
  const auto pc = t.column_index("precision");
  if (curve == CsvTable::npos || rc == CsvTable::npos || pc == CsvTable::npos) {
    throw ParseError(0, 0, "PRD table needs curve, precision and recall columns");
  }
  std::vector<std::string> order;
  std::map<std::string, Series> by_curve;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    double r = 0.0, pr = 0.0;
    if (!cell_number(row[rc], r) || !cell_number(row[pc], pr)) {
      throw ParseError(i + 1, rc, "non-numeric PRD value");
    }
    if (!by_curve.count(row[curve])) order.push_back(row[curve]);
    auto& s = by_curve[row[curve]];
    s.label = "curve " + row[curve];
    s.width = row[curve] == "mean" ? 2.5 : 1.0;
    s.x.push_back(r);
    s.y.push_back(pr);
  }
  for (const auto& key : order) p.lines.push_back(by_curve[key]);
  Canvas c(1);
  c.draw(p, 0);
  return c.finish();
}

std::string render_lines(const CsvTable& t, const std::string& title) {
  Panel p;
  p.title = title;
  p.x_label = t.header.empty() ? "" : t.header.front();
  p.y_label = "MAPE (%)";
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const auto& name = t.header[c];
    if (name.rfind("mape_", 0) != 0 || name.rfind("mape_std_", 0) == 0) continue;
    Series s;
    s.label = name;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      double x = 0.0, y = 0.0;
      if (!cell_number(t.rows[i][0], x)) continue;  // summary rows
      if (!cell_number(t.rows[i][c], y)) throw ParseError(i + 1, c, "non-numeric value in " + name);
      s.x.push_back(x);
      s.y.push_back(y);
      p.x_range.add(x);
      p.y_range.add(y);
    }
    p.lines.push_back(std::move(s));
  }
  p.y_range.add(0.0);
  Canvas canvas(1);
  canvas.draw(p, 0);
  return canvas.finish();
}

std::string render_histograms(const CsvTable& t, bool grouped) {
  const std::size_t first = grouped ? 1 : 0;
  std::vector<std::size_t> cols;
  for (std::size_t c = first; c < t.header.size() && cols.size() < 2; ++c) {
    if (t.header[c].rfind("achieved_", 0) == 0) continue;
    cols.push_back(c);
  }
  Canvas canvas(std::max<std::size_t>(cols.size(), 1));
  if (cols.empty()) {
    canvas.draw(Panel{}, 0);
    return canvas.finish();
  }
  for (std::size_t k = 0; k < cols.size(); ++k) {
    Panel p;
    p.title = "distribution of " + t.header[cols[k]];
    p.x_label = t.header[cols[k]];
    p.y_label = "count";
    std::vector<std::string> order;
    std::map<std::string, Histogram> groups;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      double v = 0.0;
      if (!cell_number(t.rows[i][cols[k]], v)) {
        throw ParseError(i + 1, cols[k], "non-numeric value in " + t.header[cols[k]]);
      }
      const std::string key = grouped ? t.rows[i][0] : "";
      if (!groups.count(key)) order.push_back(key);
      auto& h = groups[key];
      h.label = grouped ? t.header[0] + " " + key : t.header[cols[k]];
      h.values.push_back(v);
    }
    for (const auto& key : order) p.histograms.push_back(groups[key]);
    canvas.draw(p, k);
  }
  return canvas.finish();
}

}  // namespace

std::map<std::string, std::string> table_provenance(const CsvTable& table) {
  std::map<std::string, std::string> out;
  for (const auto& comment : table.comments) {
    std::size_t start = 0;
    while (start <= comment.size()) {
      const std::size_t comma = comment.find(',', start);
      const std::string item =
          comment.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const std::size_t eq = item.find('=');
      if (eq != std::string::npos) {
        auto key = item.substr(0, eq);
        key.erase(0, key.find_first_not_of(' '));
        out[key] = item.substr(eq + 1);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

std::string render_svg(const CsvTable& table) {
  const auto prov = table_provenance(table);
  const auto it = prov.find("kind");
  const std::string kind = it == prov.end() ? "" : it->second;
  if (kind == "prd_curve") return render_prd(table);
  if (kind == "refsize_sweep") return render_lines(table, "MAPE vs reference size");
  if (kind == "inpaint_sweep") return render_lines(table, "MAPE vs inpainted parameters");
  if (kind == "order_study") return render_lines(table, "MAPE per random generation order");
  if (kind == "noise_designs") return render_histograms(table, false);
  if (kind == "refsets_designs") return render_histograms(table, true);
  return "";
}

std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& csv_files,
                                              const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& csv : csv_files) {
    const auto svg = render_svg(read_csv(csv));
    if (svg.empty()) continue;
    auto target = out_dir / csv.filename();
    target.replace_extension(".svg");
    write_text_file(target, svg);
    written.push_back(target);
  }
  return written;
}

}  // namespace seqdesign
