#include "graspda/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace graspda {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string label_of(int cls) {
  const auto name = class_name(cls);
  return name == "?" ? std::to_string(cls) : std::string(name);
}

}  // namespace

void write_report_csv(std::ostream& out, std::span<const ComparisonReport> reports) {
  out << "method,paradigm,mean_acc,std_acc,p_vs_nonDA\n";
  for (const auto& rep : reports) {
    for (const auto& m : rep.methods) {
      out << to_string(m.method) << ',' << to_string(rep.paradigm) << ',' << fmt("%.4f", m.mean) << ','
          << fmt("%.4f", m.stddev) << ',' << (m.p_vs_baseline ? fmt("%.6g", *m.p_vs_baseline) : std::string("-"))
          << '\n';
    }
  }
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "true_class,pred_class,count,row_percent\n";
  for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
    const double row_total = cm.counts.row(r).sum();
    for (Eigen::Index c = 0; c < cm.counts.cols(); ++c) {
      const double pct = row_total > 0 ? 100.0 * cm.counts(r, c) / row_total : 0.0;
      out << cm.classes[r] << ',' << cm.classes[c] << ',' << cm.counts(r, c) << ',' << fmt("%.4f", pct) << '\n';
    }
  }
}

void write_confusion_svg(std::ostream& out, const ConfusionMatrix& cm, const std::string& title) {
  const auto n = static_cast<int>(cm.classes.size());
  constexpr int cell = 64, left = 70, top = 60;
  const int width = left + n * cell + 20;
  const int height = top + n * cell + 50;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  for (int r = 0; r < n; ++r) {
    const double row_total = cm.counts.row(r).sum();
    for (int c = 0; c < n; ++c) {
      const double frac = row_total > 0 ? cm.counts(r, c) / row_total : 0.0;
      // White to dark blue.
      const int red = static_cast<int>(std::lround(255 * (1.0 - 0.85 * frac)));
      const int green = static_cast<int>(std::lround(255 * (1.0 - 0.65 * frac)));
      const int x = left + c * cell, y = top + r * cell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"rgb(" << red << ',' << green << ",255)\" stroke=\"#888\"/>\n";
      out << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\" fill=\""
          << (frac > 0.55 ? "white" : "black") << "\">" << fmt("%.1f", 100.0 * frac) << "</text>\n";
    }
    out << "<text x=\"" << left - 8 << "\" y=\"" << top + r * cell + cell / 2 + 4 << "\" text-anchor=\"end\">"
        << label_of(cm.classes[r]) << "</text>\n";
  }
  for (int c = 0; c < n; ++c) {
    out << "<text x=\"" << left + c * cell + cell / 2 << "\" y=\"" << top - 8 << "\" text-anchor=\"middle\">"
        << label_of(cm.classes[c]) << "</text>\n";
  }
  out << "<text x=\"" << left + n * cell / 2 << "\" y=\"" << top + n * cell + 30
      << "\" text-anchor=\"middle\">predicted</text>\n";
  out << "</svg>\n";
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "param,value,method,paradigm,mean_acc,std_acc\n";
  for (const auto& r : rows) {
    out << r.param << ',' << fmt("%g", r.value) << ',' << to_string(r.method) << ',' << to_string(r.paradigm) << ','
        << fmt("%.4f", r.mean) << ',' << fmt("%.4f", r.stddev) << '\n';
  }
}

}  // namespace graspda
