#include <algorithm>
#include <cstdio>
#include <string>

#include "molte/csv.hpp"
#include "molte/report.hpp"

namespace molte {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 360.0;
constexpr double kMargin = 48.0;
const char* const kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string escape(std::string_view s) {
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

// Fixed precision keeps the markup stable across platforms.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string header(std::string_view title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                  num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">" + escape(title) + "</text>\n";
  s += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) + "\" x2=\"" + num(kWidth - kMargin / 2) +
       "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) + "\" y2=\"" +
       num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  return s;
}

std::string rect(double x, double y, double w, double h, const char* fill) {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"" + fill + "\"/>\n";
}

std::string label(double x, double y, std::string_view text, const char* anchor = "middle") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + escape(text) + "</text>\n";
}

}  // namespace

std::string svg_bar_chart(std::string_view title, std::span<const std::string> labels, std::span<const double> values) {
  std::string s = header(title);
  const double top = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  const double scale = top > 0.0 ? (kHeight - 2 * kMargin) / top : 0.0;
  const double slot = values.empty() ? 0.0 : (kWidth - 1.5 * kMargin) / static_cast<double>(values.size());
  // Label every bar only when they fit.
  const std::size_t stride = std::max<std::size_t>(1, values.size() / 20);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double h = std::max(0.0, values[i]) * scale;
    const double x = kMargin + slot * static_cast<double>(i);
    s += rect(x + 0.1 * slot, kHeight - kMargin - h, 0.8 * slot, h, kPalette[0]);
    if (i % stride == 0 && i < labels.size()) s += label(x + slot / 2, kHeight - kMargin + 14, labels[i]);
  }
  s += label(kMargin - 4, kMargin + 4, format_double(top), "end");
  s += "</svg>\n";
  return s;
}

std::string svg_histogram(std::string_view title, std::span<const double> edges,
                          std::span<const std::string> series_labels,
                          const std::vector<std::vector<std::size_t>>& counts) {
  std::string s = header(title);
  const std::size_t bins = edges.size() > 1 ? edges.size() - 1 : 0;
  std::size_t top = 0;
  for (const auto& c : counts) {
    for (std::size_t v : c) top = std::max(top, v);
  }
  const double scale = top > 0 ? (kHeight - 2 * kMargin) / static_cast<double>(top) : 0.0;
  const double slot = bins ? (kWidth - 1.5 * kMargin) / static_cast<double>(bins) : 0.0;
  const double bar = counts.empty() ? 0.0 : 0.8 * slot / static_cast<double>(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    for (std::size_t b = 0; b < bins && b < counts[k].size(); ++b) {
      const double h = static_cast<double>(counts[k][b]) * scale;
      const double x = kMargin + slot * static_cast<double>(b) + 0.1 * slot + bar * static_cast<double>(k);
      s += rect(x, kHeight - kMargin - h, bar, h, color);
    }
    if (k < series_labels.size()) {
      const double y = kMargin + 14.0 * static_cast<double>(k);
      s += rect(kWidth - 150, y - 8, 10, 10, color);
      s += label(kWidth - 136, y, series_labels[k], "start");
    }
  }
  if (bins) {
    s += label(kMargin, kHeight - kMargin + 14, format_double(edges.front()));
    s += label(kWidth - kMargin / 2, kHeight - kMargin + 14, format_double(edges.back()));
  }
  s += label(kMargin - 4, kMargin + 4, std::to_string(top), "end");
  s += "</svg>\n";
  return s;
}

}  // namespace molte
