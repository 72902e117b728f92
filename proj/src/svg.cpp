// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "svg.hpp"

#include <algorithm>
#include <cstdio>

namespace kvswarm::svg {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 80;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
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

std::string frame(const std::string& title, const std::string& x_label, const std::string& y_label,
                  const std::string& comment) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<!-- " + escape(comment) + " -->\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  out += "<text x=\"" + num(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" +
         num(kHeight - 10) + "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + num(kTop + (kHeight - kTop - kBottom) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + (kHeight - kTop - kBottom) / 2) + ")\">" + escape(y_label) + "</text>\n";
  const double x0 = kLeft, y0 = kHeight - kBottom, x1 = kWidth - kRight;
  out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" +
         num(y0) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x0) + "\" y2=\"" +
         num(y0) + "\" stroke=\"black\"/>\n";
  return out;
}

std::string y_ticks(double y_max) {
  std::string out;
  const double plot_h = kHeight - kTop - kBottom;
  for (int i = 0; i <= 4; ++i) {
    const double v = y_max * i / 4.0;
    const double y = kHeight - kBottom - plot_h * i / 4.0;
    out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
           tick(v) + "</text>\n";
  }
  return out;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<double>& x,
                       const std::vector<Series>& series, const std::string& comment) {
  std::string out = frame(title, x_label, y_label, comment);
  double y_max = 0.0;
  for (const auto& s : series) {
    for (double v : s.y) y_max = std::max(y_max, v);
  }
  if (y_max <= 0.0) y_max = 1.0;
  const double x_min = x.empty() ? 0.0 : *std::min_element(x.begin(), x.end());
  double x_span = x.empty() ? 1.0 : *std::max_element(x.begin(), x.end()) - x_min;
  if (x_span <= 0.0) x_span = 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + plot_w * (v - x_min) / x_span; };
  auto py = [&](double v) { return kHeight - kBottom - plot_h * v / y_max; };

  out += y_ticks(y_max);
  for (double v : x) {
    out += "<text x=\"" + num(px(v)) + "\" y=\"" + num(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\">" + tick(v) + "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string points;
    for (std::size_t k = 0; k < series[i].y.size() && k < x.size(); ++k) {
      points += num(px(x[k])) + "," + num(py(series[i].y[k])) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(i);
    out += "<rect x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(ly) +
           "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + num(kWidth - kRight + 28) + "\" y=\"" + num(ly + 9) + "\">" +
           escape(series[i].label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& labels, const std::vector<double>& values,
                      const std::string& comment) {
  std::string out = frame(title, "", y_label, comment);
  double y_max = 0.0;
  for (double v : values) y_max = std::max(y_max, v);
  if (y_max <= 0.0) y_max = 1.0;
  out += y_ticks(y_max);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double slot = values.empty() ? plot_w : plot_w / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double h = plot_h * values[i] / y_max;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(kHeight - kBottom - h) + "\" width=\"" +
           num(slot * 0.7) + "\" height=\"" + num(h) + "\" fill=\"" +
           kPalette[i % std::size(kPalette)] + "\"/>\n";
    out += "<text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(kHeight - kBottom + 16) +
           "\" text-anchor=\"middle\">" + escape(i < labels.size() ? labels[i] : "") + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace kvswarm::svg
