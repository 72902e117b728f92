// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal SVG charts for run reports. Internal to the library.

#pragma once

#include <string>
#include <vector>

namespace kvswarm::svg {

struct Series {
  std::string label;
  std::vector<double> y;  // one value per x position
};

/// Line chart over shared x positions.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<double>& x,
                       const std::vector<Series>& series, const std::string& comment);

/// One bar per label.
std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& labels, const std::vector<double>& values,
                      const std::string& comment);

}  // namespace kvswarm::svg
