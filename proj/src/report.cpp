/*
 * Copyright 2026 The mdeval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mde/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "mde/error.hpp"

namespace mde {

namespace {

constexpr double kWidth = 800.0, kHeight = 600.0;
constexpr double kLeft = 90.0, kRight = 760.0, kTop = 70.0, kBottom = 520.0;

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string EscapeXml(const std::string& s) {
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

struct Range {
  double lo, hi;
};

Range Padded(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(lo) * 0.05, 0.5);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string RenderScatterSvg(const ScatterPlot& plot) {
  if (plot.x.empty() || plot.x.size() != plot.accuracy.size())
    throw Error(ErrorCode::kInvalidArgument, "scatter plot needs matching, non-empty x and y");
  std::vector<double> ypct;
  for (double a : plot.accuracy) ypct.push_back(100.0 * a);
  const Range xr = Padded(plot.x), yr = Padded(ypct);
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft); };
  auto py = [&](double y) { return kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" "
       "height=\"600\" font-family=\"sans-serif\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + Fmt("%.0f", kWidth) + "\" height=\"" +
       Fmt("%.0f", kHeight) + "\" fill=\"white\"/>\n";
  s += "<defs><clipPath id=\"plot-area\"><rect x=\"" + Fmt("%.2f", kLeft) + "\" y=\"" +
       Fmt("%.2f", kTop) + "\" width=\"" + Fmt("%.2f", kRight - kLeft) + "\" height=\"" +
       Fmt("%.2f", kBottom - kTop) + "\"/></clipPath></defs>\n";
  s += "<text x=\"400\" y=\"36\" text-anchor=\"middle\" font-size=\"20\">" +
       EscapeXml(plot.measure) + " vs accuracy</text>\n";

  // Axes and ticks.
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + Fmt("%.2f", kLeft) + "\" y1=\"" + Fmt("%.2f", kBottom) + "\" x2=\"" +
       Fmt("%.2f", kRight) + "\" y2=\"" + Fmt("%.2f", kBottom) + "\"/>\n";
  s += "<line x1=\"" + Fmt("%.2f", kLeft) + "\" y1=\"" + Fmt("%.2f", kTop) + "\" x2=\"" +
       Fmt("%.2f", kLeft) + "\" y2=\"" + Fmt("%.2f", kBottom) + "\"/>\n";
  s += "</g>\n<g font-size=\"12\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    s += "<text x=\"" + Fmt("%.2f", px(fx)) + "\" y=\"" + Fmt("%.2f", kBottom + 20) +
         "\" text-anchor=\"middle\">" + Fmt("%.4g", fx) + "</text>\n";
    s += "<text x=\"" + Fmt("%.2f", kLeft - 8) + "\" y=\"" + Fmt("%.2f", py(fy) + 4) +
         "\" text-anchor=\"end\">" + Fmt("%.1f", fy) + "</text>\n";
  }
  s += "</g>\n";
  s += "<text x=\"" + Fmt("%.2f", (kLeft + kRight) / 2) +
       "\" y=\"565\" text-anchor=\"middle\" font-size=\"14\">" + EscapeXml(plot.measure) +
       "</text>\n";
  s += "<text x=\"24\" y=\"" + Fmt("%.2f", (kTop + kBottom) / 2) +
       "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 24 " +
       Fmt("%.2f", (kTop + kBottom) / 2) + ")\">accuracy (%)</text>\n";

  // Fitted line across the x range, clipped to the plot area.
  const double y0 = 100.0 * (plot.slope * xr.lo + plot.intercept);
  const double y1 = 100.0 * (plot.slope * xr.hi + plot.intercept);
  s += "<line clip-path=\"url(#plot-area)\" x1=\"" + Fmt("%.2f", px(xr.lo)) + "\" y1=\"" +
       Fmt("%.2f", py(y0)) + "\" x2=\"" + Fmt("%.2f", px(xr.hi)) + "\" y2=\"" +
       Fmt("%.2f", py(y1)) + "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";

  s += "<g fill=\"#1f77b4\" fill-opacity=\"0.8\">\n";
  for (std::size_t i = 0; i < plot.x.size(); ++i)
    s += "<circle cx=\"" + Fmt("%.2f", px(plot.x[i])) + "\" cy=\"" +
         Fmt("%.2f", py(ypct[i])) + "\" r=\"5\"/>\n";
  s += "</g>\n";

  s += "<g font-size=\"16\">\n";
  s += "<text x=\"" + Fmt("%.2f", kLeft + 16) + "\" y=\"" + Fmt("%.2f", kTop + 24) +
       "\">R²=" + Fmt("%.3f", plot.r_squared) + "</text>\n";
  s += "<text x=\"" + Fmt("%.2f", kLeft + 16) + "\" y=\"" + Fmt("%.2f", kTop + 46) +
       "\">r=" + Fmt("%.3f", plot.pearson) + "</text>\n";
  s += "<text x=\"" + Fmt("%.2f", kLeft + 16) + "\" y=\"" + Fmt("%.2f", kTop + 68) +
       "\">ρ=" + Fmt("%.3f", plot.spearman) + "</text>\n";
  s += "</g>\n</svg>\n";
  return s;
}

std::vector<ScatterPlot> ScatterPlotsFromResultJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("result JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("results")) {
    if (!j["results"].is_array() || j["results"].empty())
      throw Error(ErrorCode::kInvalidArgument, "result JSON: /results is empty");
    j = j["results"][0];
  }
  if (!j.is_object() || !j.contains("seen") || !j["seen"].is_array() ||
      !j.contains("measures") || !j["measures"].is_object())
    throw Error(ErrorCode::kInvalidArgument,
                "result JSON: expected /seen (array) and /measures (object)");
  const auto& seen = j["seen"];
  const auto& measures = j["measures"];
  if (seen.empty() || measures.empty())
    throw Error(ErrorCode::kInvalidArgument, "result JSON holds no points to plot");

  std::vector<ScatterPlot> plots;
  try {
    for (const auto& [name, m] : measures.items()) {
      ScatterPlot p;
      p.measure = name;
      for (const auto& d : seen) {
        p.x.push_back(d.at("values").at(name).get<double>());
        p.accuracy.push_back(d.at("accuracy").get<double>());
      }
      p.slope = m.at("model").at("w").get<double>();
      p.intercept = m.at("model").at("b").get<double>();
      p.r_squared = m.at("r2").get<double>();
      p.pearson = m.at("pearson").get<double>();
      p.spearman = m.at("spearman").get<double>();
      plots.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("result JSON: ") + e.what());
  }
  return plots;
}

}  // namespace mde
