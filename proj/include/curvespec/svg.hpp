#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "curvespec/vec2.hpp"

namespace curvespec {

// Minimal deterministic SVG plotter: polylines and scatter markers in data
// coordinates, auto-scaled to the viewport with a fixed margin.  Enough for
// curve overlays and variance scatter plots without an external dependency.
class SvgPlot {
 public:
  SvgPlot(int width = 640, int height = 480, std::string title = {})
      : width_(width), height_(height), title_(std::move(title)) {}

  void line(std::vector<Vec2> points, std::string color = "#000000",
            double stroke_width = 1.5, bool dashed = false) {
    elements_.push_back(Element{Element::kLine, std::move(points),
                                std::move(color), stroke_width, dashed});
  }

  // marker: "circle" (open circle) or "cross".
  void scatter(std::vector<Vec2> points, std::string color = "#000000",
               std::string marker = "circle") {
    elements_.push_back(Element{marker == "cross" ? Element::kCross
                                                  : Element::kCircle,
                                std::move(points), std::move(color), 1.5,
                                false});
  }

  std::string render() const {
    double lo_x = 0.0, hi_x = 1.0, lo_y = 0.0, hi_y = 1.0;
    bool any = false;
    for (const Element& e : elements_)
      for (const Vec2& p : e.points) {
        if (!any) {
          lo_x = hi_x = p.x;
          lo_y = hi_y = p.y;
          any = true;
        } else {
          lo_x = std::min(lo_x, p.x);
          hi_x = std::max(hi_x, p.x);
          lo_y = std::min(lo_y, p.y);
          hi_y = std::max(hi_y, p.y);
        }
      }
    if (hi_x - lo_x <= 0.0) hi_x = lo_x + 1.0;
    if (hi_y - lo_y <= 0.0) hi_y = lo_y + 1.0;

    const double margin = 40.0;
    const double span_x = (width_ - 2.0 * margin) / (hi_x - lo_x);
    const double span_y = (height_ - 2.0 * margin) / (hi_y - lo_y);
    auto px = [&](const Vec2& p) {
      return Vec2{margin + (p.x - lo_x) * span_x,
                  height_ - margin - (p.y - lo_y) * span_y};
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
           "\" viewBox=\"0 0 " + std::to_string(width_) + " " +
           std::to_string(height_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += "<rect x=\"" + fmt(margin) + "\" y=\"" + fmt(margin) +
           "\" width=\"" + fmt(width_ - 2.0 * margin) + "\" height=\"" +
           fmt(height_ - 2.0 * margin) +
           "\" fill=\"none\" stroke=\"#888888\"/>\n";
    if (!title_.empty())
      out += "<text x=\"" + fmt(width_ / 2.0) +
             "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"14\">" +
             title_ + "</text>\n";
    out += axis_label(margin, height_ - margin + 16.0, lo_x, "start");
    out += axis_label(width_ - margin, height_ - margin + 16.0, hi_x, "end");
    out += axis_label(margin - 6.0, height_ - margin, lo_y, "end");
    out += axis_label(margin - 6.0, margin + 4.0, hi_y, "end");

    for (const Element& e : elements_) {
      if (e.type == Element::kLine) {
        out += "<polyline fill=\"none\" stroke=\"" + e.color +
               "\" stroke-width=\"" + fmt(e.stroke_width) + "\"";
        if (e.dashed) out += " stroke-dasharray=\"6 4\"";
        out += " points=\"";
        for (const Vec2& p : e.points) {
          const Vec2 q = px(p);
          out += fmt(q.x) + "," + fmt(q.y) + " ";
        }
        if (!e.points.empty()) out.pop_back();
        out += "\"/>\n";
      } else if (e.type == Element::kCircle) {
        for (const Vec2& p : e.points) {
          const Vec2 q = px(p);
          out += "<circle cx=\"" + fmt(q.x) + "\" cy=\"" + fmt(q.y) +
                 "\" r=\"3\" fill=\"none\" stroke=\"" + e.color + "\"/>\n";
        }
      } else {
        for (const Vec2& p : e.points) {
          const Vec2 q = px(p);
          out += "<path stroke=\"" + e.color + "\" d=\"M" + fmt(q.x - 3.0) +
                 " " + fmt(q.y - 3.0) + " L" + fmt(q.x + 3.0) + " " +
                 fmt(q.y + 3.0) + " M" + fmt(q.x - 3.0) + " " +
                 fmt(q.y + 3.0) + " L" + fmt(q.x + 3.0) + " " +
                 fmt(q.y - 3.0) + "\"/>\n";
        }
      }
    }
    out += "</svg>\n";
    return out;
  }

 private:
  struct Element {
    enum Type { kLine, kCircle, kCross };
    Type type;
    std::vector<Vec2> points;
    std::string color;
    double stroke_width;
    bool dashed;
  };

  static std::string fmt(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
  }

  static std::string axis_label(double x, double y, double value,
                                const char* anchor) {
    return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" +
           std::string(anchor) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(value) +
           "</text>\n";
  }

  int width_;
  int height_;
  std::string title_;
  std::vector<Element> elements_;
};

}  // namespace curvespec
