#include "gradbif/svg.hpp"

#include <cstdio>
#include <string>

namespace gradbif {

namespace {

constexpr double kSize = 800.0;

const char* kStyle =
    "<style>\n"
    ".frame{fill:#fff;stroke:#888;stroke-width:1}\n"
    ".fold{fill:none;stroke:#1f4e9c;stroke-width:2}\n"
    ".cusp{fill:#c0392b;stroke:none}\n"
    ".nonmorse{fill:#8e44ad;stroke:none}\n"
    ".stratum{fill:none;stroke:#d35400;stroke-width:2;stroke-dasharray:6 3}\n"
    ".codim2{fill:#27ae60;stroke:#000;stroke-width:0.5}\n"
    ".region{fill:#555;font:11px sans-serif}\n"
    ".unresolved{fill:none;stroke:#e74c3c;stroke-width:1}\n"
    ".unstable{fill:none;stroke:#c0392b;stroke-width:1.2}\n"
    ".stable{fill:none;stroke:#2471a3;stroke-width:1.2}\n"
    ".saddle{fill:#000}\n"
    ".unstable-node{fill:#c0392b}\n"
    ".stable-node{fill:#2471a3}\n"
    ".degenerate{fill:#8e44ad}\n"
    ".slice0{fill:none;stroke:#1f4e9c;stroke-width:1.5}\n"
    ".slice1{fill:none;stroke:#d35400;stroke-width:1.5}\n"
    ".slice2{fill:none;stroke:#27ae60;stroke-width:1.5}\n"
    ".slice3{fill:none;stroke:#8e44ad;stroke-width:1.5}\n"
    "</style>\n";

class Canvas {
public:
    explicit Canvas(const Window& w) : w_(w) {
        out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\" width=\"800\" height=\"800\">\n";
        out_ += kStyle;
        out_ += "<rect class=\"frame\" x=\"0\" y=\"0\" width=\"800\" height=\"800\"/>\n";
    }

    void polyline(const Polyline& line, const std::string& cls, bool closed = false) {
        if (line.size() < 2) return;
        out_ += closed ? "<polygon class=\"" : "<polyline class=\"";
        out_ += cls + "\" points=\"";
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (k) out_ += ' ';
            out_ += coord(line[k]);
        }
        out_ += "\"/>\n";
    }

    void dot(Vec2 p, const std::string& cls, double r = 4.0) {
        char buf[160];
        const Vec2 q = map(p);
        std::snprintf(buf, sizeof buf, "<circle class=\"%s\" cx=\"%.3f\" cy=\"%.3f\" r=\"%.1f\"/>\n", cls.c_str(),
                      q.x, q.y, r);
        out_ += buf;
    }

    void text(Vec2 p, const std::string& s, const std::string& cls) {
        char buf[96];
        const Vec2 q = map(p);
        std::snprintf(buf, sizeof buf, "<text class=\"%s\" x=\"%.3f\" y=\"%.3f\">", cls.c_str(), q.x, q.y);
        out_ += buf;
        for (char c : s) {
            switch (c) {
                case '<': out_ += "&lt;"; break;
                case '>': out_ += "&gt;"; break;
                case '&': out_ += "&amp;"; break;
                default: out_ += c;
            }
        }
        out_ += "</text>\n";
    }

    std::string finish() { return out_ + "</svg>\n"; }

private:
    Vec2 map(Vec2 p) const {
        return {(p.x - w_.lo1()) / (2.0 * w_.half_width1) * kSize,
                (w_.hi2() - p.y) / (2.0 * w_.half_width2) * kSize};
    }
    std::string coord(Vec2 p) const {
        char buf[64];
        const Vec2 q = map(p);
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", q.x, q.y);
        return buf;
    }

    Window w_;
    std::string out_;
};

void draw_caustic(Canvas& cv, const CausticCurve& c, const std::string& cls) {
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        cv.polyline(c.components[k], cls, k < c.closed.size() && c.closed[k]);
    }
    for (Vec2 p : c.cusp_points) cv.dot(p, "cusp");
    for (Vec2 p : c.non_morse_points) cv.dot(p, "nonmorse");
}

}  // namespace

std::string caustic_svg(const CausticCurve& c, const Window& base) {
    Canvas cv(base);
    draw_caustic(cv, c, "fold");
    return cv.finish();
}

std::string portrait_svg(const PhasePortrait& p) {
    Canvas cv(p.window);
    for (const auto& s : p.separatrices) cv.polyline(s.trajectory, is_unstable(s.branch) ? "unstable" : "stable");
    for (const auto& c : p.critical_points) cv.dot(c.position, std::string(to_string(c.kind)));
    return cv.finish();
}

std::string diagram_svg(const BifurcationDiagram& d) {
    Canvas cv(d.base);
    draw_caustic(cv, d.caustic, "fold");
    for (const auto& c : d.strata) cv.polyline(c.points, "stratum", c.closed);
    for (const auto& p : d.codim2_points) cv.dot(p.x, "codim2", 5.0);
    for (Vec2 p : d.unresolved) cv.dot(p, "unresolved", 3.0);
    for (std::size_t k = 0; k < d.regions.size(); ++k) cv.text(d.regions[k].sample, "R" + std::to_string(k), "region");
    return cv.finish();
}

std::string slices_svg(const std::vector<CausticCurve>& slices, const Window& base) {
    Canvas cv(base);
    for (std::size_t k = 0; k < slices.size(); ++k) draw_caustic(cv, slices[k], "slice" + std::to_string(k % 4));
    return cv.finish();
}

}  // namespace gradbif
