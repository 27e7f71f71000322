#include "manav/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace manav {

namespace {

std::string points_attr(const std::vector<Vec2>& pts) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        os << (i > 0 ? " " : "") << pts[i].x() << ',' << -pts[i].y();
    }
    return os.str();
}

void polygon(std::ostream& os, const HPolytope& poly, const char* cls, const char* fill) {
    os << "  <polygon class=\"" << cls << "\" points=\"" << points_attr(vertices(poly))
       << "\" fill=\"" << fill << "\" stroke=\"#333\" stroke-width=\"0.01\"/>\n";
}

void polyline(std::ostream& os, const std::vector<Vec2>& pts, const char* cls, const char* stroke,
              double width, const char* dash = nullptr) {
    if (pts.size() < 2) {
        return;
    }
    os << "  <polyline class=\"" << cls << "\" points=\"" << points_attr(pts)
       << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"";
    if (dash != nullptr) {
        os << " stroke-dasharray=\"" << dash << "\"";
    }
    os << "/>\n";
}

void marker(std::ostream& os, const Vec2& p, const char* cls, const char* fill, double r) {
    os << "  <circle class=\"" << cls << "\" cx=\"" << p.x() << "\" cy=\"" << -p.y() << "\" r=\""
       << r << "\" fill=\"" << fill << "\"/>\n";
}

// Vehicle position at (or just past) time t, from the telemetry stream.
Vec2 position_at(const std::vector<TelemetryRow>& rows, double t) {
    for (const TelemetryRow& r : rows) {
        if (r.t >= t) {
            return {r.x, r.y};
        }
    }
    return rows.empty() ? Vec2::Zero() : Vec2(rows.back().x, rows.back().y);
}

}  // namespace

void emit_plots(const EpisodeLog& log, const Scenario& scenario, const std::string& svg_path) {
    std::ofstream os(svg_path);
    if (!os) {
        throw std::runtime_error("emit_plots: cannot open " + svg_path);
    }
    os.precision(6);

    const double pad = 0.3;
    const double x0 = scenario.arena_min.x() - pad;
    const double y0 = -(scenario.arena_max.y() + pad);
    const double w = scenario.arena_max.x() - scenario.arena_min.x() + 2.0 * pad;
    const double h = scenario.arena_max.y() - scenario.arena_min.y() + 2.0 * pad;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << ' ' << y0 << ' ' << w
       << ' ' << h << "\" width=\"800\" height=\"" << 800.0 * h / w << "\">\n";
    os << "  <rect class=\"arena\" x=\"" << scenario.arena_min.x() << "\" y=\""
       << -scenario.arena_max.y() << "\" width=\""
       << scenario.arena_max.x() - scenario.arena_min.x() << "\" height=\""
       << scenario.arena_max.y() - scenario.arena_min.y()
       << "\" fill=\"#fcfcfc\" stroke=\"#000\" stroke-width=\"0.02\"/>\n";

    for (const HPolytope& o : scenario.mapped) {
        polygon(os, o, "obstacle-mapped", "#9e9e9e");
    }
    for (const HPolytope& o : scenario.unmapped) {
        polygon(os, o, "obstacle-unmapped", "#e6842a");
    }
    for (const auto& chain : log.medial_chains) {
        polyline(os, chain, "medial-axis", "#9ecae1", 0.015);
    }
    static const char* kRouteColors[] = {"#1b9e77", "#7570b3", "#d95f02", "#e7298a", "#66a61e"};
    for (std::size_t v = 0; v < log.route_versions.size(); ++v) {
        polyline(os, log.route_versions[v], "route", kRouteColors[v % 5], 0.03, "0.08,0.05");
    }

    std::vector<Vec2> track;
    track.reserve(log.telemetry.size());
    for (const TelemetryRow& r : log.telemetry) {
        track.emplace_back(r.x, r.y);
    }
    polyline(os, track, "trajectory", "#000", 0.025);

    for (const ReplanEvent& r : log.replans) {
        marker(os, position_at(log.telemetry, r.t), "replan-marker", "#d62728", 0.09);
    }
    marker(os, scenario.start, "start-marker", "#2ca02c", 0.08);
    marker(os, scenario.goal, "goal-marker", "#1f77b4", 0.08);
    os << "</svg>\n";
    if (!os) {
        throw std::runtime_error("emit_plots: write failed for " + svg_path);
    }
}

}  // namespace manav
