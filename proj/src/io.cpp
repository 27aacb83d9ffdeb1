#include "qcflow/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qcflow/error.hpp"

namespace qcflow::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, std::size_t line) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
        throw QcError(ErrorCode::ConfigParse, "line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

/// Maps plane coordinates into an SVG panel of the given size and offset.
struct Panel {
    double scale;
    double x0;
    double size;

    std::string point(ComplexPoint z) const {
        return format_double(x0 + size / 2 + scale * z.real()) + "," + format_double(size / 2 - scale * z.imag());
    }
};

void polyline(std::ostringstream& svg, const Panel& p, std::span<const ComplexPoint> pts, const char* stroke) {
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) svg << (i ? " " : "") << p.point(pts[i]);
    svg << "\"/>\n";
}

void circle(std::ostringstream& svg, const Panel& p, double r, const char* stroke, const char* dash = nullptr) {
    svg << "<circle cx=\"" << format_double(p.x0 + p.size / 2) << "\" cy=\"" << format_double(p.size / 2)
        << "\" r=\"" << format_double(p.scale * r) << "\" fill=\"none\" stroke=\"" << stroke << "\"";
    if (dash) svg << " stroke-dasharray=\"" << dash << "\"";
    svg << "/>\n";
}

constexpr double kPanel = 400.0;

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,re,im\n";
    for (const auto& s : traj.samples)
        out += format_double(s.t) + "," + format_double(s.x.real()) + "," + format_double(s.x.imag()) + "\n";
    for (const auto& e : traj.solver_meta.events) out += "# event," + e.name + "," + format_double(e.t) + "\n";
    return out;
}

Trajectory parse_trajectory_csv(const std::string& text) {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("# event,", 0) == 0) {
            const auto parts = split(line.substr(8), ',');
            if (parts.size() != 2 || parts[0].empty())
                throw QcError(ErrorCode::ConfigParse, "line " + std::to_string(n) + ": malformed event");
            traj.solver_meta.events.push_back({parts[0], to_double(parts[1], n)});
            continue;
        }
        if (line[0] == '#') continue;
        if (!header) {
            if (line != "t,re,im") throw QcError(ErrorCode::ConfigParse, "expected header 't,re,im'");
            header = true;
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != 3) throw QcError(ErrorCode::ConfigParse, "line " + std::to_string(n) + ": expected 3 columns");
        const double t = to_double(parts[0], n);
        if (!traj.samples.empty() && !(t > traj.samples.back().t))
            throw QcError(ErrorCode::ConfigParse, "line " + std::to_string(n) + ": times must increase");
        traj.samples.push_back({t, ComplexPoint(to_double(parts[1], n), to_double(parts[2], n)), ComplexPoint{}});
    }
    if (!header) throw QcError(ErrorCode::ConfigParse, "expected header 't,re,im'");
    if (traj.samples.empty()) throw QcError(ErrorCode::ConfigParse, "no samples");
    return traj;
}

std::string grid_csv(std::span<const QuasipolarGridRow> rows) {
    std::string out = "re,im,rho,theta,lambda_factor\n";
    for (const auto& r : rows) {
        out += format_double(r.z.real()) + "," + format_double(r.z.imag()) + "," + format_double(r.rho) + "," +
               format_double(r.theta) + "," + format_double(r.lambda_factor) + "\n";
    }
    return out;
}

std::string phase_portrait_svg(std::span<const Trajectory> trajs, const AnnulusWindow& window) {
    const Panel p{0.45 * kPanel / window.R, 0.0, kPanel};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
    svg << "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
    circle(svg, p, window.r, "#bbbbbb", "4 3");
    circle(svg, p, window.R, "#bbbbbb", "4 3");
    circle(svg, p, 1.0, "#d62728");
    for (const auto& tr : trajs) {
        std::vector<ComplexPoint> pts;
        for (const auto& s : tr.samples)
            if (std::abs(s.x) <= 1.2 * window.R) pts.push_back(s.x);
        if (pts.size() >= 2) polyline(svg, p, pts, "#1f77b4");
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string rectification_svg(const FieldDescriptor& field, const AnnulusWindow& window, std::size_t n_curves,
                              double tolerance) {
    const Panel left{0.45 * kPanel / window.R, 0.0, kPanel};
    const Panel right{left.scale, kPanel, kPanel};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" viewBox=\"0 0 800 400\">\n";
    svg << "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
    for (const Panel* p : {&left, &right}) {
        circle(svg, *p, window.r, "#bbbbbb", "4 3");
        circle(svg, *p, window.R, "#bbbbbb", "4 3");
        circle(svg, *p, 1.0, "#d62728");
    }
    // A positive constant factor only rescales time, so the curves are those of the normalized field.
    const FieldDescriptor g = field(1.0).real() > 0.0 ? field::normalized(field) : field;
    for (std::size_t j = 0; j < n_curves; ++j) {
        const double th = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_curves);
        const AnnulusTransit tr = extend_to_annulus(g, unit_phasor(th), window, tolerance);
        std::vector<ComplexPoint> curve, ray;
        for (const auto& s : tr.trajectory.samples) {
            curve.push_back(s.x);
            ray.push_back(std::abs(s.x) * unit_phasor(th));
        }
        polyline(svg, left, curve, "#1f77b4");
        polyline(svg, right, ray, "#1f77b4");
    }
    svg << "</svg>\n";
    return svg.str();
}

nlohmann::json to_json(const VariationEstimate& v) {
    return {{"p", v.p}, {"value", v.value}, {"optimal_partition", v.optimal_partition}};
}

nlohmann::json to_json(const QuadraticBoundReport& r) {
    return {{"variation2", r.variation2},     {"diam_image", r.diam_image},
            {"ratio", r.ratio},               {"coarse_ratio", r.coarse_ratio},
            {"refinement_change", r.refinement_change}};
}

nlohmann::json to_json(const CertificateReport& r) {
    return {{"times", r.partition.times},
            {"terminal", std::string(to_string(r.partition.terminal))},
            {"log_ratios", r.log_ratios},
            {"bound_terms", r.bound_terms},
            {"total_lhs", r.total_lhs},
            {"total_rhs_shape", r.total_rhs_shape},
            {"implied_constant", r.implied_constant}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw QcError(ErrorCode::ConfigParse, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw QcError(ErrorCode::InvalidArgument, "cannot write " + tmp);
        out << content;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw QcError(ErrorCode::InvalidArgument, "write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw QcError(ErrorCode::InvalidArgument, "cannot rename onto " + path + ": " + std::strerror(errno));
    }
}

}  // namespace qcflow::io
