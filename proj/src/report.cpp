#include "mtd/report.hpp"

#include "mtd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mtd::report {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string num_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string results_csv(const sim::SimulationResult& result) {
    std::ostringstream os;
    os << "t";
    for (int j = 0; j < result.states.cols(); ++j) os << ",x_" << (j + 1);
    os << ",sigma,attack_active\n";
    for (int k = 0; k < result.samples(); ++k) {
        os << num(result.times[static_cast<std::size_t>(k)]);
        for (int j = 0; j < result.states.cols(); ++j) os << "," << num(result.states(k, j));
        os << "," << (result.sigma[static_cast<std::size_t>(k)] + 1) << ","
           << int(result.attack_active[static_cast<std::size_t>(k)]) << "\n";
    }
    return os.str();
}

std::string events_csv(const sim::SimulationResult& result) {
    std::ostringstream os;
    os << "t,kind,detail\n";
    for (const auto& e : result.events) {
        os << num(e.t) << "," << e.kind << "," << e.detail << "\n";
    }
    return os.str();
}

std::string lyapunov_csv(const std::vector<double>& times, const std::vector<double>& values) {
    std::ostringstream os;
    os << "t,V\n";
    const std::size_t n = std::min(times.size(), values.size());
    for (std::size_t k = 0; k < n; ++k) {
        os << num(times[k]) << "," << num(values[k]) << "\n";
    }
    return os.str();
}

std::string violations_csv(const std::vector<analysis::DecayViolation>& violations) {
    std::ostringstream os;
    os << "t,margin\n";
    for (const auto& v : violations) os << num(v.t) << "," << num(v.margin) << "\n";
    return os.str();
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Mapper {
    double x0, x1, y0, y1;
    double px, py, pw, ph;
    double mx(double x) const { return px + (x - x0) / (x1 - x0) * pw; }
    double my(double y) const { return py + (1.0 - (y - y0) / (y1 - y0)) * ph; }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    std::vector<double> ticks;
    const double span = hi - lo;
    if (span <= 0.0) return {lo};
    double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-12 * span; t += step) ticks.push_back(t);
    return ticks;
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series, int width,
                          int height) {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (first) {
                x0 = x1 = s.x[i];
                y0 = y1 = s.y[i];
                first = false;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    Mapper m{x0, x1, y0, y1, 70.0, 40.0, width - 100.0, height - 100.0};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\" font-weight=\"bold\">"
        << title << "</text>\n";

    // Grid and ticks.
    svg << "  <g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double t : nice_ticks(x0, x1)) {
        const double sx = m.mx(t);
        svg << "    <line x1=\"" << sx << "\" y1=\"" << m.py << "\" x2=\"" << sx << "\" y2=\""
            << m.py + m.ph << "\" stroke=\"#ddd\"/>\n";
        svg << "    <text x=\"" << sx << "\" y=\"" << m.py + m.ph + 16
            << "\" text-anchor=\"middle\">" << num_short(t) << "</text>\n";
    }
    for (double t : nice_ticks(y0, y1)) {
        const double sy = m.my(t);
        svg << "    <line x1=\"" << m.px << "\" y1=\"" << sy << "\" x2=\"" << m.px + m.pw
            << "\" y2=\"" << sy << "\" stroke=\"#ddd\"/>\n";
        svg << "    <text x=\"" << m.px - 6 << "\" y=\"" << sy + 4
            << "\" text-anchor=\"end\">" << num_short(t) << "</text>\n";
    }
    svg << "  </g>\n";
    svg << "  <rect x=\"" << m.px << "\" y=\"" << m.py << "\" width=\"" << m.pw << "\" height=\""
        << m.ph << "\" fill=\"none\" stroke=\"#000\"/>\n";

    // Axis labels.
    svg << "  <text x=\"" << m.px + m.pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n";
    svg << "  <text x=\"18\" y=\"" << m.py + m.ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90,18,"
        << m.py + m.ph / 2 << ")\">" << y_label << "</text>\n";

    const std::size_t max_points = 2000;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& sr = series[s];
        if (sr.x.size() < 2) continue;
        const std::size_t stride = std::max<std::size_t>(1, sr.x.size() / max_points);
        svg << "  <polyline fill=\"none\" stroke=\"" << kPalette[s % 10]
            << "\" stroke-width=\"1.4\" points=\"";
        double last_y = sr.y[0];
        bool started = false;
        for (std::size_t i = 0; i < sr.x.size(); i += stride) {
            if (!std::isfinite(sr.y[i])) continue;
            if (sr.staircase && started) {
                svg << " " << m.mx(sr.x[i]) << "," << m.my(last_y);
            }
            svg << (started ? " " : "") << m.mx(sr.x[i]) << "," << m.my(sr.y[i]);
            last_y = sr.y[i];
            started = true;
        }
        svg << "\"/>\n";
    }

    // Legend.
    svg << "  <g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double ly = m.py + 14 + 16.0 * static_cast<double>(s);
        const double lx = m.px + m.pw - 150;
        svg << "    <line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 22 << "\" y2=\""
            << ly << "\" stroke=\"" << kPalette[s % 10] << "\" stroke-width=\"2\"/>\n";
        svg << "    <text x=\"" << lx + 28 << "\" y=\"" << ly + 4 << "\">" << series[s].label
            << "</text>\n";
    }
    svg << "  </g>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::MissingInput, "cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out.good()) {
        throw Error(ErrorCode::MissingInput, "failed writing '" + path + "'");
    }
}

}  // namespace mtd::report
