#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qksim/scenario.hpp"
#include "qksim/version.hpp"

// CSV and SVG emitters for scenario results. Number formatting goes through
// one snprintf path so identical inputs give byte-identical files.

namespace qksim {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) {
        return "";  // visibility column for the BB84 protocols
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_provenance(std::ostream& os, const ScenarioResult& r) {
    os << "# qksim version=" << r.version << "\n";
    os << "# config_hash=" << r.hash << "\n";
    os << "# seed=" << r.config.seed << "\n";
}

void write_results_csv(std::ostream& os, const ScenarioResult& r) {
    write_provenance(os, r);
    os << "distance_km,loss_db,click_prob,qber,visibility,raw_rate_hz,secret_fraction,"
          "secret_rate_hz\n";
    for (const DistanceRow& row : r.rows) {
        os << fmt(row.distance_km) << ',' << fmt(row.loss_db) << ',' << fmt(row.click_prob) << ','
           << fmt(row.qber) << ',' << fmt(row.visibility) << ',' << fmt(row.raw_rate_hz) << ','
           << fmt(row.secret_fraction) << ',' << fmt(row.secret_rate_hz) << '\n';
    }
}

void write_mc_summary_csv(std::ostream& os, const ScenarioResult& r) {
    write_provenance(os, r);
    os << "source,num_symbols,click_prob,qber,visibility,raw_rate_hz,secret_fraction,"
          "secret_rate_hz\n";
    const DistanceRow& a = r.rows.front();
    os << "analytic,," << fmt(a.click_prob) << ',' << fmt(a.qber) << ',' << fmt(a.visibility)
       << ',' << fmt(a.raw_rate_hz) << ',' << fmt(a.secret_fraction) << ','
       << fmt(a.secret_rate_hz) << '\n';
    const McSummary& mc = *r.mc;
    const double vis = r.config.protocol.protocol == Protocol::Cow
                           ? mc.stats.visibility
                           : std::numeric_limits<double>::quiet_NaN();
    os << "monte_carlo," << mc.num_symbols << ',' << fmt(mc.stats.click_prob) << ','
       << fmt(mc.stats.qber) << ',' << fmt(vis) << ',' << fmt(mc.rates.raw_rate_hz) << ','
       << fmt(mc.rates.secret_fraction) << ',' << fmt(mc.rates.secret_rate_hz) << '\n';
}

// Minimal log-rate / linear-QBER plot over distance.
void write_svg(std::ostream& os, const ScenarioResult& r) {
    const int width = 720, height = 480;
    const int ml = 70, mr = 70, mt = 30, mb = 50;
    const double x0 = ml, x1 = width - mr;
    const double y0 = height - mb, y1 = mt;

    double dmin = r.rows.front().distance_km, dmax = r.rows.back().distance_km;
    if (dmax <= dmin) {
        dmax = dmin + 1.0;
    }
    double rate_max = 1.0, rate_min = 1e300, qber_max = 1e-3;
    for (const auto& row : r.rows) {
        rate_max = std::max(rate_max, row.raw_rate_hz);
        for (double v : {row.raw_rate_hz, row.secret_rate_hz}) {
            if (v > 0.0) {
                rate_min = std::min(rate_min, v);
            }
        }
        if (!std::isnan(row.qber)) {
            qber_max = std::max(qber_max, row.qber);
        }
    }
    if (rate_min >= rate_max) {
        rate_min = rate_max / 10.0;
    }
    const double lmin = std::floor(std::log10(rate_min));
    const double lmax = std::ceil(std::log10(rate_max));

    auto xpos = [&](double d) { return x0 + (d - dmin) / (dmax - dmin) * (x1 - x0); };
    auto ypos_rate = [&](double v) {
        const double l = std::log10(std::max(v, std::pow(10.0, lmin)));
        return y0 + (l - lmin) / (lmax - lmin) * (y1 - y0);
    };
    auto ypos_qber = [&](double q) { return y0 + q / (qber_max * 1.2) * (y1 - y0); };

    auto polyline = [&](const char* colour, auto getter, auto ypos, bool skip_zero) {
        std::ostringstream pts;
        for (const auto& row : r.rows) {
            const double v = getter(row);
            if (std::isnan(v) || (skip_zero && v <= 0.0)) {
                continue;
            }
            pts << fmt(xpos(row.distance_km)) << ',' << fmt(ypos(v)) << ' ';
        }
        const std::string s = pts.str();
        if (!s.empty()) {
            os << "  <polyline fill=\"none\" stroke=\"" << colour
               << "\" stroke-width=\"2\" points=\"" << s << "\"/>\n";
        }
    };

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    os << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
       << "\" stroke=\"black\"/>\n";
    os << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
       << "\" stroke=\"black\"/>\n";
    os << "  <line x1=\"" << x1 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1
       << "\" stroke=\"black\"/>\n";

    for (int l = static_cast<int>(lmin); l <= static_cast<int>(lmax); ++l) {
        const double y = ypos_rate(std::pow(10.0, l));
        os << "  <line x1=\"" << x0 - 4 << "\" y1=\"" << fmt(y) << "\" x2=\"" << x0 << "\" y2=\""
           << fmt(y) << "\" stroke=\"black\"/>\n";
        os << "  <text x=\"" << x0 - 8 << "\" y=\"" << fmt(y + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">1e" << l << "</text>\n";
    }
    const int xticks = 5;
    for (int i = 0; i <= xticks; ++i) {
        const double d = dmin + (dmax - dmin) * i / xticks;
        os << "  <line x1=\"" << fmt(xpos(d)) << "\" y1=\"" << y0 << "\" x2=\"" << fmt(xpos(d))
           << "\" y2=\"" << y0 + 4 << "\" stroke=\"black\"/>\n";
        os << "  <text x=\"" << fmt(xpos(d)) << "\" y=\"" << y0 + 18
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(d) << "</text>\n";
    }

    polyline("#1f6fb4", [](const DistanceRow& x) { return x.raw_rate_hz; }, ypos_rate, true);
    polyline("#c22e2e", [](const DistanceRow& x) { return x.secret_rate_hz; }, ypos_rate, true);
    polyline("#2e8b57", [](const DistanceRow& x) { return x.qber; }, ypos_qber, false);

    os << "  <text x=\"" << (x0 + x1) / 2 << "\" y=\"" << height - 14
       << "\" font-size=\"13\" text-anchor=\"middle\">distance (km)</text>\n";
    os << "  <text x=\"18\" y=\"" << (y0 + y1) / 2
       << "\" font-size=\"13\" transform=\"rotate(-90 18 " << (y0 + y1) / 2
       << ")\" text-anchor=\"middle\">rate (Hz)</text>\n";
    os << "  <text x=\"" << width - 14 << "\" y=\"" << (y0 + y1) / 2
       << "\" font-size=\"13\" transform=\"rotate(90 " << width - 14 << ' ' << (y0 + y1) / 2
       << ")\" text-anchor=\"middle\">QBER (right axis, 0 to " << fmt(qber_max * 1.2)
       << ")</text>\n";
    os << "  <text x=\"" << x0 + 10 << "\" y=\"" << y1 + 14
       << "\" font-size=\"12\" fill=\"#1f6fb4\">raw</text>\n";
    os << "  <text x=\"" << x0 + 50 << "\" y=\"" << y1 + 14
       << "\" font-size=\"12\" fill=\"#c22e2e\">secret</text>\n";
    os << "  <text x=\"" << x0 + 110 << "\" y=\"" << y1 + 14
       << "\" font-size=\"12\" fill=\"#2e8b57\">qber</text>\n";
    os << "</svg>\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace

std::vector<std::filesystem::path> emit_outputs(const ScenarioResult& result,
                                                const std::filesystem::path& dir,
                                                const std::set<std::string>& formats) {
    for (const auto& f : formats) {
        if (f != "csv" && f != "svg") {
            throw std::invalid_argument("emit_outputs: unknown format \"" + f + "\"");
        }
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                                 ec.message());
    }

    std::vector<std::filesystem::path> written;
    if (formats.count("csv")) {
        {
            std::ostringstream os;
            write_results_csv(os, result);
            written.push_back(dir / "results.csv");
            write_file(written.back(), os.str());
        }
        if (!result.events.empty()) {
            std::ostringstream os;
            write_events_csv(os, result.events);
            written.push_back(dir / "events.csv");
            write_file(written.back(), os.str());
        }
        if (result.mc) {
            std::ostringstream os;
            write_mc_summary_csv(os, result);
            written.push_back(dir / "mc_summary.csv");
            write_file(written.back(), os.str());
        }
    }
    if (formats.count("svg")) {
        std::ostringstream os;
        write_svg(os, result);
        written.push_back(dir / "plot.svg");
        write_file(written.back(), os.str());
    }
    return written;
}

}  // namespace qksim
