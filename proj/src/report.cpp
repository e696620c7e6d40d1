#include "gradostat/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gradostat/error.hpp"

namespace gradostat {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0"; // no negative zero
    return fmt::format("{:.10g}", v);
}

void CsvTable::add(std::vector<std::string> row)
{
    if (row.size() != header_.size())
        throw Error(ErrorCode::DimensionMismatch, "csv row width differs from the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
        for (size_t k = 0; k < r.size(); ++k) {
            if (k)
                out += ',';
            out += csv_field(r[k]);
        }
        out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return out;
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(field);
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            rec.push_back(field);
            out.push_back(rec);
            rec.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (any || !field.empty()) {
        rec.push_back(field);
        out.push_back(rec);
    }
    return out;
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                         "#e377c2", "#7f7f7f"};

std::string esc(const std::string& s)
{
    std::string o;
    for (char c : s) {
        switch (c) {
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '&': o += "&amp;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
        }
    }
    return o;
}

// round tick spacing near range / 5
double tick_step(double range)
{
    if (!(range > 0.0))
        return 1.0;
    double raw = range / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw)
            return m * mag;
    return 10.0 * mag;
}

} // namespace

std::string svg_panels(const std::vector<Panel>& panels, const std::string& xlabel, int width,
                       int panel_height)
{
    const int left = 70, right = 150, top = 30, bottom = 40;
    const int height = static_cast<int>(panels.size()) * panel_height + 20;
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        width, height, width, height);
    s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
    for (size_t k = 0; k < panels.size(); ++k) {
        const Panel& p = panels[k];
        const double y0 = static_cast<double>(k) * panel_height;
        const double pw = width - left - right, ph = panel_height - top - bottom;
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const auto& se : p.series)
            for (size_t i = 0; i < se.x.size() && i < se.y.size(); ++i) {
                if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i]))
                    continue;
                xmin = std::min(xmin, se.x[i]);
                xmax = std::max(xmax, se.x[i]);
                ymin = std::min(ymin, se.y[i]);
                ymax = std::max(ymax, se.y[i]);
            }
        if (!std::isfinite(xmin)) {
            xmin = 0;
            xmax = 1;
            ymin = 0;
            ymax = 1;
        }
        if (xmax == xmin)
            xmax = xmin + 1;
        double pad = 0.05 * (ymax - ymin);
        if (pad == 0.0)
            pad = std::max(0.5, 0.05 * std::abs(ymax));
        ymin -= pad;
        ymax += pad;
        auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
        auto Y = [&](double y) { return y0 + top + (ymax - y) / (ymax - ymin) * ph; };

        s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" font-weight=\"bold\">{}</text>\n", left,
                         y0 + top - 10, esc(p.title));
        s += fmt::format("<rect x=\"{}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                         "fill=\"none\" stroke=\"#333\"/>\n",
                         left, y0 + top, pw, ph);
        double ys = tick_step(ymax - ymin);
        for (double v = std::ceil(ymin / ys) * ys; v <= ymax + 1e-12; v += ys) {
            double yy = Y(v);
            s += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" "
                             "stroke=\"#ddd\"/>\n",
                             left, yy, left + pw, yy);
            s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:g}</text>\n",
                             left - 5, yy + 4, std::abs(v) < 1e-12 * ys ? 0.0 : v);
        }
        double xs = tick_step(xmax - xmin);
        for (double v = std::ceil(xmin / xs) * xs; v <= xmax + 1e-12; v += xs)
            s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:g}</text>\n",
                             X(v), y0 + top + ph + 15, v);
        s += fmt::format("<text x=\"15\" y=\"{:.1f}\" transform=\"rotate(-90 15 {:.1f})\" "
                         "text-anchor=\"middle\">{}</text>\n",
                         y0 + top + ph / 2, y0 + top + ph / 2, esc(p.ylabel));
        for (size_t j = 0; j < p.series.size(); ++j) {
            const auto& se = p.series[j];
            const char* col = kColors[j % (sizeof(kColors) / sizeof(kColors[0]))];
            std::string pts;
            for (size_t i = 0; i < se.x.size() && i < se.y.size(); ++i)
                if (std::isfinite(se.y[i]))
                    pts += fmt::format("{:.2f},{:.2f} ", X(se.x[i]), Y(se.y[i]));
            s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" "
                             "points=\"{}\"/>\n",
                             col, pts);
            double ly = y0 + top + 15 + 18.0 * j;
            s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" "
                             "stroke=\"{}\" stroke-width=\"2\"/>\n",
                             left + pw + 10, ly, left + pw + 30, ly, col);
            s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + pw + 35, ly + 4,
                             esc(se.label));
        }
    }
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     left + (width - left - right) / 2.0, height - 5, esc(xlabel));
    s += "</svg>\n";
    return s;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::BadInput, "cannot write " + path);
    out << text;
}

} // namespace gradostat
