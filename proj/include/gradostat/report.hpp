#pragma once

#include <string>
#include <vector>

namespace gradostat {

// RFC 4180: CRLF records, fields quoted when they hold a comma, quote or line break.
std::string csv_field(const std::string& s);
std::string csv_number(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row);
    std::string str() const;
    void write(const std::string& path) const;
    size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Splits one CSV document into records (used by tests and batch summaries).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

struct Series {
    std::string label;
    std::vector<double> x, y;
};

struct Panel {
    std::string title;
    std::string ylabel;
    std::vector<Series> series;
};

// Static line charts stacked vertically, sharing the x label.
std::string svg_panels(const std::vector<Panel>& panels, const std::string& xlabel,
                       int width = 900, int panel_height = 260);

void write_text(const std::string& path, const std::string& text);

} // namespace gradostat
