#include "lab/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace lab::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

Writer::Writer(const std::filesystem::path& file, const std::vector<std::string>& columns,
               const std::vector<std::string>& metadata)
    : columns_(columns.size()), path_(file.string()) {
    if (columns.empty()) throw std::invalid_argument("csv::Writer: no columns");
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    out_.open(file, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("csv::Writer: cannot open " + path_);
    for (const auto& line : metadata) out_ << "# " << line << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    }
    out_ << "\n";
}

void Writer::row(const std::vector<double>& values) {
    if (values.size() != columns_) {
        throw std::invalid_argument("csv::Writer: row width does not match header");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "");
    }
    out_ << "\n";
}

void Writer::close() {
    out_.flush();
    if (!out_) throw std::runtime_error("csv::Writer: write failed for " + path_);
    out_.close();
}

}  // namespace lab::csv
