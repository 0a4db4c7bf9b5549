// csv.hpp — deterministic CSV emission (comma separated, '.' decimal,
// header row, LF endings, %.17g values)

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace lab::csv {

class Writer {
public:
    // `metadata` lines are emitted first as "# key=value" comments.
    Writer(const std::filesystem::path& file, const std::vector<std::string>& columns,
           const std::vector<std::string>& metadata = {});

    void row(const std::vector<double>& values);
    void close();

private:
    std::ofstream out_;
    std::size_t columns_{0};
    std::string path_;
};

std::string format_double(double v);  // %.17g, round-trip exact (data cells)
std::string format_label(double v);   // %g, short form for file names and labels

}  // namespace lab::csv
