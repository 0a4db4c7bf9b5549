// svg.hpp — dependency-free vector line charts for the figure recipes

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lab::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y{false};  // base-10 log axis; non-positive samples are dropped
    int width{720};
    int height{480};
};

void write_line_chart(const std::filesystem::path& file, const std::vector<Series>& series,
                      const ChartOptions& options);

}  // namespace lab::svg
