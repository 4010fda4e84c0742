#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace popdyn::csv {

/// Shortest-form general notation with `digits` significant digits,
/// independent of the global locale.
std::string format(double v, int digits);

inline constexpr int kFullPrecision = 17;
inline constexpr int kTablePrecision = 5;

/// Minimal comma-separated writer. Fields are written verbatim; callers only
/// emit numbers and fixed identifiers, none of which need quoting.
class Writer {
public:
    explicit Writer(const std::filesystem::path& path);

    void row(const std::vector<std::string>& fields);
    void row(std::initializer_list<std::string> fields) { row(std::vector<std::string>(fields)); }

private:
    std::ofstream out_;
};

}  // namespace popdyn::csv
