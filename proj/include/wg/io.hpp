#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace wg {

// Writes text to path, creating parent directories; Error on failure.
void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& j);

// Minimal CSV builder; numbers printed with 17 significant digits.
class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    Csv& row(const std::vector<nlohmann::json>& cells);
    std::string str() const;
    std::size_t rows() const { return rows_; }

private:
    std::size_t cols_;
    std::size_t rows_ = 0;
    std::string text_;
};

std::string format_number(double x);

}  // namespace wg
