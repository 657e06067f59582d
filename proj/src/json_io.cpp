#include "wg/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wg/error.hpp"

namespace wg {

void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Csv::Csv(std::vector<std::string> header) : cols_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += "\n";
}

Csv& Csv::row(const std::vector<nlohmann::json>& cells) {
    if (cells.size() != cols_) throw DomainError("csv row has wrong width");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ",";
        const auto& c = cells[i];
        if (c.is_number_float()) text_ += format_number(c.get<double>());
        else if (c.is_string()) text_ += c.get<std::string>();
        else text_ += c.dump();
    }
    text_ += "\n";
    ++rows_;
    return *this;
}

std::string Csv::str() const { return text_; }

}  // namespace wg
