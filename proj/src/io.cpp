#include "loopgrade/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace loopgrade {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc()) {
        // from_chars does not accept "inf"/"nan"; fall back to strtod for those.
        char* end = nullptr;
        v = std::strtod(text.c_str(), &end);
        if (end == text.c_str()) throw std::runtime_error("parse_double: bad number '" + text + "'");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::uint64_t fnv1a_bytes(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) { return fnv1a_bytes(read_file(path)); }

void write_series_csv(const std::filesystem::path& path, const TimeSeries& series,
                      const std::string& value_name) {
    if (series.t.size() != series.v.size())
        throw std::invalid_argument("write_series_csv: column length mismatch");
    std::string out = "t," + value_name + "\n";
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        out += format_double(series.t[i]);
        out += ',';
        out += format_double(series.v[i]);
        out += '\n';
    }
    write_file(path, out);
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    TimeSeries series;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) { // first line is the column header
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_series_csv: malformed line '" + line + "'");
        series.t.push_back(parse_double(line.substr(0, comma)));
        series.v.push_back(parse_double(line.substr(comma + 1)));
    }
    return series;
}

void write_response_csv(const std::filesystem::path& path, const RejectionResponse& response) {
    TimeSeries series;
    series.t.reserve(response.r.size());
    series.v = response.r;
    for (std::size_t i = 0; i < response.r.size(); ++i) series.t.push_back(response.time_at(i));
    write_series_csv(path, series, "r");
}

} // namespace loopgrade
