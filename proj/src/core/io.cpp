#include "core/io.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

namespace shmcpd {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void parse_error(const std::string &source, std::size_t line, const std::string &what) {
    fail(ErrorCode::ParseError, source + ": line " + std::to_string(line) + ": " + what);
}

} // namespace

const std::vector<double> &SignalTable::column(int sensor_id) const {
    const auto it = std::find(sensor_ids.begin(), sensor_ids.end(), sensor_id);
    if (it == sensor_ids.end())
        fail(ErrorCode::InvalidArgument, "no column for sensor " + std::to_string(sensor_id));
    return columns[static_cast<std::size_t>(it - sensor_ids.begin())];
}

SignalTable read_signal_csv(std::istream &in, const std::string &source) {
    SignalTable table;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        parse_error(source, 1, "missing header");
    ++line_no;
    const auto header = split_fields(line);
    if (header.empty() || trim(header[0]) != "time")
        parse_error(source, line_no, "first column must be 'time'");
    if (header.size() < 2)
        parse_error(source, line_no, "no sensor columns");
    for (std::size_t i = 1; i < header.size(); ++i) {
        const auto name = trim(header[i]);
        constexpr std::string_view prefix = "sensor_";
        int id = 0;
        if (!name.starts_with(prefix))
            parse_error(source, line_no, "column '" + std::string(name) + "' is not sensor_<id>");
        const auto digits = name.substr(prefix.size());
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
            parse_error(source, line_no, "column '" + std::string(name) + "' has no integer sensor id");
        if (std::find(table.sensor_ids.begin(), table.sensor_ids.end(), id) != table.sensor_ids.end())
            parse_error(source, line_no, "duplicate column for sensor " + std::to_string(id));
        table.sensor_ids.push_back(id);
    }
    table.columns.resize(table.sensor_ids.size());

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            parse_error(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto text = trim(fields[i]);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
                parse_error(source, line_no, "field " + std::to_string(i + 1) + " ('" + std::string(text) +
                                                 "') is not a finite number");
            if (i == 0)
                table.time.push_back(v);
            else
                table.columns[i - 1].push_back(v);
        }
    }
    if (table.time.empty())
        parse_error(source, line_no, "no data rows");
    return table;
}

SignalTable read_signal_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::IoError, "cannot open " + path.string());
    return read_signal_csv(in, path.string());
}

void write_signal_csv(std::ostream &out, const SignalTable &table) {
    out << "time";
    for (int id : table.sensor_ids)
        out << ",sensor_" << id;
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out << format_double(table.time[r]);
        for (const auto &col : table.columns)
            out << ',' << format_double(col[r]);
        out << '\n';
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        fail(ErrorCode::InvalidArgument, "cannot format number");
    return std::string(buf, ptr);
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path &path, const std::string &contents) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorCode::IoError, "cannot write " + tmp.string());
        out << contents;
        if (!out)
            fail(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        fail(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

} // namespace shmcpd
