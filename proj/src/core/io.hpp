#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace shmcpd {

// Raw acceleration table: header `time,sensor_<id>,...`, one row per sample.
struct SignalTable {
    std::vector<double> time;
    std::vector<int> sensor_ids;
    std::vector<std::vector<double>> columns; // parallel to sensor_ids

    std::size_t rows() const noexcept { return time.size(); }
    const std::vector<double> &column(int sensor_id) const;
};

// Parse errors carry the 1-based line number.
SignalTable read_signal_csv(std::istream &in, const std::string &source = "<stream>");
SignalTable read_signal_csv(const std::filesystem::path &path);
void write_signal_csv(std::ostream &out, const SignalTable &table);

// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path &path);
// Writes through a temporary file in the same directory, then renames.
void write_text_file(const std::filesystem::path &path, const std::string &contents);

} // namespace shmcpd
