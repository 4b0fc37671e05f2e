#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace semiwave {

using json = nlohmann::ordered_json;

/// Append-only JSON-lines file; one record per line, writes serialized by a mutex.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void append(const json& record);
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

/// Reads every record of a JSON-lines file (missing file: empty).
std::vector<json> read_jsonl(const std::filesystem::path& path);

/// Plain CSV table with a header row; numbers written with round-trip precision.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::string format_number(double v);

}  // namespace semiwave
