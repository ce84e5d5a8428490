#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prmix/pr.hpp"

namespace prmix::io {

enum class DataFormat { Values, Frequency };

/// "csv-values" / "values" or "csv-frequency" / "frequency". Throws ConfigError.
DataFormat parse_data_format(std::string_view text);
std::string to_string(DataFormat format);

struct Dataset {
  std::vector<double> observations;
  std::string label;

  std::size_t size() const noexcept { return observations.size(); }
};

/// One record per line, '#' lines and blank lines skipped. Values: one number
/// per line. Frequency: "value,count" with count >= 1, expanded in increasing
/// value order. Throws DataError naming the line on malformed input, and on
/// files without records.
Dataset ingest(const std::filesystem::path& path, DataFormat format);
Dataset ingest_text(std::string_view text, DataFormat format, std::string label);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
/// Whole-string parse, no locale. Returns false on trailing junk or overflow.
bool parse_double(std::string_view text, double& out);

struct Estimate {
  SupportSet support;
  MixingVector weights;
};

/// CSV "support,weight", one row per point.
void write_estimate(std::ostream& out, const SupportSet& support, const MixingVector& weights);
Estimate read_estimate(std::istream& in);
Estimate read_estimate(const std::filesystem::path& path);

/// The data in a seeded pseudo-random order (mt19937_64 + std::shuffle).
std::vector<double> seeded_order(std::span<const double> data, std::uint64_t seed);

/// Creates the directory if needed and holds an exclusive lockfile in it for
/// the lifetime of the object. Throws ConfigError when another process holds it.
class OutputDirectory {
 public:
  explicit OutputDirectory(std::filesystem::path dir);
  ~OutputDirectory();
  OutputDirectory(const OutputDirectory&) = delete;
  OutputDirectory& operator=(const OutputDirectory&) = delete;

  const std::filesystem::path& path() const noexcept { return dir_; }
  std::filesystem::path file(std::string_view name) const { return dir_ / name; }

  static constexpr const char* kLockName = ".prmix.lock";

 private:
  std::filesystem::path dir_;
  std::filesystem::path lock_;
};

/// Writes `text` to `path`, replacing it; throws DataError on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

const char* version() noexcept;

}  // namespace prmix::io
