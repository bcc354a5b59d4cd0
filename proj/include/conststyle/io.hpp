#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "conststyle/datagen.hpp"
#include "conststyle/desknet.hpp"
#include "conststyle/pipeline.hpp"
#include "conststyle/unified_domain.hpp"

namespace conststyle::io {

inline constexpr char kLibraryVersion[] = "0.1.0";

// ---------------------------------------------------------------------------
// Tensor dump format ("CSTN"): magic bytes "CSTN", version byte 0x01,
// little-endian u32 rank, u32 dims[rank], IEEE-754 float32 payload in
// row-major order. One tensor per file.
// ---------------------------------------------------------------------------

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
};

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

Tensor tensor_from(std::span<const std::uint32_t> dims, std::span<const double> values);
// Byte offset of element `index` in a CSTN file with the given rank.
std::size_t tensor_payload_offset(std::size_t rank, std::size_t index);

// ---------------------------------------------------------------------------
// Flat INI config: `key = value` lines, '#' comments, UTF-8.
// ---------------------------------------------------------------------------

using IniMap = std::map<std::string, std::string>;

IniMap read_ini(const std::filesystem::path& path);
void write_ini(const std::filesystem::path& path,
               const std::vector<std::pair<std::string, std::string>>& entries);

// ---------------------------------------------------------------------------
// CSV reports: mandatory header, '.' decimal separator, '\n' line endings.
// Doubles are formatted with %.10g so identical runs produce identical bytes.
// ---------------------------------------------------------------------------

std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::span<const std::string> header);
  void row(std::span<const std::string> cells);
  ~CsvWriter();

 private:
  std::string buffer_;
  std::filesystem::path path_;
  std::size_t columns_;
};

// ---------------------------------------------------------------------------
// Run-directory artifacts.
// ---------------------------------------------------------------------------

// Exclusive lock on a run directory; throws StateError if already held.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path lock_path_;
};

void save_dataset(const std::filesystem::path& dir, const SyntheticDataset& dataset);
SyntheticDataset load_dataset(const std::filesystem::path& dir);

void save_model(const std::filesystem::path& dir, const DeskNet& net,
                const Vec* initial_style_params = nullptr);
DeskNet load_model(const std::filesystem::path& dir);
// Loads the frozen initial-phase style block, when the dump carries one.
bool load_initial_style_params(const std::filesystem::path& dir, Vec& out);

void save_unified(const std::filesystem::path& dir, const UnifiedDomain& unified);
UnifiedDomain load_unified(const std::filesystem::path& dir);
bool unified_exists(const std::filesystem::path& dir);

}  // namespace conststyle::io
