#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace nextcall {

/// Splits one CSV line on commas.  Fields in call logs are opaque tokens
/// without embedded commas or quotes, so no quoting dialect is needed.
std::vector<std::string> split_csv_line(const std::string& line);

std::string_view trim(std::string_view s);

/// Shortest round-trippable decimal text for v ("%.17g" would be noisy,
/// "%.10g" is stable across runs and platforms for reporting purposes).
std::string format_double(double v);

/// File sink that writes to `<path>.tmp` and renames into place on commit,
/// so readers never observe a partially written file.  A destructor without
/// commit() removes the temporary.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  bool committed_ = false;
};

/// FNV-1a 64-bit digest of a file's bytes; used to fingerprint inputs in run
/// manifests.
std::uint64_t fnv1a64_file(const std::string& path);

std::string to_hex(std::uint64_t v);

}  // namespace nextcall
