#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include "handco/tpe.h"

namespace handco {

/// One JSON object per line:
///   {"trial", "batch", "point", "score", "seed", "status", "timestamp", "info"}
/// "timestamp" is the logical append sequence number so that journals are
/// byte-reproducible.
nlohmann::json to_json(const TrialRecord& r);
TrialRecord trial_from_json(const nlohmann::json& j);
std::string journal_line(const TrialRecord& r);

/// Reads every complete line. A trailing line without a newline (an append
/// cut short) is dropped. Throws ConfigError on malformed content.
std::vector<TrialRecord> read_journal(const std::filesystem::path& path);

/// Rewrites the journal with exactly `records` (used to drop a torn tail
/// before resuming).
void write_journal(const std::filesystem::path& path, const std::vector<TrialRecord>& records);

class JournalWriter {
 public:
  explicit JournalWriter(const std::filesystem::path& path);
  void append(const TrialRecord& r);

 private:
  std::ofstream out_;
};

}  // namespace handco
