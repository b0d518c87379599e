#include "handco/journal.h"

#include <sstream>

#include "handco/errors.h"

namespace handco {

nlohmann::json to_json(const TrialRecord& r) {
  nlohmann::json j;
  j["trial"] = r.index;
  j["batch"] = r.batch;
  j["point"] = to_json(r.point);
  j["score"] = r.score;
  j["seed"] = r.seed;
  j["status"] = r.status;
  j["timestamp"] = r.index;
  j["info"] = r.info;
  return j;
}

TrialRecord trial_from_json(const nlohmann::json& j) {
  TrialRecord r;
  r.index = j.at("trial").get<int>();
  r.batch = j.at("batch").get<int>();
  r.point = point_from_json(j.at("point"));
  r.score = j.at("score").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.status = j.at("status").get<std::string>();
  if (j.contains("info")) r.info = j.at("info");
  return r;
}

std::string journal_line(const TrialRecord& r) { return to_json(r).dump() + "\n"; }

std::vector<TrialRecord> read_journal(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open journal " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<TrialRecord> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    ++line_no;
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      out.push_back(trial_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_journal(const std::filesystem::path& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& r : records) out << journal_line(r);
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

JournalWriter::JournalWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open journal " + path.string() + " for append");
}

void JournalWriter::append(const TrialRecord& r) {
  out_ << journal_line(r);
  out_.flush();
}

}  // namespace handco
