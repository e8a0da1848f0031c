#pragma once

#include "qfactory/qfactory8.hpp"
#include "qfactory/selftest.hpp"
#include "qfactory/serialize.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qf {

// One JSON object per line. Each line carries "prev" (hash of the previous line, zeros for the
// first) and "hash" = SHA-256(prev || compact JSON of the record without prev/hash). The file
// ends with {"kind": "end", "count": n}.
inline constexpr const char* kGenesisHash = "0000000000000000000000000000000000000000000000000000000000000000";

json record_p4(const std::string& run_id, const Result4& r);
json record_p8(const std::string& run_id, const Result8& r, u64 client_seed);
json record_verifiable(const std::string& run_id, const TestPlan& plan, double eps2, i64 min_count,
                       const std::vector<int>& outcomes, bool accepted, u64 client_seed);

std::string chain_hash(const std::string& prev, const json& record);

class TranscriptWriter {
 public:
  explicit TranscriptWriter(std::ostream& out) : out_(out) {}
  void append(json record);
  void finish();
  const std::string& head() const { return prev_; }
  i64 count() const { return count_; }

 private:
  std::ostream& out_;
  std::string prev_ = kGenesisHash;
  i64 count_ = 0;
  bool finished_ = false;
};

struct ReplayIssue {
  i64 line = 0;
  std::string kind;  // parse, chain, truncated, key_mismatch, index_mismatch, schema
  std::string message;
};

struct ReplayReport {
  bool ok = true;
  i64 records = 0;
  std::vector<ReplayIssue> issues;
  json to_json() const;
};

// Verifies the hash chain and re-derives every client-side index from the recorded seeds and messages.
ReplayReport replay(std::istream& in);

}  // namespace qf
