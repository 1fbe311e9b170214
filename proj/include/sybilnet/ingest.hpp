#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace sybilnet {

using EpochSeconds = std::int64_t;

struct VoteRecord {
  std::string voter_address;  // lower-cased
  std::string proposal_id;
  std::string space_id;
  double voting_power = 0.0;
  EpochSeconds timestamp = 0;
  int choice = 0;

  friend bool operator==(const VoteRecord&, const VoteRecord&) = default;
};

struct ProposalRecord {
  std::string proposal_id;
  std::string space_id;
  EpochSeconds start = 0;
  EpochSeconds end = 0;

  EpochSeconds duration() const noexcept { return end - start; }

  friend bool operator==(const ProposalRecord&, const ProposalRecord&) = default;
};

struct DatasetWindow {
  EpochSeconds start_date = 0;
  EpochSeconds end_date = 0;
  std::size_t vote_count = 0;
  std::size_t proposal_count = 0;
  std::size_t voter_count = 0;
};

enum class RecordFormat { Csv, JsonLines };

struct Diagnostic {
  std::size_t line = 0;  // 1-based line in the input
  std::string message;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<Diagnostic> diagnostics;
};

// Parses line-delimited vote records in input order. Malformed rows are
// skipped with a diagnostic each; more than half malformed is a format error.
ParseResult<VoteRecord> parse_votes(std::istream& input, RecordFormat format);
ParseResult<VoteRecord> parse_votes_file(const std::string& path, RecordFormat format);

// CSV `proposal,space,start,end`.
ParseResult<ProposalRecord> parse_proposals(std::istream& input);
ParseResult<ProposalRecord> parse_proposals_file(const std::string& path);

void write_votes(std::ostream& out, const std::vector<VoteRecord>& votes, RecordFormat format);
void write_proposals(std::ostream& out, const std::vector<ProposalRecord>& proposals);

RecordFormat format_from_path(const std::string& path);

inline constexpr EpochSeconds kDefaultMinDuration = 3600;
inline constexpr EpochSeconds kDefaultMaxDuration = 90LL * 24 * 3600;
inline constexpr EpochSeconds kUnboundedDuration = std::numeric_limits<EpochSeconds>::max();

struct ProposalFilterResult {
  std::vector<ProposalRecord> kept;
  std::size_t rejected = 0;
};

ProposalFilterResult filter_proposals(const std::vector<ProposalRecord>& proposals, EpochSeconds min_duration,
                                      EpochSeconds max_duration);

// Votes whose proposal is not in `proposals` are dropped.
std::vector<VoteRecord> restrict_to_proposals(const std::vector<VoteRecord>& votes,
                                              const std::vector<ProposalRecord>& proposals);

struct WindowResult {
  std::vector<VoteRecord> votes;
  DatasetWindow window;
};

// Keeps votes with start <= timestamp <= end, ordered by
// (timestamp, voter_address, proposal_id).
WindowResult window_and_sort(const std::vector<VoteRecord>& votes, EpochSeconds start, EpochSeconds end);

bool vote_order_less(const VoteRecord& a, const VoteRecord& b);

}  // namespace sybilnet
