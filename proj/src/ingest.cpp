#include "sybilnet/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "sybilnet/error.hpp"
#include "sybilnet/text.hpp"

namespace sybilnet {

namespace {

using nlohmann::json;

constexpr const char* kVoteColumns[] = {"voter", "proposal", "space", "choice", "voting_power", "timestamp"};
constexpr const char* kProposalColumns[] = {"proposal", "space", "start", "end"};

struct RawVote {
  std::optional<std::string> voter, proposal, space, choice, power, timestamp;
};

// Validates and normalizes one vote; returns an error message on failure.
std::optional<std::string> finish_vote(const RawVote& raw, VoteRecord& out) {
  if (!raw.voter || trim(*raw.voter).empty()) return "missing voter";
  if (!raw.proposal || trim(*raw.proposal).empty()) return "missing proposal";
  if (!raw.space || trim(*raw.space).empty()) return "missing space";
  if (!raw.power) return "missing voting_power";
  if (!raw.timestamp) return "missing timestamp";
  if (!raw.choice) return "missing choice";

  auto power = parse_double(*raw.power);
  if (!power || !std::isfinite(*power) || *power < 0.0) return "invalid voting_power '" + *raw.power + "'";
  auto ts = parse_int<EpochSeconds>(*raw.timestamp);
  if (!ts || *ts <= 0) return "invalid timestamp '" + *raw.timestamp + "'";
  auto choice = parse_int<int>(*raw.choice);
  if (!choice) return "invalid choice '" + *raw.choice + "'";

  out.voter_address = to_lower(trim(*raw.voter));
  out.proposal_id = std::string(trim(*raw.proposal));
  out.space_id = std::string(trim(*raw.space));
  out.voting_power = *power;
  out.timestamp = *ts;
  out.choice = *choice;
  return std::nullopt;
}

std::optional<std::string> json_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number()) return format_double(it->get<double>());
  return std::nullopt;
}

void check_malformed_ratio(std::size_t rows, std::size_t malformed, const char* what) {
  if (rows > 0 && malformed * 2 > rows) {
    throw Error(ErrorKind::Format, std::to_string(malformed) + " of " + std::to_string(rows) + " " + what +
                                       " rows are malformed; check the declared input format");
  }
}

class CsvHeader {
 public:
  template <std::size_t N>
  CsvHeader(const std::vector<std::string>& names, const char* const (&required)[N]) {
    for (std::size_t i = 0; i < names.size(); ++i) index_[std::string(trim(names[i]))] = i;
    for (const char* col : required) {
      if (!index_.count(col)) throw Error(ErrorKind::Format, std::string("CSV header lacks column '") + col + "'");
    }
  }

  std::optional<std::string> get(const std::vector<std::string>& row, const char* col) const {
    const std::size_t i = index_.at(col);
    if (i >= row.size()) return std::nullopt;
    return row[i];
  }

 private:
  std::map<std::string, std::size_t> index_;
};

void check_stream(std::istream& input) {
  if (input.bad()) throw Error(ErrorKind::Io, "input stream is unreadable");
}

}  // namespace

ParseResult<VoteRecord> parse_votes(std::istream& input, RecordFormat format) {
  check_stream(input);
  ParseResult<VoteRecord> result;
  std::size_t rows = 0;
  std::optional<CsvHeader> header;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    RawVote raw;
    if (format == RecordFormat::Csv) {
      auto fields = split_csv_line(line);
      if (!header) {
        header.emplace(fields, kVoteColumns);
        continue;
      }
      raw.voter = header->get(fields, "voter");
      raw.proposal = header->get(fields, "proposal");
      raw.space = header->get(fields, "space");
      raw.choice = header->get(fields, "choice");
      raw.power = header->get(fields, "voting_power");
      raw.timestamp = header->get(fields, "timestamp");
    } else {
      json obj = json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        ++rows;
        result.diagnostics.push_back({line_no, "not a JSON object"});
        continue;
      }
      raw.voter = json_field(obj, "voter");
      raw.proposal = json_field(obj, "proposal");
      raw.space = json_field(obj, "space");
      raw.choice = json_field(obj, "choice");
      raw.power = json_field(obj, "voting_power");
      raw.timestamp = json_field(obj, "timestamp");
    }
    ++rows;
    VoteRecord vote;
    if (auto err = finish_vote(raw, vote)) {
      result.diagnostics.push_back({line_no, *err});
    } else {
      result.records.push_back(std::move(vote));
    }
  }
  check_stream(input);
  check_malformed_ratio(rows, result.diagnostics.size(), "vote");
  return result;
}

ParseResult<VoteRecord> parse_votes_file(const std::string& path, RecordFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open votes file '" + path + "'");
  return parse_votes(in, format);
}

ParseResult<ProposalRecord> parse_proposals(std::istream& input) {
  check_stream(input);
  ParseResult<ProposalRecord> result;
  std::optional<CsvHeader> header;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!header) {
      header.emplace(fields, kProposalColumns);
      continue;
    }
    ++rows;
    auto id = header->get(fields, "proposal");
    auto space = header->get(fields, "space");
    auto start = header->get(fields, "start");
    auto end = header->get(fields, "end");
    std::optional<EpochSeconds> s = start ? parse_int<EpochSeconds>(*start) : std::nullopt;
    std::optional<EpochSeconds> e = end ? parse_int<EpochSeconds>(*end) : std::nullopt;
    if (!id || trim(*id).empty()) {
      result.diagnostics.push_back({line_no, "missing proposal"});
    } else if (!space) {
      result.diagnostics.push_back({line_no, "missing space"});
    } else if (!s || !e) {
      result.diagnostics.push_back({line_no, "invalid start/end"});
    } else if (*e < *s) {
      result.diagnostics.push_back({line_no, "end precedes start"});
    } else {
      result.records.push_back({std::string(trim(*id)), std::string(trim(*space)), *s, *e});
    }
  }
  check_stream(input);
  check_malformed_ratio(rows, result.diagnostics.size(), "proposal");
  return result;
}

ParseResult<ProposalRecord> parse_proposals_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open proposals file '" + path + "'");
  return parse_proposals(in);
}

void write_votes(std::ostream& out, const std::vector<VoteRecord>& votes, RecordFormat format) {
  if (format == RecordFormat::Csv) {
    out << "voter,proposal,space,choice,voting_power,timestamp\n";
    for (const auto& v : votes) {
      out << csv_field(v.voter_address) << ',' << csv_field(v.proposal_id) << ',' << csv_field(v.space_id) << ','
          << v.choice << ','
          << format_double(v.voting_power) << ',' << v.timestamp << '\n';
    }
    return;
  }
  for (const auto& v : votes) {
    json obj = {{"voter", v.voter_address}, {"proposal", v.proposal_id}, {"space", v.space_id},
                {"choice", v.choice},       {"voting_power", v.voting_power}, {"timestamp", v.timestamp}};
    out << obj.dump() << '\n';
  }
}

void write_proposals(std::ostream& out, const std::vector<ProposalRecord>& proposals) {
  out << "proposal,space,start,end\n";
  for (const auto& p : proposals) {
    out << csv_field(p.proposal_id) << ',' << csv_field(p.space_id) << ',' << p.start << ',' << p.end << '\n';
  }
}

RecordFormat format_from_path(const std::string& path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".jsonl") || ends_with(".ndjson") || ends_with(".json")) return RecordFormat::JsonLines;
  return RecordFormat::Csv;
}

ProposalFilterResult filter_proposals(const std::vector<ProposalRecord>& proposals, EpochSeconds min_duration,
                                      EpochSeconds max_duration) {
  if (min_duration > max_duration) {
    throw Error(ErrorKind::Parameter, "filter_proposals: min_duration exceeds max_duration");
  }
  ProposalFilterResult result;
  for (const auto& p : proposals) {
    const EpochSeconds d = p.duration();
    if (d >= min_duration && d <= max_duration) {
      result.kept.push_back(p);
    } else {
      ++result.rejected;
    }
  }
  return result;
}

std::vector<VoteRecord> restrict_to_proposals(const std::vector<VoteRecord>& votes,
                                              const std::vector<ProposalRecord>& proposals) {
  std::unordered_set<std::string> keep;
  for (const auto& p : proposals) keep.insert(p.proposal_id);
  std::vector<VoteRecord> out;
  std::copy_if(votes.begin(), votes.end(), std::back_inserter(out),
               [&](const VoteRecord& v) { return keep.count(v.proposal_id) != 0; });
  return out;
}

bool vote_order_less(const VoteRecord& a, const VoteRecord& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.voter_address != b.voter_address) return a.voter_address < b.voter_address;
  return a.proposal_id < b.proposal_id;
}

WindowResult window_and_sort(const std::vector<VoteRecord>& votes, EpochSeconds start, EpochSeconds end) {
  if (start > end) throw Error(ErrorKind::Parameter, "window_and_sort: start is after end");
  WindowResult result;
  for (const auto& v : votes) {
    if (v.timestamp >= start && v.timestamp <= end) result.votes.push_back(v);
  }
  std::stable_sort(result.votes.begin(), result.votes.end(), vote_order_less);

  std::set<std::string> voters;
  std::set<std::string> proposals;
  for (const auto& v : result.votes) {
    voters.insert(v.voter_address);
    proposals.insert(v.proposal_id);
  }
  result.window.start_date = start;
  result.window.end_date = end;
  result.window.vote_count = result.votes.size();
  result.window.proposal_count = proposals.size();
  result.window.voter_count = voters.size();
  return result;
}

}  // namespace sybilnet
