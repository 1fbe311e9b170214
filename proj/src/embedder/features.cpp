#include "sybilnet/embedder/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sybilnet/error.hpp"
#include "sybilnet/random.hpp"

namespace sybilnet::embed {

namespace {

constexpr double kSecondsPerDay = 86400.0;

// In-place column standardization; constant columns become zero.
void standardize_columns(num::Tensor& t) {
  const std::size_t n = t.rows();
  const std::size_t m = t.cols();
  if (n == 0) return;
  for (std::size_t c = 0; c < m; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += t.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (t.at(r, c) - mean) * (t.at(r, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t r = 0; r < n; ++r) t.at(r, c) = sd > 1e-12 ? (t.at(r, c) - mean) / sd : 0.0;
  }
}

}  // namespace

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Usage, "train config: " + msg); };
  if (c.embedding_dim == 0 || c.hidden == 0 || c.lstm_hidden == 0 || c.seq_len == 0 || c.heads == 0 ||
      c.head_dim == 0) {
    fail("all dimensions must be at least 1");
  }
  if (c.epochs == 0) fail("epochs must be at least 1");
  if (!(c.learning_rate > 0.0)) fail("learning rate must be positive");
  for (double f : {c.train_fraction, c.validation_fraction, c.test_fraction}) {
    if (f < 0.0 || f > 1.0) fail("split fractions must lie in [0, 1]");
  }
  if (std::abs(c.train_fraction + c.validation_fraction + c.test_fraction - 1.0) > 1e-9) {
    fail("split fractions must sum to 1");
  }
  if (c.grid.embedding_dim.empty() || c.grid.learning_rate.empty() || c.grid.heads.empty()) {
    fail("grid axes must be non-empty");
  }
}

FeatureSet engineer_features(const VotingGraph& graph, const TrainConfig& config) {
  const std::size_t n = graph.node_count();
  if (n == 0) throw Error(ErrorKind::Parameter, "engineer_features: graph is empty");
  const std::size_t T = config.seq_len;

  FeatureSet fs;
  fs.seq_len = T;
  fs.raw_features = num::Tensor::matrix(n, kNodeFeatureCount);
  fs.edge_power_aggregate = num::Tensor::matrix(n, 1);
  fs.temporal_sequences = num::Tensor::matrix(n, T * kStepFeatureCount);

  // Incident edges per node in edge order (edges are time-ordered on build,
  // but sort explicitly so cached or reduced graphs behave the same).
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const VoteEdge& edge = graph.edges[e];
    incident[edge.voter].push_back(e);
    incident[edge.proposal].push_back(e);
    fs.edge_index.emplace_back(edge.voter, edge.proposal);
    fs.edge_power.push_back(edge.voting_power);
  }

  for (NodeId id = 0; id < n; ++id) {
    auto& inc = incident[id];
    std::stable_sort(inc.begin(), inc.end(), [&](std::size_t a, std::size_t b) {
      return graph.edges[a].timestamp < graph.edges[b].timestamp;
    });
    const bool is_proposal = !graph.is_voter(id);

    double power = 0.0;
    double log_power_sum = 0.0;
    std::set<std::string> spaces;
    for (std::size_t e : inc) {
      power += graph.edges[e].voting_power;
      log_power_sum += std::log1p(graph.edges[e].voting_power);
      if (!is_proposal) spaces.insert(graph.proposal(graph.edges[e].proposal).space_id);
    }
    double span = 0.0;
    double mean_gap = 0.0;
    if (inc.size() >= 2) {
      span = static_cast<double>(graph.edges[inc.back()].timestamp - graph.edges[inc.front()].timestamp) /
             kSecondsPerDay;
      mean_gap = span / static_cast<double>(inc.size() - 1);
    }
    const double degree = static_cast<double>(inc.size());
    const double vote_count = is_proposal ? degree : static_cast<double>(graph.voter(id).vote_count);

    fs.raw_features.at(id, kLogDegree) = std::log1p(degree);
    fs.raw_features.at(id, kLogPower) = std::log1p(power);
    fs.raw_features.at(id, kLogVoteCount) = std::log1p(vote_count);
    fs.raw_features.at(id, kSpanDays) = span;
    fs.raw_features.at(id, kMeanGapDays) = mean_gap;
    fs.raw_features.at(id, kDistinctSpaces) = is_proposal ? 1.0 : static_cast<double>(spaces.size());
    fs.raw_features.at(id, kIsProposal) = is_proposal ? 1.0 : 0.0;
    fs.raw_features.at(id, kIsKnown) = !is_proposal && graph.voter(id).is_known() ? 1.0 : 0.0;
    fs.edge_power_aggregate.at(id, 0) = inc.empty() ? 0.0 : log_power_sum / degree;

    if (is_proposal) continue;
    // The last T events, oldest first, right-aligned so padding is in front.
    const std::size_t steps = std::min(T, inc.size());
    const std::size_t first = inc.size() - steps;
    for (std::size_t k = 0; k < steps; ++k) {
      const std::size_t pos = first + k;
      const VoteEdge& edge = graph.edges[inc[pos]];
      const double gap =
          pos == 0 ? 0.0
                   : static_cast<double>(edge.timestamp - graph.edges[inc[pos - 1]].timestamp) / kSecondsPerDay;
      const std::size_t slot = (T - steps + k) * kStepFeatureCount;
      fs.temporal_sequences.at(id, slot + 0) = gap;
      fs.temporal_sequences.at(id, slot + 1) = std::log1p(edge.voting_power);
      fs.temporal_sequences.at(id, slot + 2) = static_cast<double>(edge.choice);
    }
  }

  fs.node_features = fs.raw_features;
  standardize_columns(fs.node_features);
  standardize_columns(fs.edge_power_aggregate);

  std::vector<NodeId> voters;
  for (const auto& v : graph.voters) voters.push_back(v.node_id);
  std::sort(voters.begin(), voters.end());
  Rng rng(config.seed);
  rng.shuffle(voters);
  const double nv = static_cast<double>(voters.size());
  std::size_t n_train = static_cast<std::size_t>(std::llround(config.train_fraction * nv));
  std::size_t n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * nv));
  n_train = std::min(n_train, voters.size());
  n_val = std::min(n_val, voters.size() - n_train);
  fs.train_nodes.assign(voters.begin(), voters.begin() + static_cast<std::ptrdiff_t>(n_train));
  fs.validation_nodes.assign(voters.begin() + static_cast<std::ptrdiff_t>(n_train),
                             voters.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  fs.test_nodes.assign(voters.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), voters.end());
  for (auto* part : {&fs.train_nodes, &fs.validation_nodes, &fs.test_nodes}) std::sort(part->begin(), part->end());
  return fs;
}

}  // namespace sybilnet::embed
