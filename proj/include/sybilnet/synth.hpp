#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sybilnet/ingest.hpp"
#include "sybilnet/sybil/clusters.hpp"
#include "sybilnet/votegraph.hpp"

namespace sybilnet::synth {

struct CountRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

struct SynthConfig {
  std::size_t honest_voters = 1000;
  std::size_t sybil_entities = 50;
  CountRange wallets_per_sybil{5, 5};
  std::size_t proposals = 200;
  CountRange votes_per_voter{4, 24};
  double behavior_noise = 0.1;  // 0: wallets of one entity vote identically
  double known_fraction = 0.1;  // share of honest voters with a registered name
  std::size_t spaces = 8;
  EpochSeconds start = 1600000000;
  std::size_t span_days = 365;
  std::uint64_t seed = 1;
};

// Throws Error(Usage) on out-of-range fields.
void validate(const SynthConfig& config);

enum class EntityType { Honest, Sybil };
const char* to_string(EntityType type);

struct GroundTruth {
  std::map<std::string, std::size_t> wallet_entity;  // address -> entity id
  std::vector<EntityType> entity_types;              // by entity id

  std::size_t sybil_wallet_count() const;
};

struct SynthDataset {
  std::vector<VoteRecord> votes;  // ordered by (timestamp, voter, proposal)
  std::vector<ProposalRecord> proposals;
  Registry registry;
  GroundTruth truth;
};

// Every entity draws one behaviour profile (preferred spaces and proposals,
// power scale, voting phase, favourite choice). Sybil wallets replay their
// entity's profile perturbed by `behavior_noise`; honest voters each own one
// wallet and an independent profile. Deterministic per seed.
SynthDataset generate_dataset(const SynthConfig& config);

// CSV `wallet,entity_id,type`.
void write_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth parse_truth(std::istream& input);
GroundTruth parse_truth_file(const std::string& path);

struct RecoveryScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ari = 0.0;
  std::size_t sybil_wallets = 0;
  std::size_t true_pairs = 0;
  std::size_t predicted_pairs = 0;
  std::size_t correct_pairs = 0;
};

// Pairwise scores and ARI over sybil wallets only. Each inner vector is one
// predicted cluster of wallet addresses; unlisted sybil wallets are singletons.
RecoveryScores evaluate_recovery(const std::vector<std::vector<std::string>>& predicted, const GroundTruth& truth);
// Maps clustered node ids to their wallets in `graph` first.
RecoveryScores evaluate_recovery(const sybil::SybilClusterSet& predicted, const VotingGraph& graph,
                                 const GroundTruth& truth);

// Adjusted Rand index of two labelings of the same items. Two identical
// trivial partitions score 1.
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

// Mean ARI after shuffling predicted labels across sybil wallets, keeping the
// predicted cluster sizes.
double random_baseline_ari(const std::vector<std::vector<std::string>>& predicted, const GroundTruth& truth,
                           std::size_t rounds, std::uint64_t seed);

std::vector<std::vector<std::string>> wallet_clusters(const sybil::SybilClusterSet& predicted,
                                                      const VotingGraph& graph);

}  // namespace sybilnet::synth
