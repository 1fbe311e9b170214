#include "sybilnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "sybilnet/error.hpp"
#include "sybilnet/random.hpp"
#include "sybilnet/text.hpp"

namespace sybilnet::synth {

namespace {

constexpr EpochSeconds kDay = 86400;
constexpr int kChoices = 4;
// Relative weight of proposals outside an entity's spaces or active period.
constexpr double kOffPreference = 0.002;
// Scale of the preference for swapping a replayed vote onto a proposal that
// opens close to the original one.
constexpr double kSwapDays = 5.0;

struct World {
  std::vector<ProposalRecord> proposals;
  std::vector<std::size_t> space_of;
  std::vector<double> popularity;
};

struct Vote {
  std::size_t proposal = 0;
  double power = 0.0;
  double phase = 0.0;  // position inside the proposal's voting window
  int choice = 0;
};

struct Profile {
  std::vector<double> weights;  // preference over proposals
  double power_scale = 1.0;
  double phase = 0.5;
  int favourite = 0;
  std::vector<Vote> votes;
};

double clamp_phase(double p) { return std::clamp(p, 0.01, 0.99); }

std::size_t draw_count(const CountRange& r, Rng& rng) {
  return static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(r.min), static_cast<std::int64_t>(r.max)));
}

World make_world(const SynthConfig& c, Rng& rng) {
  World w;
  const EpochSeconds span = static_cast<EpochSeconds>(c.span_days) * kDay;
  for (std::size_t p = 0; p < c.proposals; ++p) {
    const std::size_t space = static_cast<std::size_t>(rng.index(c.spaces));
    const EpochSeconds start = c.start + static_cast<EpochSeconds>(rng.index(static_cast<std::uint64_t>(span - 14 * kDay)));
    const EpochSeconds duration = rng.integer(kDay, 14 * kDay);
    char id[32];
    std::snprintf(id, sizeof id, "proposal-%04zu", p);
    w.proposals.push_back({id, "space-" + std::to_string(space), start, start + duration});
    w.space_of.push_back(space);
    w.popularity.push_back(std::exp(0.8 * rng.normal()));
  }
  return w;
}

Vote fresh_vote(std::size_t proposal, const Profile& prof, Rng& rng) {
  Vote v;
  v.proposal = proposal;
  v.power = prof.power_scale * std::exp(0.25 * rng.normal());
  v.phase = clamp_phase(prof.phase + 0.05 * rng.normal());
  v.choice = rng.bernoulli(0.8) ? prof.favourite : static_cast<int>(rng.index(kChoices));
  return v;
}

Profile draw_profile(const SynthConfig& c, const World& w, Rng& rng) {
  Profile prof;
  std::set<std::size_t> favoured;
  const std::size_t n_fav = 2 + static_cast<std::size_t>(rng.index(2));
  while (favoured.size() < std::min(n_fav, c.spaces)) favoured.insert(static_cast<std::size_t>(rng.index(c.spaces)));
  // Activity rhythm: the stretch of the year in which the entity is active.
  const double span = static_cast<double>(c.span_days) * static_cast<double>(kDay);
  const double active = span * rng.uniform(0.25, 1.0);
  const double active_from = static_cast<double>(c.start) + rng.uniform(0.0, span - active);
  prof.weights.resize(w.proposals.size());
  for (std::size_t p = 0; p < w.proposals.size(); ++p) {
    const double t = static_cast<double>(w.proposals[p].start);
    const bool in_period = t >= active_from && t <= active_from + active;
    prof.weights[p] = w.popularity[p] * (favoured.count(w.space_of[p]) ? 1.0 : kOffPreference) *
                      (in_period ? 1.0 : kOffPreference);
  }
  prof.power_scale = std::exp(1.5 + 1.2 * rng.normal());
  prof.phase = rng.uniform(0.05, 0.95);
  prof.favourite = static_cast<int>(rng.index(kChoices));

  const std::size_t m = std::min(draw_count(c.votes_per_voter, rng), w.proposals.size());
  std::vector<double> remaining = prof.weights;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t p = rng.weighted(remaining);
    remaining[p] = 0.0;
    prof.votes.push_back(fresh_vote(p, prof, rng));
  }
  return prof;
}

// One wallet's votes: the entity's votes with each proposal swapped, power
// scaled, timing shifted and choice flipped at a rate set by `noise`.
std::vector<Vote> replay(const Profile& prof, const World& w, double noise, Rng& rng) {
  std::vector<double> unused = prof.weights;
  for (const Vote& v : prof.votes) unused[v.proposal] = 0.0;
  std::vector<Vote> out;
  std::vector<double> nearby(unused.size());
  for (const Vote& base : prof.votes) {
    Vote v = base;
    if (rng.bernoulli(noise)) {
      const double t0 = static_cast<double>(w.proposals[base.proposal].start);
      double total = 0.0;
      for (std::size_t p = 0; p < unused.size(); ++p) {
        const double days = std::abs(static_cast<double>(w.proposals[p].start) - t0) / static_cast<double>(kDay);
        nearby[p] = unused[p] * std::exp(-days / kSwapDays);
        total += nearby[p];
      }
      if (total > 0.0) {
        const std::size_t p = rng.weighted(nearby);
        unused[p] = 0.0;
        v = fresh_vote(p, prof, rng);
      }
    }
    v.power *= std::exp(noise * rng.normal());
    v.phase = clamp_phase(v.phase + 0.1 * noise * rng.normal());
    if (rng.bernoulli(noise)) v.choice = static_cast<int>(rng.index(kChoices));
    out.push_back(v);
  }
  return out;
}

std::string fresh_address(Rng& rng, std::set<std::string>& used) {
  for (;;) {
    std::string a = "0x" + hex64(rng.next()) + hex64(rng.next()) + hex64(rng.next()).substr(0, 8);
    if (used.insert(a).second) return a;
  }
}

void emit(const std::string& wallet, const std::vector<Vote>& votes, const World& w, std::vector<VoteRecord>& out) {
  for (const Vote& v : votes) {
    const ProposalRecord& p = w.proposals[v.proposal];
    const EpochSeconds ts = p.start + std::llround(v.phase * static_cast<double>(p.duration()));
    out.push_back({wallet, p.proposal_id, p.space_id, v.power, ts, v.choice});
  }
}

}  // namespace

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Usage, "synth config: " + msg); };
  if (c.behavior_noise < 0.0 || c.behavior_noise > 1.0) fail("behavior_noise must lie in [0, 1]");
  if (c.known_fraction < 0.0 || c.known_fraction > 1.0) fail("known_fraction must lie in [0, 1]");
  if (c.wallets_per_sybil.min > c.wallets_per_sybil.max) fail("wallets_per_sybil min exceeds max");
  if (c.votes_per_voter.min > c.votes_per_voter.max) fail("votes_per_voter min exceeds max");
  if (c.votes_per_voter.min == 0) fail("votes_per_voter must be at least 1");
  if (c.wallets_per_sybil.min == 0 && c.sybil_entities > 0) fail("wallets_per_sybil must be at least 1");
  if (c.spaces == 0) fail("spaces must be at least 1");
  if (c.span_days < 15) fail("span_days must be at least 15");
  if (c.proposals == 0 && c.honest_voters + c.sybil_entities > 0) fail("voters need at least one proposal");
}

const char* to_string(EntityType type) { return type == EntityType::Honest ? "honest" : "sybil"; }

std::size_t GroundTruth::sybil_wallet_count() const {
  std::size_t n = 0;
  for (const auto& [wallet, entity] : wallet_entity) n += entity_types.at(entity) == EntityType::Sybil;
  return n;
}

SynthDataset generate_dataset(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);
  SynthDataset out;
  const World world = make_world(config, rng);
  out.proposals = world.proposals;
  std::set<std::string> used;

  const auto n_known = static_cast<std::size_t>(std::llround(config.known_fraction * static_cast<double>(config.honest_voters)));
  for (std::size_t h = 0; h < config.honest_voters; ++h) {
    const std::size_t entity = out.truth.entity_types.size();
    out.truth.entity_types.push_back(EntityType::Honest);
    const Profile prof = draw_profile(config, world, rng);
    const std::string wallet = fresh_address(rng, used);
    out.truth.wallet_entity[wallet] = entity;
    if (h < n_known) out.registry.push_back({wallet, "voter-" + std::to_string(h) + ".eth"});
    emit(wallet, prof.votes, world, out.votes);
  }
  for (std::size_t s = 0; s < config.sybil_entities; ++s) {
    const std::size_t entity = out.truth.entity_types.size();
    out.truth.entity_types.push_back(EntityType::Sybil);
    const Profile prof = draw_profile(config, world, rng);
    const std::size_t wallets = draw_count(config.wallets_per_sybil, rng);
    for (std::size_t k = 0; k < wallets; ++k) {
      const std::string wallet = fresh_address(rng, used);
      out.truth.wallet_entity[wallet] = entity;
      emit(wallet, replay(prof, world, config.behavior_noise, rng), world, out.votes);
    }
  }
  std::sort(out.votes.begin(), out.votes.end(), vote_order_less);
  return out;
}

void write_truth(std::ostream& out, const GroundTruth& truth) {
  out << "wallet,entity_id,type\n";
  for (const auto& [wallet, entity] : truth.wallet_entity) {
    out << wallet << ',' << entity << ',' << to_string(truth.entity_types.at(entity)) << '\n';
  }
}

GroundTruth parse_truth(std::istream& input) {
  if (!input) throw Error(ErrorKind::Io, "truth stream is not readable");
  GroundTruth truth;
  std::string line;
  if (!std::getline(input, line) || trim(line) != "wallet,entity_id,type") {
    throw Error(ErrorKind::Format, "truth file must start with the header wallet,entity_id,type");
  }
  std::map<std::size_t, EntityType> types;
  std::size_t line_no = 1;
  while (std::getline(input, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const auto entity = fields.size() == 3 ? parse_int<std::size_t>(fields[1]) : std::nullopt;
    if (!entity || (fields[2] != "honest" && fields[2] != "sybil")) {
      throw Error(ErrorKind::Format, "truth line " + std::to_string(line_no) + " is malformed");
    }
    const EntityType type = fields[2] == "honest" ? EntityType::Honest : EntityType::Sybil;
    auto [it, inserted] = types.emplace(*entity, type);
    if (!inserted && it->second != type) {
      throw Error(ErrorKind::Consistency, "entity " + fields[1] + " has two types");
    }
    truth.wallet_entity[to_lower(fields[0])] = *entity;
  }
  const std::size_t n = types.empty() ? 0 : types.rbegin()->first + 1;
  truth.entity_types.assign(n, EntityType::Honest);
  for (const auto& [id, type] : types) truth.entity_types[id] = type;
  return truth;
}

GroundTruth parse_truth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open truth file '" + path + "'");
  return parse_truth(in);
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Shape, "ARI needs two labelings of the same items");
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::map<std::size_t, double> rows;
  std::map<std::size_t, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, n] : cells) index += pairs(n);
  double sum_a = 0.0;
  for (const auto& [key, n] : rows) sum_a += pairs(n);
  double sum_b = 0.0;
  for (const auto& [key, n] : cols) sum_b += pairs(n);
  const double total = pairs(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

namespace {

struct Labeling {
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
};

// Labels for every sybil wallet, in address order. Unclustered wallets get
// fresh singleton labels.
Labeling sybil_labeling(const std::vector<std::vector<std::string>>& predicted, const GroundTruth& truth) {
  std::map<std::string, std::size_t> cluster_of;
  for (std::size_t c = 0; c < predicted.size(); ++c) {
    for (const auto& w : predicted[c]) cluster_of[to_lower(w)] = c;
  }
  Labeling out;
  std::size_t next = predicted.size();
  for (const auto& [wallet, entity] : truth.wallet_entity) {
    if (truth.entity_types.at(entity) != EntityType::Sybil) continue;
    out.truth.push_back(entity);
    auto it = cluster_of.find(wallet);
    out.predicted.push_back(it == cluster_of.end() ? next++ : it->second);
  }
  return out;
}

}  // namespace

RecoveryScores evaluate_recovery(const std::vector<std::vector<std::string>>& predicted, const GroundTruth& truth) {
  const Labeling lab = sybil_labeling(predicted, truth);
  RecoveryScores s;
  s.sybil_wallets = lab.truth.size();
  for (std::size_t i = 0; i < lab.truth.size(); ++i) {
    for (std::size_t j = i + 1; j < lab.truth.size(); ++j) {
      const bool same_truth = lab.truth[i] == lab.truth[j];
      const bool same_pred = lab.predicted[i] == lab.predicted[j];
      s.true_pairs += same_truth;
      s.predicted_pairs += same_pred;
      s.correct_pairs += same_truth && same_pred;
    }
  }
  if (s.predicted_pairs > 0) s.precision = static_cast<double>(s.correct_pairs) / static_cast<double>(s.predicted_pairs);
  if (s.true_pairs > 0) s.recall = static_cast<double>(s.correct_pairs) / static_cast<double>(s.true_pairs);
  if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  s.ari = adjusted_rand_index(lab.truth, lab.predicted);
  return s;
}

std::vector<std::vector<std::string>> wallet_clusters(const sybil::SybilClusterSet& predicted, const VotingGraph& graph) {
  std::vector<std::vector<std::string>> out;
  for (const auto& c : predicted.clusters) {
    std::vector<std::string> wallets;
    for (NodeId id : c.members) {
      const auto& w = graph.voter(id).wallet_addresses;
      wallets.insert(wallets.end(), w.begin(), w.end());
    }
    out.push_back(std::move(wallets));
  }
  return out;
}

RecoveryScores evaluate_recovery(const sybil::SybilClusterSet& predicted, const VotingGraph& graph,
                                 const GroundTruth& truth) {
  return evaluate_recovery(wallet_clusters(predicted, graph), truth);
}

double random_baseline_ari(const std::vector<std::vector<std::string>>& predicted, const GroundTruth& truth,
                           std::size_t rounds, std::uint64_t seed) {
  if (rounds == 0) return 0.0;
  Labeling lab = sybil_labeling(predicted, truth);
  Rng rng(seed);
  double sum = 0.0;
  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<std::size_t> shuffled = lab.predicted;
    rng.shuffle(shuffled);
    sum += adjusted_rand_index(lab.truth, shuffled);
  }
  return sum / static_cast<double>(rounds);
}

}  // namespace sybilnet::synth
