#include "sybilnet/votegraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <unordered_map>

#include "sybilnet/error.hpp"
#include "sybilnet/text.hpp"

namespace sybilnet {

const VoterNode& VotingGraph::voter(NodeId id) const {
  const NodeRef& ref = nodes.at(id);
  if (ref.kind != NodeKind::Voter) throw Error(ErrorKind::Parameter, "node " + std::to_string(id) + " is not a voter");
  return voters[ref.index];
}

VoterNode& VotingGraph::voter(NodeId id) {
  const NodeRef& ref = nodes.at(id);
  if (ref.kind != NodeKind::Voter) throw Error(ErrorKind::Parameter, "node " + std::to_string(id) + " is not a voter");
  return voters[ref.index];
}

const ProposalNode& VotingGraph::proposal(NodeId id) const {
  const NodeRef& ref = nodes.at(id);
  if (ref.kind != NodeKind::Proposal) {
    throw Error(ErrorKind::Parameter, "node " + std::to_string(id) + " is not a proposal");
  }
  return proposals[ref.index];
}

void VotingGraph::reindex() {
  nodes.assign(node_count(), NodeRef{});
  std::vector<bool> seen(node_count(), false);
  auto place = [&](NodeId id, NodeRef ref) {
    if (id >= nodes.size() || seen[id]) {
      throw Error(ErrorKind::Consistency, "node ids are not a dense permutation (id " + std::to_string(id) + ")");
    }
    seen[id] = true;
    nodes[id] = ref;
  };
  for (std::size_t i = 0; i < voters.size(); ++i) place(voters[i].node_id, {NodeKind::Voter, i});
  for (std::size_t i = 0; i < proposals.size(); ++i) place(proposals[i].node_id, {NodeKind::Proposal, i});
  label_index.clear();
  for (const auto& v : voters) {
    if (v.known_name) label_index[*v.known_name] = v.node_id;
  }
}

void validate(const VotingGraph& g) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Consistency, msg); };
  if (g.nodes.size() != g.node_count()) fail("node table size does not match partition sizes");
  for (std::size_t i = 0; i < g.voters.size(); ++i) {
    const NodeRef& ref = g.nodes.at(g.voters[i].node_id);
    if (ref.kind != NodeKind::Voter || ref.index != i) fail("node table disagrees with voter partition");
  }
  for (std::size_t i = 0; i < g.proposals.size(); ++i) {
    const NodeRef& ref = g.nodes.at(g.proposals[i].node_id);
    if (ref.kind != NodeKind::Proposal || ref.index != i) fail("node table disagrees with proposal partition");
  }

  std::set<std::string> proposal_ids;
  for (const auto& p : g.proposals) {
    if (!proposal_ids.insert(p.proposal_id).second) fail("duplicate proposal id '" + p.proposal_id + "'");
  }

  std::vector<std::size_t> counts(g.voters.size(), 0);
  std::vector<double> power(g.voters.size(), 0.0);
  for (const auto& e : g.edges) {
    if (e.voter >= g.node_count() || e.proposal >= g.node_count()) fail("edge endpoint out of range");
    if (g.nodes[e.voter].kind != NodeKind::Voter || g.nodes[e.proposal].kind != NodeKind::Proposal) {
      fail("edge does not join a voter to a proposal");
    }
    if (!(e.voting_power >= 0.0) || !std::isfinite(e.voting_power)) fail("edge has invalid voting power");
    counts[g.nodes[e.voter].index] += 1;
    power[g.nodes[e.voter].index] += e.voting_power;
  }
  for (std::size_t i = 0; i < g.voters.size(); ++i) {
    const VoterNode& v = g.voters[i];
    if (v.wallet_addresses.empty()) fail("voter " + std::to_string(v.node_id) + " has no wallet");
    if (v.known_name && v.known_name->empty()) fail("known voter " + std::to_string(v.node_id) + " has empty name");
    if (v.vote_count != counts[i]) fail("voter " + std::to_string(v.node_id) + " vote_count disagrees with edges");
    const double scale = std::max(1.0, std::abs(power[i]));
    if (std::abs(v.total_power - power[i]) > 1e-9 * scale) {
      fail("voter " + std::to_string(v.node_id) + " total_power disagrees with edges");
    }
  }
}

Registry parse_registry(std::istream& input) {
  Registry registry;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (header) {
      header = false;
      if (fields.size() >= 2 && trim(fields[0]) == "address" && trim(fields[1]) == "name") continue;
      throw Error(ErrorKind::Format, "registry CSV must start with header 'address,name'");
    }
    if (fields.size() < 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
      throw Error(ErrorKind::Format, "registry line " + std::to_string(line_no) + " is malformed");
    }
    registry.push_back({to_lower(trim(fields[0])), std::string(trim(fields[1]))});
  }
  if (input.bad()) throw Error(ErrorKind::Io, "registry stream is unreadable");
  return registry;
}

Registry parse_registry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open registry file '" + path + "'");
  return parse_registry(in);
}

void write_registry(std::ostream& out, const Registry& registry) {
  out << "address,name\n";
  for (const auto& e : registry) out << csv_field(e.address) << ',' << csv_field(e.name) << '\n';
}

VotingGraph build_voting_graph(const std::vector<VoteRecord>& votes, const Registry& registry) {
  std::unordered_map<std::string, std::string> name_of;
  for (const auto& entry : registry) {
    if (entry.name.empty()) throw Error(ErrorKind::Consistency, "registry entry for " + entry.address + " has no name");
    const std::string addr = to_lower(entry.address);
    auto [it, inserted] = name_of.emplace(addr, entry.name);
    if (!inserted && it->second != entry.name) {
      throw Error(ErrorKind::Consistency, "registry maps address " + addr + " to both '" + it->second + "' and '" +
                                              entry.name + "'");
    }
  }

  VotingGraph g;
  std::unordered_map<std::string, std::size_t> voter_slot;     // identity key -> voters index
  std::unordered_map<std::string, std::size_t> proposal_slot;  // proposal id -> proposals index
  std::vector<std::set<std::string>> wallets;
  NodeId next_id = 0;

  for (const auto& vote : votes) {
    const std::string addr = to_lower(vote.voter_address);
    auto named = name_of.find(addr);
    const std::string key = named != name_of.end() ? "name:" + named->second : "addr:" + addr;

    auto [vit, new_voter] = voter_slot.emplace(key, g.voters.size());
    if (new_voter) {
      VoterNode node;
      node.node_id = next_id++;
      if (named != name_of.end()) node.known_name = named->second;
      g.voters.push_back(std::move(node));
      wallets.emplace_back();
    }
    VoterNode& voter = g.voters[vit->second];
    wallets[vit->second].insert(addr);

    auto [pit, new_proposal] = proposal_slot.emplace(vote.proposal_id, g.proposals.size());
    if (new_proposal) g.proposals.push_back({next_id++, vote.proposal_id, vote.space_id});
    const ProposalNode& proposal = g.proposals[pit->second];

    voter.total_power += vote.voting_power;
    voter.vote_count += 1;
    g.edges.push_back({voter.node_id, proposal.node_id, vote.voting_power, vote.timestamp, vote.choice});
  }
  for (std::size_t i = 0; i < g.voters.size(); ++i) {
    g.voters[i].wallet_addresses.assign(wallets[i].begin(), wallets[i].end());
  }
  g.reindex();
  return g;
}

std::vector<std::vector<NodeId>> simple_adjacency(const VotingGraph& graph) {
  std::vector<std::vector<NodeId>> adj(graph.node_count());
  for (const auto& e : graph.edges) {
    adj[e.voter].push_back(e.proposal);
    adj[e.proposal].push_back(e.voter);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

std::vector<double> betweenness_centrality(const VotingGraph& graph) {
  const std::size_t n = graph.node_count();
  const auto adj = simple_adjacency(graph);
  std::vector<double> centrality(n, 0.0);

  std::vector<std::vector<NodeId>> preds(n);
  std::vector<double> sigma(n);
  std::vector<long long> dist(n);
  std::vector<double> delta(n);
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId v = 0; v < n; ++v) {
      preds[v].clear();
      sigma[v] = 0.0;
      dist[v] = -1;
      delta[v] = 0.0;
    }
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<NodeId> queue{s};
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (NodeId w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) centrality[w] += delta[w];
    }
  }
  // Raw sums count every pair from both endpoints; (n-1)(n-2) is twice the
  // number of pairs excluding the node itself.
  const double scale = n > 2 ? 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2)) : 0.0;
  for (double& c : centrality) c *= scale;
  return centrality;
}

EigenvectorResult eigenvector_centrality(const VotingGraph& graph, double tolerance, std::size_t max_iterations) {
  EigenvectorResult result;
  const std::size_t n = graph.node_count();
  if (n == 0) return result;
  const auto adj = simple_adjacency(graph);
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  result.converged = false;
  for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
    for (NodeId v = 0; v < n; ++v) {
      double s = x[v];
      for (NodeId w : adj[v]) s += x[w];
      next[v] = s;
    }
    double norm = 0.0;
    for (double v : next) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) norm = 1.0;
    double change = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      next[v] /= norm;
      change += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    result.iterations = iter;
    if (change < static_cast<double>(n) * tolerance) {
      result.converged = true;
      break;
    }
  }
  result.values = std::move(x);
  return result;
}

namespace {

std::vector<CentralityEntry> top_entries(const std::vector<double>& values, std::size_t k) {
  std::vector<CentralityEntry> entries;
  entries.reserve(values.size());
  for (NodeId i = 0; i < values.size(); ++i) entries.push_back({i, values[i]});
  const std::size_t keep = std::min(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(),
                    [](const CentralityEntry& a, const CentralityEntry& b) {
                      if (a.value != b.value) return a.value > b.value;
                      return a.node_id < b.node_id;
                    });
  entries.resize(keep);
  return entries;
}

}  // namespace

StatsReport sociometrics(const VotingGraph& graph, std::size_t top_k) {
  StatsReport r;
  r.node_count = graph.node_count();
  r.voter_count = graph.voters.size();
  r.proposal_count = graph.proposals.size();
  r.edge_count = graph.edges.size();
  for (const auto& v : graph.voters) {
    if (v.is_known()) {
      ++r.known_voters;
    } else {
      ++r.unknown_voters;
    }
  }
  if (r.node_count == 0) return r;

  std::vector<std::size_t> degree(r.node_count, 0);
  for (const auto& e : graph.edges) {
    ++degree[e.voter];
    ++degree[e.proposal];
  }
  for (std::size_t d : degree) ++r.degree_histogram[d];

  const auto adj = simple_adjacency(graph);
  for (const auto& list : adj) r.simple_edge_count += list.size();
  r.simple_edge_count /= 2;
  const double max_edges = static_cast<double>(r.voter_count) * static_cast<double>(r.proposal_count);
  r.density = max_edges > 0.0 ? static_cast<double>(r.simple_edge_count) / max_edges : 0.0;

  r.top_betweenness = top_entries(betweenness_centrality(graph), top_k);
  auto eig = eigenvector_centrality(graph);
  r.top_eigenvector = top_entries(eig.values, top_k);
  r.eigenvector_iterations = eig.iterations;
  r.eigenvector_converged = eig.converged;
  return r;
}

}  // namespace sybilnet
