#include "platoon/topology.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "platoon/errors.hpp"

namespace platoon {

namespace {

std::vector<VehicleKind> to_kinds(const std::vector<int>& labels) {
  std::vector<VehicleKind> kinds;
  kinds.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw InvalidInput("topology label at index " + std::to_string(i) +
                         " must be 0 (CAV) or 1 (HDV), got " + std::to_string(labels[i]));
    }
    kinds.push_back(labels[i] == 0 ? VehicleKind::Cav : VehicleKind::Hdv);
  }
  return kinds;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

TopologyVector::TopologyVector(const std::vector<int>& labels) : TopologyVector(to_kinds(labels)) {}

TopologyVector::TopologyVector(std::vector<VehicleKind> kinds) : kinds_(std::move(kinds)) {
  if (kinds_.empty()) throw InvalidInput("topology must contain at least one vehicle");
}

TopologyVector TopologyVector::parse(std::string_view literal) {
  std::vector<int> labels;
  std::size_t pos = 0;
  while (pos <= literal.size()) {
    const auto comma = literal.find(',', pos);
    const auto end = comma == std::string_view::npos ? literal.size() : comma;
    const auto token = trim(literal.substr(pos, end - pos));
    if (token.empty()) {
      if (comma == std::string_view::npos && labels.empty()) break;
      throw InvalidInput("empty label in topology literal '" + std::string(literal) + "'");
    }
    int value = -1;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      throw InvalidInput("bad label '" + std::string(token) + "' in topology literal");
    }
    labels.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return TopologyVector(labels);
}

std::size_t TopologyVector::follower_cav_count() const {
  return static_cast<std::size_t>(
      std::count(kinds_.begin() + 1, kinds_.end(), VehicleKind::Cav));
}

std::string TopologyVector::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    if (i) out += ',';
    out += kinds_[i] == VehicleKind::Cav ? '0' : '1';
  }
  return out;
}

std::vector<int> TopologyVector::labels() const {
  std::vector<int> out;
  out.reserve(kinds_.size());
  for (auto k : kinds_) out.push_back(k == VehicleKind::Cav ? 0 : 1);
  return out;
}

std::vector<SubsystemAssignment> decompose(const TopologyVector& topology, int max_module_size) {
  if (max_module_size < 1) throw InvalidInput("max_module_size must be >= 1");
  const std::size_t n = topology.size();
  const auto chunk = static_cast<std::size_t>(max_module_size);

  std::vector<SubsystemAssignment> out;
  std::size_t i = 1;
  while (i < n) {
    if (!topology.is_cav(i)) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < n && topology.is_cav(run_end)) ++run_end;

    std::size_t leader = i - 1;
    for (std::size_t start = i; start < run_end; start += chunk) {
      const std::size_t stop = std::min(start + chunk, run_end);
      SubsystemAssignment a;
      a.module_size = static_cast<int>(stop - start);
      a.leader_index = leader;
      for (std::size_t c = start; c < stop; ++c) a.cav_indices.push_back(c);
      out.push_back(std::move(a));
      leader = stop - 1;
    }
    i = run_end;
  }
  return out;
}

PartitionCheck verify_partition(const TopologyVector& topology,
                                std::span<const SubsystemAssignment> assignments,
                                int max_module_size) {
  PartitionCheck check;
  auto fail = [&](std::string msg) {
    check.ok = false;
    check.violations.push_back(std::move(msg));
  };
  if (max_module_size < 1) {
    fail("max_module_size < 1");
    return check;
  }

  const std::size_t n = topology.size();
  std::vector<int> owner_count(n, 0);
  // Last CAV index of each well-formed full-size chunk; those may lead the next chunk.
  std::vector<std::size_t> full_chunk_tails;

  for (std::size_t a = 0; a < assignments.size(); ++a) {
    const auto& as = assignments[a];
    const std::string tag = "assignment " + std::to_string(a) + ": ";
    if (as.cav_indices.empty()) {
      fail(tag + "no controlled CAVs");
      continue;
    }
    if (as.module_size != static_cast<int>(as.cav_indices.size())) {
      fail(tag + "module_size does not match cav_indices length");
    }
    if (as.module_size < 1 || as.module_size > max_module_size) {
      fail(tag + "module_size outside [1, " + std::to_string(max_module_size) + "]");
    }
    if (as.leader_index >= n) {
      fail(tag + "leader index out of range");
      continue;
    }
    bool indices_ok = true;
    for (std::size_t j = 0; j < as.cav_indices.size(); ++j) {
      const std::size_t c = as.cav_indices[j];
      if (c >= n || c == 0) {
        fail(tag + "CAV index " + std::to_string(c) + " out of range");
        indices_ok = false;
        continue;
      }
      if (!topology.is_cav(c)) fail(tag + "index " + std::to_string(c) + " is not a CAV");
      if (c != as.leader_index + 1 + j) {
        fail(tag + "CAV indices are not consecutive behind the leader");
        indices_ok = false;
      }
      ++owner_count[c];
    }
    if (!indices_ok) continue;

    const std::size_t tail = as.cav_indices.back();
    const bool run_continues = tail + 1 < n && topology.is_cav(tail + 1);
    if (run_continues && as.module_size != max_module_size) {
      fail(tag + "chunk ends inside a CAV run without reaching the module size limit");
    }
    if (as.module_size == max_module_size) full_chunk_tails.push_back(tail);
  }

  for (std::size_t c = 1; c < n; ++c) {
    if (topology.is_cav(c) && owner_count[c] != 1) {
      fail("CAV " + std::to_string(c) + " is assigned " + std::to_string(owner_count[c]) +
           " times");
    }
    if (!topology.is_cav(c) && owner_count[c] != 0) {
      fail("HDV " + std::to_string(c) + " appears as a controlled CAV");
    }
  }

  for (std::size_t a = 0; a < assignments.size(); ++a) {
    const auto& as = assignments[a];
    if (as.cav_indices.empty() || as.leader_index >= n) continue;
    const std::size_t leader = as.leader_index;
    if (leader == 0 || !topology.is_cav(leader)) continue;
    const bool chained = std::find(full_chunk_tails.begin(), full_chunk_tails.end(), leader) !=
                         full_chunk_tails.end();
    if (!chained) {
      fail("assignment " + std::to_string(a) + ": CAV leader " + std::to_string(leader) +
           " is not the tail of a full preceding chunk");
    }
  }
  return check;
}

}  // namespace platoon
