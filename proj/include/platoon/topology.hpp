#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace platoon {

enum class VehicleKind : std::uint8_t { Cav = 0, Hdv = 1 };

inline constexpr int kDefaultMaxModuleSize = 5;

/// Ordered CAV/HDV labels of a platoon; index 0 is the platoon leader.
class TopologyVector {
 public:
  /// Labels are 0 (CAV) or 1 (HDV). Throws InvalidInput when empty or when a
  /// label is outside {0, 1}.
  explicit TopologyVector(const std::vector<int>& labels);
  explicit TopologyVector(std::vector<VehicleKind> kinds);

  /// Parses the config literal "1,0,0,1" (leftmost is the front vehicle).
  static TopologyVector parse(std::string_view literal);

  std::size_t size() const { return kinds_.size(); }
  VehicleKind operator[](std::size_t i) const { return kinds_.at(i); }
  bool is_cav(std::size_t i) const { return kinds_.at(i) == VehicleKind::Cav; }
  const std::vector<VehicleKind>& kinds() const { return kinds_; }

  /// Number of CAVs behind the platoon leader.
  std::size_t follower_cav_count() const;

  std::string to_string() const;
  std::vector<int> labels() const;

  bool operator==(const TopologyVector&) const = default;

 private:
  std::vector<VehicleKind> kinds_;
};

/// One control module: a leading vehicle plus `module_size` consecutive CAVs.
struct SubsystemAssignment {
  int module_size = 0;
  std::size_t leader_index = 0;
  std::vector<std::size_t> cav_indices;

  bool operator==(const SubsystemAssignment&) const = default;
};

/// Splits every maximal run of follower CAVs front-to-rear into chunks of at
/// most `max_module_size`. A chunk is led by the vehicle directly ahead of it:
/// the last HDV before the run, the playback leader, or the last CAV of the
/// previous chunk. Vehicle 0 is always the playback leader regardless of its
/// label.
std::vector<SubsystemAssignment> decompose(const TopologyVector& topology,
                                           int max_module_size = kDefaultMaxModuleSize);

struct PartitionCheck {
  bool ok = true;
  std::vector<std::string> violations;

  explicit operator bool() const { return ok; }
};

/// Checks an arbitrary assignment list against the decomposition rules without
/// running `decompose`. Never throws; violations are listed instead.
PartitionCheck verify_partition(const TopologyVector& topology,
                                std::span<const SubsystemAssignment> assignments,
                                int max_module_size = kDefaultMaxModuleSize);

}  // namespace platoon
