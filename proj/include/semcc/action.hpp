#pragma once

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

#include "semcc/errors.hpp"
#include "semcc/semantics.hpp"

namespace semcc {

struct Idle {
  friend bool operator==(const Idle&, const Idle&) = default;
};
struct Unicast {
  int uav = 0;
  friend bool operator==(const Unicast&, const Unicast&) = default;
};
struct Multicast {
  int group = 0;
  friend bool operator==(const Multicast&, const Multicast&) = default;
};

using RbAssignment = std::variant<Idle, Unicast, Multicast>;

// One assignment per resource block.
struct ScheduleAction {
  std::vector<RbAssignment> rbs;

  static ScheduleAction all_idle(int n_rb) {
    return ScheduleAction{std::vector<RbAssignment>(static_cast<std::size_t>(n_rb), Idle{})};
  }
  int used_rbs() const {
    return static_cast<int>(std::count_if(rbs.begin(), rbs.end(), [](const RbAssignment& a) {
      return !std::holds_alternative<Idle>(a);
    }));
  }
};

// What a scheduler may serve this TTI: pending UAVs outside every group, the
// multicast groups over pending UAVs, and the RB budget.
struct EntitySet {
  std::vector<int> unicast;
  std::vector<MulticastGroup> groups;
  int capacity = 0;

  std::size_t size() const { return unicast.size() + groups.size(); }
  bool empty() const { return unicast.empty() && groups.empty(); }
};

// Checks exclusivity: at most one entity per RB, no entity on two RBs, no UAV
// reached twice, indices in range. Returns an empty string when valid.
inline std::string action_violation(const ScheduleAction& action, int n_uav, int n_rb,
                                    const std::vector<MulticastGroup>& groups) {
  if (static_cast<int>(action.rbs.size()) != n_rb) return "action length differs from n_rb";
  std::vector<int> uav_hits(static_cast<std::size_t>(n_uav), 0);
  std::vector<int> group_hits(groups.size(), 0);
  for (const auto& a : action.rbs) {
    if (const auto* u = std::get_if<Unicast>(&a)) {
      if (u->uav < 0 || u->uav >= n_uav) return "unicast target out of range";
      if (++uav_hits[static_cast<std::size_t>(u->uav)] > 1) return "UAV served on two RBs";
    } else if (const auto* m = std::get_if<Multicast>(&a)) {
      if (m->group < 0 || m->group >= static_cast<int>(groups.size())) return "unknown group id";
      if (++group_hits[static_cast<std::size_t>(m->group)] > 1) return "group served on two RBs";
      for (int k : groups[static_cast<std::size_t>(m->group)].members) {
        if (k < 0 || k >= n_uav) return "group member out of range";
        if (++uav_hits[static_cast<std::size_t>(k)] > 1) return "UAV served on two RBs";
      }
    }
  }
  return {};
}

inline void require_valid_action(const ScheduleAction& action, int n_uav, int n_rb,
                                 const std::vector<MulticastGroup>& groups) {
  if (auto why = action_violation(action, n_uav, n_rb, groups); !why.empty())
    throw ContractError("malformed schedule action: " + why);
}

}  // namespace semcc
