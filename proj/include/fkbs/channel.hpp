#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "fkbs/rule_dsl.hpp"

namespace fkbs {

/// Action channels that carry a continuous activation through inference,
/// appraisal fusion and thresholding.
enum class Channel { kCallNurses, kRecordData, kSmile };

inline constexpr std::size_t kChannelCount = 3;
inline constexpr std::array<Channel, kChannelCount> kChannels = {Channel::kCallNurses, Channel::kRecordData,
                                                                 Channel::kSmile};

std::string_view to_string(Channel channel);
std::optional<Channel> parse_channel(std::string_view name);

/// Fixed-size map keyed by Channel.
template <typename T>
struct ChannelMap {
  std::array<T, kChannelCount> values{};

  T& operator[](Channel c) { return values[static_cast<std::size_t>(c)]; }
  const T& operator[](Channel c) const { return values[static_cast<std::size_t>(c)]; }
  bool operator==(const ChannelMap&) const = default;
};

using ActivationMap = ChannelMap<double>;

/// True when the consequent drives the channel's asserting ("high") term.
bool asserts_channel(const Consequent& consequent, Channel channel);
/// True when the consequent drives the channel's denying ("low") term; only a
/// neutral expression does this, on the smile channel.
bool denies_channel(const Consequent& consequent, Channel channel);

}  // namespace fkbs
