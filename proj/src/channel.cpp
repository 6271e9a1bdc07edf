#include "fkbs/channel.hpp"

namespace fkbs {

namespace {
constexpr std::array<std::string_view, kChannelCount> kChannelNames = {"call_nurses", "record_data", "smile"};
}  // namespace

std::string_view to_string(Channel channel) { return kChannelNames[static_cast<std::size_t>(channel)]; }

std::optional<Channel> parse_channel(std::string_view name) {
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (kChannelNames[i] == name) return static_cast<Channel>(i);
  }
  return std::nullopt;
}

bool asserts_channel(const Consequent& consequent, Channel channel) {
  switch (channel) {
    case Channel::kCallNurses: return consequent.actions.contains(Action::kCallNurses);
    case Channel::kRecordData: return consequent.actions.contains(Action::kRecordData);
    case Channel::kSmile: return consequent.expression == Expression::kSmile;
  }
  return false;
}

bool denies_channel(const Consequent& consequent, Channel channel) {
  return channel == Channel::kSmile && consequent.expression == Expression::kNeutral;
}

}  // namespace fkbs
