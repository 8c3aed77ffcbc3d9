#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "airfi/channel.hpp"

namespace airfi::channel {
namespace {

using A = Allowance;

// 802.11b/g/n 2.4 GHz channel plan with regulated ranges.
constexpr std::array<WifiChannel, 14> kChannels{{
    {1, 2412, 2401, 2423, A::kYes, A::kYes, A::kYes},
    {2, 2417, 2406, 2428, A::kYes, A::kYes, A::kYes},
    {3, 2422, 2411, 2433, A::kYes, A::kYes, A::kYes},
    {4, 2427, 2416, 2438, A::kYes, A::kYes, A::kYes},
    {5, 2432, 2421, 2443, A::kYes, A::kYes, A::kYes},
    {6, 2437, 2426, 2448, A::kYes, A::kYes, A::kYes},
    {7, 2442, 2431, 2453, A::kYes, A::kYes, A::kYes},
    {8, 2447, 2436, 2458, A::kYes, A::kYes, A::kYes},
    {9, 2452, 2441, 2463, A::kYes, A::kYes, A::kYes},
    {10, 2457, 2446, 2468, A::kYes, A::kYes, A::kYes},
    {11, 2462, 2451, 2473, A::kYes, A::kYes, A::kYes},
    {12, 2467, 2456, 2478, A::kCanadaOnly, A::kYes, A::kYes},
    {13, 2472, 2461, 2483, A::kNo, A::kYes, A::kYes},
    {14, 2484, 2473, 2495, A::kNo, A::k11bOnly, A::kNo},
}};

}  // namespace

std::span<const WifiChannel> wifi_channels() { return kChannels; }

const WifiChannel& wifi_channel(int index) {
  if (index < 1 || index > static_cast<int>(kChannels.size())) {
    throw std::out_of_range("Wi-Fi channel index must be 1..14, got " + std::to_string(index));
  }
  return kChannels[static_cast<std::size_t>(index - 1)];
}

std::string to_string(Allowance a) {
  switch (a) {
    case Allowance::kYes:
      return "Yes";
    case Allowance::kNo:
      return "No";
    case Allowance::kCanadaOnly:
      return "Canada only";
    case Allowance::k11bOnly:
      return "11b only";
  }
  return "?";
}

std::string wifi_channel_table_csv() {
  std::ostringstream out;
  out << "channel,center_mhz,low_mhz,high_mhz,north_america,japan,others\n";
  for (const WifiChannel& c : kChannels) {
    out << c.index << ',' << c.center_mhz << ',' << c.low_mhz << ',' << c.high_mhz << ',' << to_string(c.north_america)
        << ',' << to_string(c.japan) << ',' << to_string(c.others) << '\n';
  }
  return out.str();
}

ChannelOverlap overlapping_channels(double carrier_mhz, double bandwidth_hz, double margin_mhz) {
  ChannelOverlap result;
  if (!(carrier_mhz >= kBandLowMhz && carrier_mhz <= kBandHighMhz)) return result;
  const double half_bw_mhz = std::max(0.0, bandwidth_hz) / 2e6;
  const double lo = carrier_mhz - half_bw_mhz;
  const double hi = carrier_mhz + half_bw_mhz;
  for (const WifiChannel& c : kChannels) {
    if (c.low_mhz <= hi && c.high_mhz >= lo) result.overlapping.push_back(c);
    if (c.center_mhz - margin_mhz <= hi && c.center_mhz + margin_mhz >= lo) result.interfering.push_back(c);
  }
  return result;
}

}  // namespace airfi::channel
