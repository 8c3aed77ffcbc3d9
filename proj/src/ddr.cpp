#include <stdexcept>

#include "airfi/channel.hpp"

namespace airfi::channel {

void DdrConfig::validate() const {
  if (!(clock_rate_mhz > 0.0)) throw std::invalid_argument("clock_rate_mhz must be positive");
  if (line_width_bits != 16 && line_width_bits != 32 && line_width_bits != 64) {
    throw std::invalid_argument("line_width_bits must be 16, 32 or 64");
  }
  if (harmonic < 1) throw std::invalid_argument("harmonic must be >= 1");
}

double ddr_bandwidth(const DdrConfig& cfg) {
  if (cfg.clock_rate_mhz < 0.0) throw std::invalid_argument("clock_rate_mhz must be >= 0");
  return cfg.clock_rate_mhz * 2.0 * cfg.line_width_bits / 8.0;
}

double ddr_emission_frequency(const DdrConfig& cfg) {
  cfg.validate();
  return cfg.clock_rate_mhz * cfg.harmonic;
}

DdrConfig reclock(DdrConfig cfg, double clock_rate_mhz) {
  cfg.clock_rate_mhz = clock_rate_mhz;
  cfg.validate();
  return cfg;
}

}  // namespace airfi::channel
