#pragma once

// AIR-FI frame layout, MSB-first throughout:
//
//   bits  0..7   preamble 0xAA (10101010), also the receiver's enable sequence
//   bits  8..39  32-bit payload
//   bits 40..47  CRC-8 over the four payload bytes
//
// CRC-8 parameters are fixed protocol constants: polynomial 0x07, init 0x00,
// no input/output reflection, no final XOR (CRC-8/ATM, a.k.a. SMBus PEC).

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace airfi::codec {

/// One binary symbol per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kPreambleByte = 0xAA;
inline constexpr std::uint8_t kCrcPolynomial = 0x07;
inline constexpr std::size_t kPreambleBits = 8;
inline constexpr std::size_t kPayloadBits = 32;
inline constexpr std::size_t kCrcBits = 8;
inline constexpr std::size_t kFrameBits = kPreambleBits + kPayloadBits + kCrcBits;

struct Packet {
  std::uint32_t payload = 0;

  friend bool operator==(const Packet&, const Packet&) = default;
};

class Frame {
 public:
  using Storage = std::array<std::uint8_t, kFrameBits>;

  /// Throws std::invalid_argument unless bits holds exactly 48 symbols opening with 0xAA.
  static Frame from_bits(std::span<const std::uint8_t> bits);

  const Storage& bits() const { return bits_; }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  static constexpr std::size_t size() { return kFrameBits; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  friend Frame encode_packet(Packet packet);
  explicit Frame(const Storage& bits) : bits_(bits) {}
  Storage bits_{};
};

enum class DecodeError { kBadPreamble, kCrcMismatch, kTruncated };

std::string_view to_string(DecodeError error);

using DecodeResult = std::variant<Packet, DecodeError>;

std::uint8_t crc8(std::span<const std::uint8_t> data);

/// Payload bytes in transmission order (big-endian).
std::array<std::uint8_t, 4> payload_bytes(std::uint32_t payload);

Frame encode_packet(Packet packet);

/// Decodes the first 48 symbols; any nonzero symbol counts as 1.
DecodeResult decode_frame(std::span<const std::uint8_t> bits);

/// Splits data into 4-byte payloads, zero-padding the last one.
std::vector<Packet> segment_message(std::span<const std::uint8_t> data);

/// Inverse of segment_message when the original length is known.
std::vector<std::uint8_t> reassemble_message(std::span<const Packet> packets, std::size_t length);

/// MSB-first bits of one byte appended to out.
void append_byte_bits(std::uint8_t byte, Bits& out);

}  // namespace airfi::codec
