#include "airfi/codec.hpp"

#include <algorithm>
#include <stdexcept>

namespace airfi::codec {
namespace {

constexpr std::array<std::uint8_t, 256> make_crc_table() {
  std::array<std::uint8_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    auto reg = static_cast<std::uint8_t>(i);
    for (int b = 0; b < 8; ++b) {
      reg = (reg & 0x80u) ? static_cast<std::uint8_t>((reg << 1) ^ kCrcPolynomial)
                          : static_cast<std::uint8_t>(reg << 1);
    }
    table[i] = reg;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

std::uint8_t read_byte(std::span<const std::uint8_t> bits, std::size_t first) {
  std::uint8_t value = 0;
  for (std::size_t i = 0; i < 8; ++i) value = static_cast<std::uint8_t>((value << 1) | (bits[first + i] != 0 ? 1 : 0));
  return value;
}

}  // namespace

std::string_view to_string(DecodeError error) {
  switch (error) {
    case DecodeError::kBadPreamble:
      return "BadPreamble";
    case DecodeError::kCrcMismatch:
      return "CrcMismatch";
    case DecodeError::kTruncated:
      return "Truncated";
  }
  return "Unknown";
}

std::uint8_t crc8(std::span<const std::uint8_t> data) {
  std::uint8_t reg = 0x00;
  for (std::uint8_t byte : data) reg = kCrcTable[reg ^ byte];
  return reg;
}

std::array<std::uint8_t, 4> payload_bytes(std::uint32_t payload) {
  return {static_cast<std::uint8_t>(payload >> 24), static_cast<std::uint8_t>(payload >> 16),
          static_cast<std::uint8_t>(payload >> 8), static_cast<std::uint8_t>(payload)};
}

void append_byte_bits(std::uint8_t byte, Bits& out) {
  for (int b = 7; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((byte >> b) & 1u));
}

Frame Frame::from_bits(std::span<const std::uint8_t> bits) {
  if (bits.size() != kFrameBits) throw std::invalid_argument("frame must hold exactly 48 bits");
  Storage storage{};
  for (std::size_t i = 0; i < kFrameBits; ++i) {
    if (bits[i] > 1) throw std::invalid_argument("frame bits must be 0 or 1");
    storage[i] = bits[i];
  }
  if (read_byte(storage, 0) != kPreambleByte) throw std::invalid_argument("frame must open with the 0xAA preamble");
  return Frame(storage);
}

Frame encode_packet(Packet packet) {
  const auto bytes = payload_bytes(packet.payload);
  Bits bits;
  bits.reserve(kFrameBits);
  append_byte_bits(kPreambleByte, bits);
  for (std::uint8_t b : bytes) append_byte_bits(b, bits);
  append_byte_bits(crc8(bytes), bits);
  Frame::Storage storage{};
  std::copy(bits.begin(), bits.end(), storage.begin());
  return Frame(storage);
}

DecodeResult decode_frame(std::span<const std::uint8_t> bits) {
  if (bits.size() < kFrameBits) return DecodeError::kTruncated;
  if (read_byte(bits, 0) != kPreambleByte) return DecodeError::kBadPreamble;
  std::array<std::uint8_t, 4> bytes{};
  for (std::size_t i = 0; i < 4; ++i) bytes[i] = read_byte(bits, kPreambleBits + 8 * i);
  if (crc8(bytes) != read_byte(bits, kPreambleBits + kPayloadBits)) return DecodeError::kCrcMismatch;
  const std::uint32_t payload = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                                (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
  return Packet{payload};
}

std::vector<Packet> segment_message(std::span<const std::uint8_t> data) {
  std::vector<Packet> packets;
  packets.reserve((data.size() + 3) / 4);
  for (std::size_t i = 0; i < data.size(); i += 4) {
    std::uint32_t payload = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const std::uint8_t byte = i + j < data.size() ? data[i + j] : 0;
      payload = (payload << 8) | byte;
    }
    packets.push_back(Packet{payload});
  }
  return packets;
}

std::vector<std::uint8_t> reassemble_message(std::span<const Packet> packets, std::size_t length) {
  std::vector<std::uint8_t> data;
  data.reserve(packets.size() * 4);
  for (const Packet& p : packets) {
    const auto bytes = payload_bytes(p.payload);
    data.insert(data.end(), bytes.begin(), bytes.end());
  }
  if (length > data.size()) throw std::invalid_argument("message length exceeds packet capacity");
  data.resize(length);
  return data;
}

}  // namespace airfi::codec
