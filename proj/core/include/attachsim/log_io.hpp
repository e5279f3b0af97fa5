#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "attachsim/attach_protocol.hpp"

namespace attachsim {

// One JSON object per line, keys in the order time, layer, direction,
// device_id, message. Time is milliseconds with three decimals.
std::string format_message(const SignalingMessage& m);
void write_messages(std::ostream& os, std::span<const SignalingMessage> msgs);
void write_records(std::ostream& os, std::span<const AttachRecord> records);

// Strict reader: any malformed line raises ParseError with its 1-based number.
std::vector<SignalingMessage> read_messages(std::istream& is);
std::vector<SignalingMessage> read_messages(const std::filesystem::path& path);

// Splits a message stream into per-device attach records. A record opens at
// each AttachRequest; a record not ending in AttachComplete is marked
// AuthTimeout since the log alone cannot tell a timeout from a reject.
// Records keep first-appearance order of devices, then time order.
std::vector<AttachRecord> group_records(std::span<const SignalingMessage> msgs);

}  // namespace attachsim
