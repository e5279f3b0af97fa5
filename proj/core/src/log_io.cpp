#include "attachsim/log_io.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attachsim/errors.hpp"

namespace attachsim {

using nlohmann::json;

std::string format_message(const SignalingMessage& m) {
  // Fixed-point from integer microseconds; avoids any rounding on output.
  const std::int64_t us = m.time.us();
  const char* sign = us < 0 ? "-" : "";
  const std::int64_t a = us < 0 ? -us : us;
  return fmt::format(R"({{"time":{}{}.{:03d},"layer":"{}","direction":"{}","device_id":{},"message":"{}"}})",
                     sign, a / 1000, a % 1000, SignalingMessage::kLayer, to_string(m.direction),
                     json(m.device_id).dump(), to_string(m.message));
}

void write_messages(std::ostream& os, std::span<const SignalingMessage> msgs) {
  for (const auto& m : msgs) os << format_message(m) << '\n';
}

void write_records(std::ostream& os, std::span<const AttachRecord> records) {
  for (const auto& r : records) write_messages(os, r.messages);
}

namespace {

SignalingMessage parse_line(const std::string& line, std::size_t no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(no, "expected a JSON object");
  static constexpr std::string_view keys[] = {"time", "layer", "direction", "device_id", "message"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(std::begin(keys), std::end(keys), k) == std::end(keys)) {
      throw ParseError(no, "unknown key '" + k + "'");
    }
  }
  for (auto k : keys) {
    if (!j.contains(std::string(k))) throw ParseError(no, "missing key '" + std::string(k) + "'");
  }
  const auto& t = j["time"];
  if (!t.is_number()) throw ParseError(no, "time is not a number");
  const double ms = t.get<double>();
  if (!(ms >= 0.0)) throw ParseError(no, "time must be non-negative");
  for (auto k : {"layer", "direction", "device_id", "message"}) {
    if (!j[k].is_string()) throw ParseError(no, std::string(k) + " is not a string");
  }
  if (j["layer"].get<std::string>() != SignalingMessage::kLayer) {
    throw ParseError(no, "unsupported layer '" + j["layer"].get<std::string>() + "'");
  }
  const auto dir = parse_direction(j["direction"].get<std::string>());
  if (!dir) throw ParseError(no, "unknown direction '" + j["direction"].get<std::string>() + "'");
  const auto step = parse_step(j["message"].get<std::string>());
  if (!step) throw ParseError(no, "unknown message '" + j["message"].get<std::string>() + "'");
  SignalingMessage m;
  m.time = SimTime::from_us(std::llround(ms * 1000.0));
  m.direction = *dir;
  m.device_id = j["device_id"].get<std::string>();
  m.message = *step;
  return m;
}

}  // namespace

std::vector<SignalingMessage> read_messages(std::istream& is) {
  std::vector<SignalingMessage> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_line(line, no));
  }
  return out;
}

std::vector<SignalingMessage> read_messages(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_messages(in);
}

std::vector<AttachRecord> group_records(std::span<const SignalingMessage> msgs) {
  std::vector<AttachRecord> out;
  std::map<std::string, std::size_t, std::less<>> open;  // device -> index into out
  std::map<std::string, int, std::less<>> seq;
  for (const auto& m : msgs) {
    auto it = open.find(m.device_id);
    if (m.message == AttachStep::AttachRequest || it == open.end()) {
      AttachRecord r;
      r.device_id = m.device_id;
      r.attach_seq = seq[m.device_id]++;
      out.push_back(std::move(r));
      open[m.device_id] = out.size() - 1;
      it = open.find(m.device_id);
    }
    out[it->second].messages.push_back(m);
  }
  for (auto& r : out) {
    r.outcome = !r.messages.empty() && r.messages.back().message == AttachStep::AttachComplete
                    ? AttachOutcome::Completed
                    : AttachOutcome::AuthTimeout;
  }
  return out;
}

}  // namespace attachsim
