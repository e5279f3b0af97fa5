#include <gtest/gtest.h>

#include <sstream>

#include "attachsim/errors.hpp"
#include "attachsim/log_io.hpp"

using namespace attachsim;

namespace {

SignalingMessage msg(std::int64_t us, AttachStep s, std::string dev = "ue-1") {
  return {SimTime::from_us(us), direction_of(s), std::move(dev), s};
}

}  // namespace

TEST(LogIo, ExactLineFormat) {
  EXPECT_EQ(format_message(msg(1'001'500, AttachStep::IdentityRequest)),
            R"({"time":1001.500,"layer":"NAS","direction":"Downlink","device_id":"ue-1","message":"IdentityRequest"})");
  EXPECT_EQ(format_message(msg(7, AttachStep::AttachRequest, "a\"b")),
            R"({"time":0.007,"layer":"NAS","direction":"Uplink","device_id":"a\"b","message":"AttachRequest"})");
}

TEST(LogIo, Roundtrip) {
  std::vector<SignalingMessage> in;
  for (int i = 0; i < 11; ++i) in.push_back(msg(123456 + i * 1001, static_cast<AttachStep>(i)));
  std::stringstream ss;
  write_messages(ss, in);
  const auto out = read_messages(ss);
  EXPECT_EQ(out, in);
}

TEST(LogIo, ParseErrorNamesLine) {
  std::stringstream ss;
  for (int i = 0; i < 6; ++i) ss << format_message(msg(i * 1000, static_cast<AttachStep>(i))) << '\n';
  ss << R"({"time":7.0,"layer":"NAS","direction":"Uplink","device_id":"ue-1")" << '\n';
  try {
    read_messages(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(LogIo, StrictFields) {
  const auto bad = [](const std::string& line) {
    std::stringstream ss(line);
    EXPECT_THROW(read_messages(ss), ParseError) << line;
  };
  bad(R"({"time":1,"layer":"NAS","direction":"Uplink","device_id":"a","message":"AttachRequest","x":1})");
  bad(R"({"time":1,"layer":"RRC","direction":"Uplink","device_id":"a","message":"AttachRequest"})");
  bad(R"({"time":-1,"layer":"NAS","direction":"Uplink","device_id":"a","message":"AttachRequest"})");
  bad(R"({"time":1,"layer":"NAS","direction":"Sideways","device_id":"a","message":"AttachRequest"})");
  bad(R"({"time":1,"layer":"NAS","direction":"Uplink","device_id":"a","message":"Detach"})");
  bad(R"({"time":"1","layer":"NAS","direction":"Uplink","device_id":"a","message":"AttachRequest"})");
  bad("[1,2,3]");
}

TEST(LogIo, BlankLinesSkipped) {
  std::stringstream ss("\n" + format_message(msg(1, AttachStep::AttachRequest)) + "\n\n");
  EXPECT_EQ(read_messages(ss).size(), 1u);
}

TEST(LogIo, MissingFile) { EXPECT_THROW(read_messages(std::filesystem::path("/no/such/log.jsonl")), IoError); }

TEST(GroupRecords, SplitsPerDeviceAtAttachRequest) {
  std::vector<SignalingMessage> m = {
      msg(0, AttachStep::AttachRequest, "a"),   msg(1, AttachStep::AttachRequest, "b"),
      msg(2, AttachStep::IdentityRequest, "a"), msg(3, AttachStep::AttachComplete, "b"),
      msg(9, AttachStep::AttachRequest, "a"),   msg(10, AttachStep::AttachComplete, "a"),
  };
  const auto recs = group_records(m);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].device_id, "a");
  EXPECT_EQ(recs[0].messages.size(), 2u);
  EXPECT_EQ(recs[0].outcome, AttachOutcome::AuthTimeout);
  EXPECT_EQ(recs[1].device_id, "b");
  EXPECT_EQ(recs[1].outcome, AttachOutcome::Completed);
  EXPECT_EQ(recs[2].attach_seq, 1);
  EXPECT_EQ(recs[2].outcome, AttachOutcome::Completed);
}
