// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "kvswarm/error.hpp"
#include "kvswarm/formats.hpp"
#include "kvswarm/workload.hpp"

namespace kvswarm {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(Trace, RoundTrip) {
  PlantedSpec spec;
  spec.n_entries = 64;
  spec.n_groups = 4;
  spec.steps = 20;
  spec.decode_steps = 3;
  spec.new_per_step = 2;
  const auto pt = generate(spec);
  const auto text = write_trace(pt.trace, "abc");
  EXPECT_NE(text.find("# kvswarm"), std::string::npos);
  const auto back = parse_trace(text);
  EXPECT_EQ(write_trace(back, "abc"), text);
  EXPECT_EQ(back.prefill_steps(), 20u);
}

TEST(Trace, ErrorsCarryLineNumbers) {
  try {
    parse_trace("kvtrace 1 4\nstep 0 new=- act=0,1\nstep 1 new=- act=0,x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { parse_trace("nottrace 1 4\n"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { parse_trace("kvtrace 1 2\nstep 0 new=- act=5\n"); }), ErrorCode::kParse);
}

TEST(Groups, RoundTrip) {
  const std::vector<std::vector<EntryId>> groups{{0, 1, 2}, {3}, {}};
  EXPECT_EQ(parse_groups(write_groups(groups, "h")), groups);
}

TEST(Clusters, RoundTripKeepsInsertionOrder) {
  ClusterSet cs(0.25, 5);
  const auto a = cs.add_cluster(3);
  cs.add_member(a, 0, 0.1);
  cs.add_member(a, 4, 0.2);
  const auto b = cs.add_cluster(1);
  cs.add_member(b, 0, 0.05);
  const auto text = write_clusters(cs, "h");
  const auto back = parse_clusters(text);
  EXPECT_EQ(back.tau(), 0.25);
  EXPECT_EQ(back.at(0).members, (std::vector<EntryId>{3, 0, 4}));
  EXPECT_EQ(back.replicas_of(0).size(), 2u);
  EXPECT_EQ(write_clusters(back, "h"), text);
}

TEST(Clusters, RejectsDuplicateMembers) {
  EXPECT_EQ(code_of([] { parse_clusters("kvclust 1 0.5 3 1\ncluster 0 medoid=0 members=0,1,1\n"); }),
            ErrorCode::kParse);
}

TEST(Placement, WritesReplicas) {
  ClusterSet cs(0.5, 3);
  const auto a = cs.add_cluster(0);
  cs.add_member(a, 1, 0.1);
  const auto b = cs.add_cluster(2);
  cs.add_member(b, 0, 0.1);
  const auto text = write_placement(place_clusters(cs, 2), "h");
  EXPECT_NE(text.find("entry 0 replicas=0:0,1:1"), std::string::npos) << text;
}

TEST(Doubles, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Files, MissingFileIsAnIoError) {
  EXPECT_EQ(code_of([] { read_file("/nonexistent/kvswarm/file"); }), ErrorCode::kIo);
}

}  // namespace
}  // namespace kvswarm
