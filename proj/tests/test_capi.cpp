// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include <gtest/gtest.h>

#include <string>

#include "dacsfl/dacsfl.h"

namespace {

std::string fixture(const std::string& name) { return std::string(DACSFL_FIXTURES) + "/" + name; }

dacsfl_system* load(const std::string& name) {
  dacsfl_system* s = nullptr;
  EXPECT_EQ(dacsfl_system_load(fixture(name).c_str(), &s), DACSFL_OK) << dacsfl_last_error();
  return s;
}

}  // namespace

TEST(CApi, LoadReportsDimensions) {
  dacsfl_system* s = load("example52.dacs");
  int l = 0, n = 0, m = 0;
  ASSERT_EQ(dacsfl_system_dims(s, &l, &n, &m), DACSFL_OK);
  EXPECT_EQ(l, 7);
  EXPECT_EQ(n, 7);
  EXPECT_EQ(m, 2);
  EXPECT_NE(std::string(dacsfl_system_text(s)).find("[states]"), std::string::npos);
  dacsfl_system_free(s);
}

TEST(CApi, ErrorsCarryCodeAndMessage) {
  dacsfl_system* s = nullptr;
  EXPECT_EQ(dacsfl_system_load("/nonexistent/file.dacs", &s), DACSFL_ERR_IO);
  EXPECT_EQ(s, nullptr);
  EXPECT_NE(std::string(dacsfl_last_error()), "");
  EXPECT_EQ(dacsfl_system_parse("[states]\nx\n[E]\n1\n[F]\ny\n[G]\n1\n[point]\nx=0\n", &s),
            DACSFL_ERR_UNKNOWN_IDENTIFIER);
  EXPECT_EQ(dacsfl_system_parse(nullptr, &s), DACSFL_ERR_ARGUMENT);
  EXPECT_STREQ(dacsfl_status_name(DACSFL_ERR_IO), "i/o error");
}

TEST(CApi, SettingsValidated) {
  dacsfl_settings* st = nullptr;
  ASSERT_EQ(dacsfl_settings_create(&st), DACSFL_OK);
  EXPECT_EQ(dacsfl_settings_set_radius(st, -1.0), DACSFL_ERR_ARGUMENT);
  EXPECT_EQ(dacsfl_settings_set_step(st, 0.0), DACSFL_ERR_ARGUMENT);
  EXPECT_EQ(dacsfl_settings_set_seed(st, 7), DACSFL_OK);
  EXPECT_STREQ(dacsfl_last_error(), "");
  dacsfl_settings_free(st);
}

TEST(CApi, LinearizeExternal) {
  dacsfl_system* s = load("example51.dacs");
  dacsfl_report* r = nullptr;
  ASSERT_EQ(dacsfl_linearize(s, nullptr, DACSFL_MODE_EXTERNAL, nullptr, &r), DACSFL_OK) << dacsfl_last_error();
  EXPECT_EQ(dacsfl_report_verdict(r), DACSFL_PASS);
  EXPECT_STREQ(dacsfl_report_summary(r), "externally feedback linearizable, rho=(1), rho_bar=(2)");
  EXPECT_EQ(std::string(dacsfl_report_document(r)).front(), '{');
  dacsfl_report_free(r);
  dacsfl_system_free(s);
}

TEST(CApi, LinearizeRejectsBadMode) {
  dacsfl_system* s = load("example51.dacs");
  dacsfl_report* r = nullptr;
  EXPECT_EQ(dacsfl_linearize(s, nullptr, static_cast<dacsfl_mode>(9), nullptr, &r), DACSFL_ERR_ARGUMENT);
  dacsfl_system_free(s);
}

TEST(CApi, SimulateSignalCountChecked) {
  dacsfl_system* s = load("example51.dacs");
  dacsfl_settings* st = nullptr;
  ASSERT_EQ(dacsfl_settings_create(&st), DACSFL_OK);
  ASSERT_EQ(dacsfl_settings_set_step(st, 1e-3), DACSFL_OK);
  const char* u[] = {"sin(t)", "t"};
  dacsfl_report* r = nullptr;
  EXPECT_EQ(dacsfl_simulate(s, st, u, 2, nullptr, 0, &r), DACSFL_ERR_ARGUMENT);
  ASSERT_EQ(dacsfl_simulate(s, st, u, 1, nullptr, 0, &r), DACSFL_OK) << dacsfl_last_error();
  EXPECT_EQ(dacsfl_report_verdict(r), DACSFL_PASS);
  EXPECT_EQ(std::string(dacsfl_report_document(r)).substr(0, 9), "t,x1,x2,x");
  dacsfl_report_free(r);
  dacsfl_settings_free(st);
  dacsfl_system_free(s);
}

TEST(CApi, VerifyEquivalenceWithWitness) {
  dacsfl_system* a = load("example51.dacs");
  dacsfl_system* b = load("example51_target.dacs");
  dacsfl_report* r = nullptr;
  ASSERT_EQ(dacsfl_verify_equivalence(a, b, fixture("example51_witness.txt").c_str(), nullptr, &r), DACSFL_OK)
      << dacsfl_last_error();
  EXPECT_EQ(dacsfl_report_verdict(r), DACSFL_PASS);
  dacsfl_report_free(r);
  dacsfl_system_free(b);
  dacsfl_system_free(a);
}

TEST(CApi, NullHandlesAreSafe) {
  dacsfl_report_free(nullptr);
  dacsfl_system_free(nullptr);
  dacsfl_settings_free(nullptr);
  EXPECT_EQ(dacsfl_report_verdict(nullptr), DACSFL_UNDECIDED);
  EXPECT_STREQ(dacsfl_report_text(nullptr), "");
  dacsfl_report* r = nullptr;
  EXPECT_EQ(dacsfl_check(nullptr, nullptr, &r), DACSFL_ERR_ARGUMENT);
}
