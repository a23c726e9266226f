#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "fltorrent/fltorrent.h"

namespace fs = std::filesystem;

namespace {

flt_config* small_config() {
  flt_config* c = nullptr;
  REQUIRE(flt_config_parse(R"({"n": 20, "m": 4, "K": 20, "seed": 5})", &c) == FLT_OK);
  return c;
}

}  // namespace

TEST_CASE("config handles") {
  flt_config* c = nullptr;
  CHECK(flt_config_default(&c) == FLT_OK);
  CHECK(flt_config_set(c, "beta", "0.25") == FLT_OK);
  CHECK(flt_config_set(c, "scheduler", "random_fifo") == FLT_OK);
  CHECK(flt_config_set(c, "nonsense", "1") == FLT_ERR_CONFIG);
  CHECK(std::strlen(flt_last_error()) > 0);
  char* json = nullptr;
  REQUIRE(flt_config_json(c, &json) == FLT_OK);
  CHECK(std::string(json).find("\"beta\":0.25") != std::string::npos);
  flt_config* back = nullptr;
  CHECK(flt_config_parse(json, &back) == FLT_OK);
  flt_string_free(json);
  flt_config_free(back);
  flt_config_free(c);

  CHECK(flt_config_parse("{", &c) == FLT_ERR_CONFIG);
  // parsing accepts it; the run rejects the infeasible overlay
  REQUIRE(flt_config_parse(R"({"n": 5, "m": 9})", &c) == FLT_OK);
  flt_report* r = nullptr;
  CHECK(flt_run(c, "none", 0, &r) == FLT_ERR_CONFIG);
  flt_config_free(c);
  CHECK(flt_config_parse(nullptr, &c) == FLT_ERR_ARG);
  CHECK(flt_config_load("/no/such/file.json", &c) == FLT_ERR_IO);
  CHECK(flt_version()[0] != '\0');
}

TEST_CASE("run, read metrics, write and verify the log") {
  flt_config* c = small_config();
  flt_report* r = nullptr;
  REQUIRE(flt_run(c, "all", 1, &r) == FLT_OK);
  CHECK(flt_report_count(r) == 1);
  double v = 0;
  CHECK(flt_report_get(r, 0, "warmup_slots", &v) == FLT_OK);
  CHECK(v > 0);
  CHECK(flt_report_get(r, 0, "audit_accept", &v) == FLT_OK);
  CHECK(v == 1.0);
  CHECK(flt_report_get(r, 0, "asr_max:sequential", &v) == FLT_OK);
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);
  CHECK(flt_report_get(r, 0, "asr_max_warmup:clustering", &v) == FLT_OK);
  CHECK(flt_report_get(r, 0, "bogus", &v) == FLT_ERR_ARG);
  CHECK(flt_report_get(r, 0, "asr_max:bogus", &v) == FLT_ERR_ARG);
  CHECK(flt_report_get(r, 3, "seed", &v) == FLT_ERR_ARG);
  CHECK(std::string(flt_report_audit_reason(r, 0)).empty());

  const auto log = (fs::temp_directory_path() / "fltorrent_capi_log.txt").string();
  REQUIRE(flt_report_write_log(r, log.c_str()) == FLT_OK);
  char commit[65];
  REQUIRE(flt_commit_seed(5, commit) == FLT_OK);
  CHECK(std::strlen(commit) == 64);
  CHECK(flt_verify_log(log.c_str(), c, commit, 5) == FLT_OK);
  CHECK(flt_verify_log(log.c_str(), c, "", 5) == FLT_OK);
  CHECK(flt_verify_log(log.c_str(), c, commit, 6) == FLT_ERR_AUDIT);
  CHECK(std::string(flt_last_error()).rfind("hash", 0) == 0);

  // drop one line from the body: accepted or rejected, never a crash
  {
    std::ofstream f(log, std::ios::app);
    f << "0,0,0,0,1,scheduled\n";
  }
  CHECK(flt_verify_log(log.c_str(), c, commit, 5) == FLT_ERR_AUDIT);
  std::remove(log.c_str());
  CHECK(flt_verify_log("/no/such/log", c, commit, 5) == FLT_ERR_IO);

  CHECK(flt_report_write_log(r, "/proc/nope/log.txt") == FLT_ERR_IO);
  flt_report_free(r);
  flt_config_free(c);
}

TEST_CASE("sweeps keep no per-run traces") {
  flt_config* c = small_config();
  flt_report* r = nullptr;
  REQUIRE(flt_sweep(c, "beta", "0.1,0.2", 2, "none", 0, 1, &r) == FLT_OK);
  CHECK(flt_report_count(r) == 4);
  double s = 0;
  CHECK(flt_report_get(r, 3, "seed", &s) == FLT_OK);
  CHECK(s == 6.0);
  CHECK(flt_report_write_log(r, "/tmp/x") == FLT_ERR_ARG);
  flt_report_free(r);
  CHECK(flt_sweep(c, "beta", "0.1", 0, "none", 0, 1, &r) == FLT_ERR_ARG);
  CHECK(flt_sweep(c, "beta", "abc", 1, "none", 0, 1, &r) == FLT_ERR_CONFIG);
  CHECK(flt_run(c, "telepathy", 0, &r) == FLT_ERR_ARG);
  CHECK(flt_run(nullptr, "all", 0, &r) == FLT_ERR_ARG);
  flt_config_free(c);
}
