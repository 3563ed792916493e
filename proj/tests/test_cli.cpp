#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "gachaos_cli_test";

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const auto log = kDir / "stdout.txt";
  const std::string cmd = std::string(GACHAOS_CLI) + " " + args + " > " + log.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream s;
  s << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kSmall =
    "[fitness]\nkind = gaussian_bump\nf_lo = 1\nf_hi = 2\nwidth = 1\n"
    "[model]\ndim = 1\nsigma = 0.25\ntau = 0.1\nT = 1\n"
    "[experiment]\nn_list = 32, 64\nreplicas = 3\ngrid_cells = 512\ntrace_cells = 256\nseed = 3\n";

struct Fixture {
  Fixture() {
    fs::remove_all(kDir);
    fs::create_directories(kDir);
    put(kDir / "small.ini", kSmall);
    put(kDir / "a.msr", "0.5 0\n0.5 1\n");
    put(kDir / "b.msr", "1 0\n");
  }
  ~Fixture() { fs::remove_all(kDir); }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "usage errors exit 64") {
  CHECK(run("").code == 64);
  CHECK(run("frobnicate").code == 64);
}

TEST_CASE_FIXTURE(Fixture, "bad config exits 1") {
  put(kDir / "bad.ini", "[fitness]\nkind = constant\n[model]\ndim = 1\ntau = 1.5\nT = 1\n[experiment]\nn_list = 8\n");
  CHECK(run("--config " + (kDir / "bad.ini").string() + " --out " + (kDir / "o").string() + " rate-n").code == 1);
  CHECK(run("dist " + (kDir / "a.msr").string() + " " + (kDir / "nope.msr").string()).code != 0);
}

TEST_CASE_FIXTURE(Fixture, "dist prints the cost") {
  const auto r = run("dist " + (kDir / "a.msr").string() + " " + (kDir / "b.msr").string());
  CHECK(r.code == 0);
  CHECK(r.out == "0.5\n");
  const auto t = run("dist --cost indicator " + (kDir / "a.msr").string() + " " + (kDir / "b.msr").string() +
                     " --plan " + (kDir / "plan.csv").string());
  CHECK(t.out == "0.5\n");
  CHECK(slurp(kDir / "plan.csv").rfind("i,j,mass\n", 0) == 0);
}

TEST_CASE_FIXTURE(Fixture, "rate-n reruns are identical") {
  const std::string base = "--config " + (kDir / "small.ini").string() + " --out ";
  REQUIRE(run(base + (kDir / "r1").string() + " --threads 1 rate-n").code == 0);
  REQUIRE(run(base + (kDir / "r2").string() + " --threads 2 rate-n").code == 0);
  const auto a = slurp(kDir / "r1" / "rate_n.csv");
  CHECK(a.rfind("param,mean_err,stderr,epsilon,slope_running\n", 0) == 0);
  CHECK(a == slurp(kDir / "r2" / "rate_n.csv"));
  CHECK(fs::exists(kDir / "r1" / "manifest.json"));
  CHECK(fs::exists(kDir / "r1" / "rate_n.svg"));
}

TEST_CASE_FIXTURE(Fixture, "simulate and suite") {
  const std::string out = (kDir / "sim").string();
  REQUIRE(run("--config " + (kDir / "small.ini").string() + " --out " + out + " simulate").code == 0);
  for (const char* f : {"ga_summary.csv", "trace.csv", "summary.json", "manifest.json", "grid_final.csv"})
    CHECK(fs::exists(fs::path(out) / f));
  CHECK(run("--out " + (kDir / "suite").string() + " suite --cases 50").code == 0);
}
