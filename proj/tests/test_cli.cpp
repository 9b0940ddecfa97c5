#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct Outcome {
  int status = -1;
  std::string output;
};

// Runs the CLI with stderr folded into stdout.
Outcome cli(const std::string& args) {
  const std::string command = std::string(LEDGERLAB_CLI) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ledgerlab-cli-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("run writes json and csv per seed") {
  const auto dir = fresh_dir("run");
  const auto r = cli("run --config nano-baseline --seeds 1..2 --horizon 10 --out " + dir.string());
  CHECK(r.status == 0);
  CHECK(std::filesystem::exists(dir / "nano-baseline-seed1.json"));
  CHECK(std::filesystem::exists(dir / "nano-baseline-seed2.csv"));
}

TEST_CASE("injected conservation fault exits 2 and names the invariant") {
  const auto r = cli("run --config nano-baseline --seeds 1 --horizon 10 --override fault.breach_conservation=true");
  CHECK(r.status == 2);
  CHECK(contains(r.output, "balance conservation"));
}

TEST_CASE("usage and config errors exit 1") {
  const auto none = cli("run --config nano-baseline --seeds 0");
  CHECK(none.status == 1);
  CHECK(contains(none.output, "no seeds"));

  const auto unknown = cli("validate --config nano-baseline --override net.nodez=3");
  CHECK(unknown.status == 1);
  CHECK(contains(unknown.output, "net.nodez"));

  const auto missing = cli("validate --config /nonexistent/cfg.json");
  CHECK(missing.status == 1);
  CHECK(contains(missing.output, "not found"));

  CHECK(cli("run --seeds 1").status == 1);
  CHECK(cli("frobnicate").status == 1);
}

TEST_CASE("validate and presets succeed for bundled scenarios") {
  const auto list = cli("presets");
  CHECK(list.status == 0);
  for (const char* name : {"bitcoin-baseline", "ethereum-baseline", "pos-baseline", "nano-baseline", "nano-scaling",
                           "fork-stress", "partition-stress"}) {
    CAPTURE(name);
    CHECK(contains(list.output, name));
    CHECK(cli(std::string("validate --config ") + name).status == 0);
  }
}

TEST_CASE("compare fills missing cells and rejects empty directories") {
  const auto dir = fresh_dir("compare");
  REQUIRE(cli("run --config nano-baseline --seeds 1 --horizon 10 --out " + dir.string()).status == 0);
  const auto table = cli("compare " + dir.string());
  CHECK(table.status == 0);
  CHECK(contains(table.output, "n/a"));
  CHECK(contains(table.output, "single paradigm"));

  const auto empty = fresh_dir("empty");
  std::filesystem::create_directories(empty);
  const auto r = cli("compare " + empty.string());
  CHECK(r.status == 1);
}

TEST_CASE("inspect reads back a written report") {
  const auto dir = fresh_dir("inspect");
  REQUIRE(cli("run --config nano-baseline --seeds 3 --horizon 10 --out " + dir.string()).status == 0);
  const auto r = cli("inspect --report " + (dir / "nano-baseline-seed3.json").string());
  CHECK(r.status == 0);
  CHECK(contains(r.output, "settled_tps"));
}
