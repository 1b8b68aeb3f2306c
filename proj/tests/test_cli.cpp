#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;  // stdout and stderr interleaved
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(OSCAR_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("oscar-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("keygen, cert-issue, inspect") {
  TempDir t;
  REQUIRE(cli("keygen --out " + (t / "ca") + " --id authority").status == 0);
  REQUIRE(cli("keygen --out " + (t / "prod") + " --id prod-01").status == 0);
  CHECK(fs::exists(t / "ca.key"));
  CHECK(fs::exists(t / "prod.pub"));
  const auto issued = cli("cert-issue --ca-key " + (t / "ca.key") + " --subject-key " + (t / "prod.pub") +
                          " --capability temperature-sensor --capability humidity-sensor --location lab-4"
                          " --not-before 100 --not-after 200 --out " + (t / "prod.cert"));
  REQUIRE(issued.status == 0);
  const auto shown = cli("inspect " + (t / "prod.cert"));
  CHECK(shown.status == 0);
  CHECK(shown.out.find("prod-01") != std::string::npos);
  CHECK(shown.out.find("temperature-sensor") != std::string::npos);
  CHECK(shown.out.find("humidity-sensor") != std::string::npos);
  CHECK(shown.out.find("lab-4") != std::string::npos);
  CHECK(shown.out.find("100") != std::string::npos);
  CHECK(cli("inspect " + (t / "prod.pub")).out.find("prod-01") != std::string::npos);

  // Inverted validity.
  CHECK(cli("cert-issue --ca-key " + (t / "ca.key") + " --subject-key " + (t / "prod.pub") +
            " --capability c --not-before 200 --not-after 100 --out " + (t / "bad.cert"))
            .status != 0);
}

TEST_CASE("secret-issue and inspect") {
  TempDir t;
  REQUIRE(cli("keygen --out " + (t / "ca")).status == 0);
  REQUIRE(cli("secret-issue --ca-key " + (t / "ca.key") + " --key-id 7 --scope /temp --scope /hum --epoch 3"
              " --secret-hex 000102030405060708090a0b0c0d0e0f --out " + (t / "s.obj"))
              .status == 0);
  const auto shown = cli("inspect " + (t / "s.obj"));
  CHECK(shown.out.find("/hum") != std::string::npos);
  CHECK(shown.out.find("epoch") != std::string::npos);
  CHECK(cli("secret-issue --ca-key " + (t / "ca.key") + " --key-id 7 --scope /t --secret-hex 00 --out " + (t / "x"))
            .status != 0);
}

TEST_CASE("keys are fresh unless seeded") {
  TempDir t;
  REQUIRE(cli("keygen --out " + (t / "a")).status == 0);
  REQUIRE(cli("keygen --out " + (t / "b")).status == 0);
  CHECK(slurp(t / "a.key") != slurp(t / "b.key"));
  REQUIRE(cli("keygen --seed 42 --out " + (t / "c")).status == 0);
  REQUIRE(cli("keygen --seed 42 --out " + (t / "d")).status == 0);
  CHECK(slurp(t / "c.key") == slurp(t / "d.key"));
  CHECK(slurp(t / "c.key").size() > 32);
}

TEST_CASE("exit codes") {
  CHECK(cli("").status == 1);
  CHECK(cli("no-such-command").status == 1);
  CHECK(cli("keygen --out /proc/oscar-no-such-dir/k").status == 3);
  TempDir t;
  {
    std::ofstream(t / "garbage.bin") << "not an object";
  }
  CHECK(cli("inspect " + (t / "garbage.bin")).status == 5);
  {
    std::ofstream(t / "incomplete.ini") << "[scenario]\npreset = gen16\nmode = oscar\n";
  }
  const auto r = cli("sim-run --config " + (t / "incomplete.ini"));
  CHECK(r.status == 2);
  CHECK(r.out.find("scenario.n_clients") != std::string::npos);
}

TEST_CASE("demo over loopback") {
  const auto ok = cli("demo");
  CHECK(ok.status == 0);
  CHECK(ok.out.find("[verify] ok") != std::string::npos);
  const auto tampered = cli("demo --tamper");
  CHECK(tampered.status == 4);
  CHECK(tampered.out.find("[verify] FAILED") != std::string::npos);
  const auto scope = cli("demo --wrong-scope");
  CHECK(scope.status == 4);
  CHECK(scope.out.find("[grant] FAILED") != std::string::npos);
}

TEST_CASE("sim-run and sim-sweep") {
  TempDir t;
  const auto one = cli("sim-run --preset gen32 --mode dtls --clients 4 --seed 3");
  CHECK(one.status == 0);
  CHECK(count_lines(one.out) == 2);
  CHECK(one.out.find("dtls,4,") != std::string::npos);

  const std::string scenario = std::string(OSCAR_SOURCE_DIR) + "/scenarios/oscar-6-clients.ini";
  CHECK(cli("sim-run --config " + scenario + " --out " + (t / "a.csv")).status == 0);
  CHECK(cli("sim-run --config " + scenario + " --out " + (t / "b.csv")).status == 0);
  CHECK(slurp(t / "a.csv") == slurp(t / "b.csv"));

  const auto sweep = cli("sim-sweep --preset gen16 --out " + (t / "sweep.csv"));
  CHECK(sweep.status == 0);
  CHECK(sweep.out.find("crossover_ratio=") != std::string::npos);
  const std::string csv = slurp(t / "sweep.csv");
  CHECK(count_lines(csv) == 61);
  CHECK(csv.rfind("mode,n_clients", 0) == 0);
}

}
