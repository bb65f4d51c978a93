#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "wdirac/wdirac.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(WDIRAC_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wdirac_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  fs::create_directories(dir);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << body;
  return p;
}

std::string config(const std::string& name) { return std::string(WDIRAC_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(Cli, SpectrumRunWritesOutputs) {
  const fs::path out = scratch("spectrum");
  const Outcome o = run_cli("run " + config("spectrum.json") + " --out " + out.string());
  ASSERT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("PASS max_relative_residual"), std::string::npos);
  for (const char* f : {"spectrum.csv", "checks.csv", "eigenvectors.bin", "dirac.bin", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  std::istringstream csv(slurp(out / "spectrum.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "k,lambda,cluster,multiplicity,residual");
  bool found = false;
  while (std::getline(csv, line)) {
    if (line.rfind("1,", 0) == 0) {
      const double lambda = std::stod(line.substr(2, line.find(',', 2) - 2));
      EXPECT_NEAR(lambda, 0.5, 1e-10);
      found = true;
    }
  }
  EXPECT_TRUE(found);

  const wdirac::BinaryDump dump = wdirac::read_dump(out / "eigenvectors.bin");
  EXPECT_EQ(dump.magic, "WDEV0001");
  EXPECT_EQ(dump.values.rows(), 64);
  EXPECT_EQ(static_cast<Eigen::Index>(dump.indices.size()), dump.values.cols());

  const auto manifest = wdirac::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["experiment"], "spectrum");
  EXPECT_EQ(manifest["verdict"], "pass");
  EXPECT_EQ(manifest["seed"], 1);
  for (const auto& f : manifest["files"]) {
    const std::string body = slurp(out / f["name"].get<std::string>());
    EXPECT_EQ(f["bytes"].get<std::size_t>(), body.size());
    EXPECT_EQ(f["fnv1a"], wdirac::hex64(wdirac::hash_text(body)));
  }
}

TEST(Cli, MissingGeometryIsConfigErrorWithoutOutputs) {
  const fs::path dir = scratch("missing_geometry");
  const fs::path out = dir / "out";
  const fs::path cfg = write_config(dir, R"({"experiment": "spectrum", "weight": {"kind": "identity"}})");
  const Outcome o = run_cli("run " + cfg.string() + " --out " + out.string());
  EXPECT_EQ(o.code, 2) << o.out;
  EXPECT_NE(o.out.find("geometry"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, UnknownKeyIsRejected) {
  const fs::path dir = scratch("unknown_key");
  const fs::path cfg = write_config(
      dir, R"({"experiment": "spectrum", "geometry": {"kind": "circle", "resolution": 32, "twsit": 0.5}})");
  const Outcome o = run_cli("run " + cfg.string() + " --out " + (dir / "out").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("config.geometry.twsit: unknown key"), std::string::npos) << o.out;
}

TEST(Cli, BadValuesAreConfigErrors) {
  const fs::path dir = scratch("bad_values");
  for (const char* body :
       {R"({"experiment": "spectrum", "geometry": {"kind": "circle", "resolution": 31}})",
        R"({"experiment": "spectrum", "geometry": {"kind": "circle", "resolution": 32, "twist": 0.3}})",
        R"({"experiment": "teleport", "geometry": {"kind": "circle", "resolution": 32}})",
        R"({"experiment": "continuity", "geometry": {"kind": "circle", "resolution": 32}})",
        R"({"experiment": "spectrum", "geometry": {"kind": "circle", "resolution": 32}, "solver": {"alpha": 1.5}})",
        R"({"experiment": "spectrum")"}) {
    const fs::path cfg = write_config(dir, body);
    EXPECT_EQ(run_cli("run " + cfg.string() + " --out " + (dir / "out").string()).code, 2) << body;
  }
}

TEST(Cli, ListIsStableAndMachineReadable) {
  const Outcome a = run_cli("list");
  const Outcome b = run_cli("list");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  for (const char* name : {"circle", "interval", "torus", "oscillatory-sine", "conformal-exp", "wave"}) {
    EXPECT_NE(a.out.find(name), std::string::npos) << name;
  }
  const Outcome m = run_cli("list --machine");
  ASSERT_EQ(m.code, 0);
  const auto j = wdirac::json::parse(m.out);
  EXPECT_EQ(j["geometries"].size(), 3u);
  EXPECT_EQ(j["families"].size(), 4u);
  EXPECT_EQ(j["experiments"].size(), 5u);
}

TEST(Cli, RunsAreDeterministicAcrossThreadCounts) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  ASSERT_EQ(run_cli("run " + config("compare.json") + " --out " + a.string() + " --threads 1").code, 0);
  ASSERT_EQ(run_cli("run " + config("compare.json") + " --out " + b.string() + " --threads 3").code, 0);
  for (const char* f : {"compare.csv", "scaling.csv", "checks.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const fs::path c = scratch("det_c");
  ASSERT_EQ(run_cli("run " + config("compare.json") + " --out " + c.string() + " --seed 99").code, 0);
  EXPECT_NE(slurp(a / "compare.csv"), slurp(c / "compare.csv"));
  EXPECT_EQ(wdirac::json::parse(slurp(c / "manifest.json"))["seed"], 99);
}

TEST(Cli, NoSubcommandIsUsageError) {
  EXPECT_NE(run_cli("").code, 0);
  EXPECT_NE(run_cli("run").code, 0);
}
