#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("mon_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  auto err = scratch() / "stderr.txt";
  std::string cmd = std::string(MON_CLI_PATH) + " " + args + " 2>" + err.string();
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream e(err);
  r.err.assign(std::istreambuf_iterator<char>(e), {});
  return r;
}

std::string write(const std::string& name, const std::string& text) {
  auto path = scratch() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kTriangle = R"({"name": "triangle", "nodes": [{"id": "A"}, {"id": "B"}, {"id": "C"}],
  "links": [{"src": "A", "dst": "B", "capacity_mbps": 10},
            {"src": "A", "dst": "C", "capacity_mbps": 10},
            {"src": "B", "dst": "C", "capacity_mbps": 5}]})";

const char* kClasses = R"({"max_hops": 2, "classes": [
  {"id": "A", "src": "A", "dst": "C", "max_sessions": 1, "utility": "U_B"},
  {"id": "B", "src": "B", "dst": "C", "max_sessions": 1, "utility": "U_A"}]})";

}  // namespace

TEST_CASE("solve emits the triangle plan and check accepts it") {
  auto topo = write("tri.json", kTriangle), cls = write("cls.json", kClasses);
  auto plan = (scratch() / "plan.json").string();
  auto r = run("solve --topology " + topo + " --classes " + cls + " --out " + plan);
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(slurp(plan));
  CHECK(j["rates"]["A:A-C"].get<double>() == doctest::Approx(10.0));
  CHECK(j["rates"]["A:A-B-C"].get<double>() == doctest::Approx(5.0));
  auto stdout_plan = run("solve --topology " + topo + " --classes " + cls);
  CHECK(nlohmann::json::parse(stdout_plan.out) == j);

  auto ok = run("check --topology " + topo + " --classes " + cls + " --plan " + plan);
  CHECK(ok.code == 0);
  CHECK_FALSE(ok.out.empty());

  j["rates"]["A:A-C"] = 12.0;
  auto inflated = write("inflated.json", j.dump());
  auto bad = run("check --topology " + topo + " --classes " + cls + " --plan " + inflated);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("feasibility") != std::string::npos);

  j["duals"]["Q->Z"] = 0.5;
  auto unknown = write("unknown.json", j.dump());
  CHECK(run("check --topology " + topo + " --classes " + cls + " --plan " + unknown).code == 2);
}

TEST_CASE("empty classes give a zero plan") {
  auto topo = write("tri.json", kTriangle), cls = write("none.json", "[]");
  auto r = run("solve --topology " + topo + " --classes " + cls);
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["utility"].get<double>() == 0.0);
  CHECK(j["rates"].empty());
}

TEST_CASE("malformed input exits 2 with the byte offset") {
  auto topo = write("broken.json", "{\"nodes\": [");
  auto cls = write("cls.json", kClasses);
  auto r = run("solve --topology " + topo + " --classes " + cls);
  CHECK(r.code == 2);
  CHECK(r.err.find("byte") != std::string::npos);
  CHECK(r.out.empty());
  CHECK(run("solve --topology /nonexistent.json --classes " + cls).code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("run triangle-basic writes summary rows within 5 percent") {
  auto out = scratch() / "tb";
  auto r = run("run --paper triangle-basic --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK_FALSE(r.out.empty());
  std::istringstream summary(slurp(out / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  CHECK(line == "path,target_mbps,actual_mbps");
  int rows = 0;
  while (std::getline(summary, line)) {
    auto a = line.find(','), b = line.rfind(',');
    double target = std::stod(line.substr(a + 1, b - a - 1)), actual = std::stod(line.substr(b + 1));
    CHECK(std::abs(actual - target) <= 0.05 * target);
    ++rows;
  }
  CHECK(rows == 2);
  CHECK(fs::exists(out / "trace.csv"));
}

TEST_CASE("run rejects an invalid scenario") {
  auto scen = write("zero.json", std::string(R"({"topology": )") + kTriangle + R"(, "classes": )" + kClasses +
                                     R"(, "duration": 0})");
  CHECK(run("run --scenario " + scen + " --out " + (scratch() / "zero").string()).code == 2);
  CHECK(run("run --paper triangle-basic --duration 0 --out " + (scratch() / "zero2").string()).code == 2);
  CHECK(run("run --paper hop-study --out " + (scratch() / "hs").string()).code == 2);
}

TEST_CASE("paths subcommand lists triangle routes") {
  auto topo = write("tri.json", kTriangle);
  auto r = run("paths --topology " + topo + " --src A --dst C --max-hops 2");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("A-C") != std::string::npos);
  CHECK(r.out.find("A-B-C") != std::string::npos);
}
