#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "tvinfer/cli.hpp"
#include "tvinfer/csv.hpp"
#include "tvinfer/error.hpp"

using namespace tvinfer;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("tvinfer_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

void write_data(const fs::path& p, Index n, Index cols, std::uint64_t seed, bool zero_design = false) {
  const Matrix X = testutil::gaussian(n, cols, seed);
  const Vector e = testutil::gaussian_vector(n, seed + 1);
  std::ofstream out(p, std::ios::binary);
  for (Index j = 0; j < cols; ++j) out << "x" << j + 1 << ',';
  out << "y\n";
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < cols; ++j) out << format_double(zero_design ? 0.0 : X(i, j)) << ',';
    out << format_double((zero_design ? 0.0 : 2.0 * X(i, 0)) + e(i)) << '\n';
  }
}

int run(std::vector<std::string> args) { return cli::run(args); }

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 2000; ++k) {
    const double x = u(gen) * std::pow(10.0, (k % 41) - 20);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("read_csv parses and reports lines") {
  std::istringstream ok("x1, x2 ,y\n1,2,3\n\n4.5,-1e-3,6\r\n");
  const CsvTable t = read_csv(ok);
  CHECK(t.header == std::vector<std::string>{"x1", "x2", "y"});
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(1, 1) == -1e-3);
  CHECK(t.column("y") == 2);

  std::istringstream short_row("x1,y\n1,2\n3\n");
  try {
    read_csv(short_row, "d.csv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("d.csv:3") != std::string::npos);
  }
  std::istringstream bad("x1,y\n1,abc\n");
  CHECK_THROWS_WITH_AS(read_csv(bad, "d.csv"), doctest::Contains("column 'y'"), DataError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), DataError);
}

TEST_CASE("dataset columns") {
  std::istringstream in("x2,x1,resp\n1,2,3\n4,5,6\n");
  const CsvTable t = read_csv(in);
  const Dataset d = dataset_from_csv(t, "resp");
  CHECK(d.X()(0, 0) == 2.0);
  CHECK(d.X()(0, 1) == 1.0);
  CHECK(d.y()(1) == 6.0);
  CHECK_THROWS_WITH_AS(dataset_from_csv(t), doctest::Contains("'y'"), DataError);
  std::istringstream no_x("a,y\n1,2\n");
  CHECK_THROWS_WITH_AS(dataset_from_csv(read_csv(no_x)), doctest::Contains("'x1'"), DataError);
}

TEST_CASE("one grid point gives one block") {
  TempDir dir("one");
  write_data(dir.path / "d.csv", 120, 5, 11);
  write(dir.path / "c.json", R"({"grid": [0.5], "nmc": 2000})");
  REQUIRE(run({"infer", "--config", (dir.path / "c.json").string(), "--data", (dir.path / "d.csv").string(), "--out",
               (dir.path / "o").string(), "-q"}) == 0);
  std::istringstream in(slurp(dir.path / "o" / "infer.csv"));
  const CsvTable t = read_csv(in);
  CHECK(t.header == std::vector<std::string>{"t", "j", "beta_hat", "raw_p", "adj_p", "rejected"});
  REQUIRE(t.values.rows() == 5);
  CHECK((t.values.col(0).array() == 0.5).all());
  for (Index j = 0; j < 5; ++j) CHECK(t.values(j, 1) == static_cast<double>(j + 1));
  CHECK(t.values(0, 5) == 1.0);
  CHECK((t.values.col(4).array() >= t.values.col(3).array() - 1.36 / std::sqrt(2000.0)).all());
}

TEST_CASE("exit codes") {
  TempDir dir("codes");
  const std::string data = (dir.path / "d.csv").string(), out = (dir.path / "o").string();
  write_data(dir.path / "d.csv", 80, 4, 12);
  CHECK(run({"--help"}) == 0);
  CHECK(run({}) == 2);
  CHECK(run({"infer", "--bogus"}) == 2);
  CHECK(run({"infer", "--data", data, "--out", out, "--alpha", "1.5", "-q"}) == 2);
  CHECK(run({"infer", "--data", data, "--out", out, "--kernel", "gaussian", "-q"}) == 2);
  write(dir.path / "k.json", R"({"nmc": 2000, "colour": "red"})");
  CHECK(run({"infer", "--config", (dir.path / "k.json").string(), "--data", data, "--out", out, "-q"}) == 2);
  write(dir.path / "broken.json", "{ nmc: ");
  CHECK(run({"infer", "--config", (dir.path / "broken.json").string(), "--data", data, "--out", out, "-q"}) == 2);
  CHECK(run({"nulldist", "--data", data, "--out", out, "--t", "0.5", "--error-model", "banded", "-q"}) == 2);

  write(dir.path / "bad.csv", "x1,y\n1,2\n3,oops\n");
  CHECK(run({"infer", "--data", (dir.path / "bad.csv").string(), "--out", out, "-q"}) == 3);
  write(dir.path / "noy.csv", "x1,x2\n1,2\n3,4\n");
  CHECK(run({"infer", "--data", (dir.path / "noy.csv").string(), "--out", out, "-q"}) == 3);
  CHECK(run({"infer", "--data", (dir.path / "missing.csv").string(), "--out", out, "-q"}) == 3);

  write_data(dir.path / "zero.csv", 80, 4, 13, true);
  CHECK(run({"infer", "--data", (dir.path / "zero.csv").string(), "--out", out, "--nmc", "1000",
             "--error-model", "iid_known", "-q"}) == 4);
  CHECK(fs::exists(dir.path / "o" / "infer_errors.csv"));
}

TEST_CASE("outputs are deterministic") {
  TempDir dir("golden");
  write_data(dir.path / "d.csv", 100, 6, 14);
  const std::string data = (dir.path / "d.csv").string();
  auto once = [&](const std::string& tag, const std::string& threads) {
    const fs::path out = dir.path / tag;
    REQUIRE(run({"infer", "--data", data, "--out", out.string(), "--nmc", "2000", "--seed", "7", "--threads", threads,
                 "-q"}) == 0);
    return slurp(out / "infer.csv");
  };
  const std::string a = once("a", "1"), b = once("b", "4"), c = once("c", "4");
  CHECK(!a.empty());
  CHECK(a == b);
  CHECK(b == c);

  REQUIRE(run({"nulldist", "--data", data, "--out", (dir.path / "n1").string(), "--t", "0.5", "--nmc", "1000", "-q"}) ==
          0);
  REQUIRE(run({"nulldist", "--data", data, "--out", (dir.path / "n2").string(), "--t", "0.5", "--nmc", "1000",
               "--threads", "3", "-q"}) == 0);
  CHECK(slurp(dir.path / "n1" / "nulldist.csv") == slurp(dir.path / "n2" / "nulldist.csv"));
}
