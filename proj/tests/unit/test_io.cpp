#include <doctest.h>

#include "semifit/estimator.hpp"
#include "semifit/io.hpp"
#include "semifit/predict.hpp"
#include "semifit/sim.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace semifit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "semifit_io_test";
  fs::create_directories(dir);
  return dir / name;
}

FittedModel small_model() {
  SimSpec spec;
  spec.n = 200;
  spec.seed = 61;
  FitConfig cfg;
  cfg.optimizer.max_evals = 150;
  cfg.seed = 61;
  return fit(generate(spec).data, cfg);
}

}  // namespace

TEST_CASE("csv parsing") {
  std::istringstream in("\xEF\xBB\xBFy, a ,b\r\n1,2,3\r\n-4.5,1e-3,  7\n");
  const CsvTable t = read_csv(in);
  REQUIRE(t.header == std::vector<std::string>{"y", "a", "b"});
  CHECK(t.values.rows() == 2);
  CHECK(t.values(1, 0) == -4.5);
  CHECK(t.values(1, 1) == 1e-3);
  CHECK(t.values(1, 2) == 7.0);
  CHECK(t.column("b") == 2);
  CHECK(t.column("zz") == -1);
}

TEST_CASE("csv errors") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_csv(in);
  };
  CHECK_THROWS_AS(parse(""), Error);
  CHECK_THROWS_AS(parse("a,a\n1,2\n"), Error);
  CHECK_THROWS_AS(parse("a,,b\n1,2,3\n"), Error);
  CHECK_THROWS_AS(parse("a,b\n1\n"), Error);
  try {
    parse("a,b\n1,x\n");
    FAIL("expected Parse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK_THROWS_AS(read_csv_file("/nonexistent/none.csv"), Error);
}

TEST_CASE("csv write then read is lossless") {
  MatrixXd v(2, 3);
  v << 0.1, -1.0 / 3.0, 1e300, 5e-324, 42, -0.0;
  std::ostringstream out;
  write_csv(out, {"a", "b", "c"}, v);
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  CHECK(t.values == v);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("role maps") {
  std::istringstream in("y,xint1,xuint1,xuint2,other\n1,2,3,4,5\n2,3,4,5,6\n");
  const CsvTable t = read_csv(in);
  RoleMap r = RoleMap::defaults_for(t);
  CHECK(r.outcome == "y");
  CHECK(r.int_cols == std::vector<std::string>{"xint1"});
  CHECK(r.uint_cols == std::vector<std::string>{"xuint1", "xuint2"});
  CHECK_NOTHROW(r.validate(t, true));
  const Dataset d = dataset_from_table(t, r);
  CHECK(d.names_uint()[1] == "xuint2");
  CHECK(d.x_uint()(1, 1) == 5.0);

  RoleMap back = RoleMap::from_json(r.to_json());
  CHECK(back.uint_cols == r.uint_cols);

  RoleMap dup = r;
  dup.ignore = {"xint1"};
  CHECK_THROWS_AS(dup.validate(t, true), Error);
  RoleMap missing = r;
  missing.uint_cols.push_back("nope");
  CHECK_THROWS_AS(missing.validate(t, true), Error);
  CHECK_THROWS_AS(RoleMap::from_json(nlohmann::json{{"int", 3}}), Error);
}

TEST_CASE("model json round-trip") {
  const FittedModel m = small_model();
  const nlohmann::json j = model_to_json(m);
  CHECK(j.at("format") == "semifit-model/1");
  const FittedModel back = model_from_json(j);
  CHECK(back.params.gamma == m.params.gamma);
  CHECK(back.params.psi == m.params.psi);
  CHECK(back.train_proj == m.train_proj);
  CHECK(back.bandwidth == m.bandwidth);
  CHECK(model_to_json(back).dump() == j.dump());

  const fs::path path = scratch("model.json");
  save_model(m, path.string());
  const FittedModel loaded = load_model(path.string());
  SimSpec spec;
  spec.n = 50;
  spec.seed = 62;
  const Simulated test = generate(spec);
  const VectorXd a = predict(m, test.data.x_int(), test.data.x_uint());
  const VectorXd b = predict(loaded, test.data.x_int(), test.data.x_uint());
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("corrupted model json is rejected") {
  nlohmann::json j = model_to_json(small_model());
  nlohmann::json bad = j;
  bad["gamma"].erase(0);
  CHECK_THROWS_AS(model_from_json(bad), Error);
  bad = j;
  bad.erase("psi");
  CHECK_THROWS_AS(model_from_json(bad), Error);
  bad = j;
  bad["bandwidth"][0] = -1.0;
  CHECK_THROWS_AS(model_from_json(bad), Error);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
}
