#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "slicevol/dataset_io.hpp"
#include "slicevol/report_io.hpp"

using namespace slicevol;

namespace {

auto has_code(Errc code) {
  return Catch::Matchers::Predicate<Error>(
      [code](const Error& e) { return e.code() == code; });
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "slicevol-io-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

constexpr const char* kTwoRecordCsv =
    "id,slice_index,pred_area_mm2,truth_area_mm2,slice_spacing_mm\n"
    "a,0,0,0,10\n"
    "a,1,100,95,10\n"
    "a,2,200,210,10\n"
    "a,3,120,118,10\n"
    "a,4,0,0,10\n"
    "b,0,0,,8\n"
    "b,1,50,,8\n"
    "b,2,60,,8\n"
    "b,3,55,,8\n"
    "b,4,0,,8\n";

}  // namespace

TEST_CASE("csv loads two records with matching ids") {
  std::istringstream in(kTwoRecordCsv);
  const auto hearts = load_dataset_csv(in);
  REQUIRE(hearts.size() == 2);
  REQUIRE(hearts[0].id == "a");
  REQUIRE(hearts[0].pred_areas.size() == 5);
  REQUIRE(hearts[0].truth_areas.has_value());
  REQUIRE((*hearts[0].truth_areas)[2] == 210.0);
  REQUIRE(hearts[1].id == "b");
  REQUIRE_FALSE(hearts[1].truth_areas.has_value());
  REQUIRE(hearts[1].slice_spacing == 8.0);
}

TEST_CASE("empty file loads as an empty dataset") {
  const auto path = temp_file("empty.csv");
  std::ofstream(path.string()).close();
  REQUIRE(load_dataset(path.string(), DataFormat::csv).empty());
  const auto jpath = temp_file("empty.json");
  std::ofstream(jpath.string()).close();
  REQUIRE(load_dataset(jpath.string(), DataFormat::json).empty());
}

TEST_CASE("csv schema violations are rejected") {
  auto load = [](const std::string& body) {
    std::istringstream in(body);
    return load_dataset_csv(in);
  };
  const std::string header = "id,slice_index,pred_area_mm2,truth_area_mm2,slice_spacing_mm\n";
  REQUIRE_THROWS_MATCHES(load(header + "a,0,-5,,10\n"), Error, has_code(Errc::schema_error));
  REQUIRE_THROWS_MATCHES(load(header + "a,0,nan,,10\n"), Error, has_code(Errc::schema_error));
  REQUIRE_THROWS_MATCHES(load(header + "a,0,inf,,10\n"), Error, has_code(Errc::schema_error));
  REQUIRE_THROWS_MATCHES(load(header + "a,0,1,,10\na,2,2,,10\n"), Error,
                         has_code(Errc::schema_error));
  REQUIRE_THROWS_MATCHES(load(header + "a,0,1,,10\na,1,2,,11\n"), Error,
                         has_code(Errc::schema_error));
  REQUIRE_THROWS_MATCHES(load(header + "a,0,abc,,10\n"), Error, has_code(Errc::parse_error));
  REQUIRE_THROWS_MATCHES(load(header + "a,0,1,10\n"), Error, has_code(Errc::parse_error));
  REQUIRE_THROWS_MATCHES(load("wrong,header\n"), Error, has_code(Errc::parse_error));
  // Interleaved groups
  REQUIRE_THROWS_MATCHES(
      load(header + "a,0,1,,10\nb,0,1,,10\na,1,2,,10\n"), Error, has_code(Errc::schema_error));
}

TEST_CASE("datasets round-trip through csv and json") {
  SliceSeries s1;
  s1.id = "h-1";
  s1.p = {0.0, 123.456, 789.0123, 456.7, 0.0};
  s1.g = std::vector<double>{0.0, 120.0, 800.25, 450.125, 3.0};
  s1.slice_spacing = 7.5;
  SliceSeries s2;
  s2.id = "h-2";
  s2.p = {0.0, 1.25, 2.5, 3.75, 0.0};
  s2.slice_spacing = 10.0;
  const std::vector<SliceSeries> dataset{s1, s2};

  for (const DataFormat fmt : {DataFormat::csv, DataFormat::json}) {
    const auto path = temp_file(fmt == DataFormat::csv ? "roundtrip.csv" : "roundtrip.json");
    save_dataset(path.string(), dataset, fmt);
    const auto loaded = load_dataset(path.string(), fmt);
    REQUIRE(loaded.size() == 2);
    REQUIRE(loaded[0].id == "h-1");
    REQUIRE(loaded[0].pred_areas == s1.p);
    REQUIRE(loaded[0].truth_areas == s1.g);
    REQUIRE(loaded[0].slice_spacing == 7.5);
    REQUIRE(loaded[1].pred_areas == s2.p);
    REQUIRE_FALSE(loaded[1].truth_areas.has_value());
  }
}

TEST_CASE("json accepts both bare arrays and wrapped objects") {
  const std::string bare =
      R"([{"id":"x","slice_spacing_mm":5.0,"pred_areas_mm2":[0,10,20,10,0],"truth_areas_mm2":null}])";
  std::istringstream in1(bare);
  REQUIRE(load_dataset_json(in1).size() == 1);

  const std::string wrapped = R"({"format_version":"1.0","hearts":)" + bare + "}";
  std::istringstream in2(wrapped);
  REQUIRE(load_dataset_json(in2).size() == 1);

  const std::string future = R"({"format_version":"2.0","hearts":)" + bare + "}";
  std::istringstream in3(future);
  REQUIRE_THROWS_MATCHES(load_dataset_json(in3), Error, has_code(Errc::version_mismatch));
}

TEST_CASE("json schema violations carry record context") {
  auto load = [](const std::string& body) {
    std::istringstream in(body);
    return load_dataset_json(in);
  };
  REQUIRE_THROWS_MATCHES(load(R"([{"slice_spacing_mm":5,"pred_areas_mm2":[1]}])"), Error,
                         has_code(Errc::schema_error));
  REQUIRE_THROWS_MATCHES(load(R"([{"id":"x","slice_spacing_mm":5,"pred_areas_mm2":[-3]}])"),
                         Error, has_code(Errc::schema_error));
  REQUIRE_THROWS_MATCHES(load("not json"), Error, has_code(Errc::parse_error));
}

TEST_CASE("model params survive a fit-report round trip") {
  FitReport report;
  report.params.sde = {1.25, 31.5};
  report.params.jump = {0.07, 0.054, 0.02, 0.05, 0.5};
  report.params.delta = 0.625;
  report.beta_u0_present = report.beta_u1_present = report.beta_n_present = true;
  report.loglik_jump = -10.5;
  report.loglik_sde = -200.25;
  report.loglik_delta = -30.0;
  report.count_no_jump = 340;
  report.count_jump_up = 37;
  report.count_jump_down = 23;
  report.edge_total = 400;

  const auto path = temp_file("report.json");
  write_fit_report(path.string(), report, FitConfig{});
  const ModelParams loaded = read_model_params(path.string());
  REQUIRE(loaded.sde.theta0 == report.params.sde.theta0);
  REQUIRE(loaded.sde.alpha == report.params.sde.alpha);
  REQUIRE(loaded.jump.beta_n == report.params.jump.beta_n);
  REQUIRE(loaded.delta == report.params.delta);

  // Absent betas serialize as null and come back as NaN.
  report.params.jump.beta_u0 = std::numeric_limits<double>::quiet_NaN();
  write_fit_report(path.string(), report, FitConfig{});
  const ModelParams absent = read_model_params(path.string());
  REQUIRE(std::isnan(absent.jump.beta_u0));

  // Bare params objects work too.
  {
    std::ofstream out(path.string());
    out << model_params_to_json(report.params).dump() << "\n";
  }
  REQUIRE(read_model_params(path.string()).sde.alpha == 31.5);

  // Unknown major versions are refused.
  {
    std::ofstream out(path.string());
    auto j = fit_report_to_json(report, FitConfig{});
    j["format_version"] = "3.0";
    out << j.dump() << "\n";
  }
  REQUIRE_THROWS_MATCHES(read_model_params(path.string()), Error,
                         has_code(Errc::version_mismatch));
}

TEST_CASE("format_double writes shortest round-trip decimals") {
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(format_double(1234.0) == "1234");
  const double v = 123.45600000000002;
  REQUIRE(std::stod(format_double(v)) == v);
}
