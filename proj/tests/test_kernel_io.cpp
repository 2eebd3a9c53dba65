#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "minres/errors.hpp"
#include "minres/kernel_io.hpp"
#include "minres/pipeline.hpp"

using namespace minres;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) { return fs::path(::testing::TempDir()) / name; }

}  // namespace

TEST(KernelFile, RoundTripIsBitwise) {
  const auto k = solve_kernel(2, 4).kernel;
  const auto path = temp_file("minres_rt.json").string();
  io::write_kernel_file(path, k);
  const auto back = io::read_kernel_file(path);
  EXPECT_EQ(back.n(), 2);
  EXPECT_EQ(back.r(), 4);
  EXPECT_EQ(back.provenance(), Provenance::Sdp);
  ASSERT_EQ(back.values().size(), k.values().size());
  for (std::size_t p = 0; p < k.values().size(); ++p) EXPECT_EQ(back.values()[p], k.values()[p]);
  const auto j = io::read_json_file(path);
  EXPECT_EQ(j.at("schema"), io::kKernelSchema);
  EXPECT_EQ(j.at("coeffs").size(), build_orbits(2, 4).size());
  EXPECT_NEAR(j.at("sigma2").get<double>(), 0.548709, 1e-6);
}

TEST(KernelFile, ProductKernelKeepsProvenance) {
  const auto p = make_kernel(KernelKind::Product, 3, 6);
  const auto back = io::kernel_from_json(io::kernel_to_json(p));
  EXPECT_EQ(back.provenance(), Provenance::Product);
  EXPECT_EQ(back.values(), p.values());
}

TEST(KernelFile, RefusesNonInvariantKernels) {
  auto idx = kernels::shared_index(2, 1);
  const KernelCoefficients k(IndexedValues{idx, {1.0, 0.5, 0.25}}, Provenance::Sdp);
  EXPECT_THROW(io::kernel_to_json(k), ParameterError);
}

TEST(KernelFile, RejectsMalformedInput) {
  EXPECT_THROW(io::kernel_from_json(nlohmann::json{{"schema", "other"}}), ParameterError);
  EXPECT_THROW(io::kernel_from_json(nlohmann::json{{"schema", io::kKernelSchema}, {"n", 2}}), ParameterError);
  nlohmann::json bad{{"schema", io::kKernelSchema},
                     {"n", 1},
                     {"r", 1},
                     {"coeffs", {{{"alpha", {0}}, {"g", 1.0}}, {{"alpha", {3}}, {"g", 0.1}}}}};
  EXPECT_THROW(io::kernel_from_json(bad), ParameterError);
  const auto path = temp_file("minres_bad.json").string();
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(io::read_json_file(path), ParameterError);
  EXPECT_THROW(io::read_json_file(temp_file("does_not_exist.json").string()), ParameterError);
}

TEST(PolynomialTable, EvaluatesChebyshevSeries) {
  const nlohmann::json j{{"schema", io::kPolySchema},
                         {"n", 2},
                         {"coeffs", {{{"alpha", {1, 0}}, {"c", 0.5}}, {{"alpha", {0, 2}}, {"c", -1.0}}}}};
  const auto f = io::polynomial_from_json(j, "t");
  const std::vector<double> x{0.3, 0.4};
  EXPECT_NEAR(f(x), 0.5 * 0.3 - (2.0 * 0.16 - 1.0), 1e-15);
  EXPECT_EQ(f.n, 2);
  EXPECT_NEAR(f.oscillation, 3.0, 1e-15);
  // A degree-2 polynomial is reproduced exactly by the degree-2 Dirichlet kernel.
  EXPECT_NEAR(approximation_error(f, kernels::dirichlet(2, 2), 31), 0.0, 1e-13);
  EXPECT_THROW(io::polynomial_from_json(nlohmann::json{{"schema", io::kPolySchema}, {"n", 2}, {"coeffs", {{{"alpha", {1}}, {"c", 1}}}}}, "t"),
               ParameterError);
}

TEST(Csv, FullPrecisionRoundTrip) {
  std::ostringstream os;
  const double s2 = solve_kernel(2, 4).sigma2;
  {
    io::CsvWriter w(os, {"n", "r", "sigma2"});
    w.row(std::vector<double>{2, 4, s2});
  }
  std::istringstream is(os.str());
  std::string header;
  std::string line;
  std::getline(is, header);
  std::getline(is, line);
  EXPECT_EQ(header, "n,r,sigma2");
  const auto last = line.substr(line.rfind(',') + 1);
  EXPECT_EQ(std::stod(last), s2);
  EXPECT_NEAR(std::stod(last), 0.548709, 1e-6);
}
