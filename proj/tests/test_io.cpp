#include <cstdio>
#include <fstream>

#include "dfl/errors.hpp"
#include "dfl/io.hpp"
#include "doctest.h"

using namespace dfl;

TEST_CASE("density csv round trip") {
  Grid g({5}, {2.5}, Boundary::open);
  DiscreteDensity rho(g, {0.1, 0.3, 0.05, 0.2, 0.15});
  std::string path = "roundtrip_test_density.csv";
  write_density_csv(path, rho);
  auto back = read_density_csv(path);
  REQUIRE(back.size() == rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    CHECK(back.mass(i) == doctest::Approx(rho.mass(i)).epsilon(1e-14));
  CHECK(back.grid().length(0) == doctest::Approx(2.5));
  // byte-identical rewrite (full-precision values)
  std::string path2 = "roundtrip_test_density2.csv";
  write_density_csv(path2, back);
  CHECK(digest_file(path) == digest_file(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("density csv 2d round trip and validation") {
  Grid g({3, 2}, {1.5, 1.0});
  auto rho = density_from_function(
      g, [](const std::vector<double>& x) { return 1.0 + x[0] + 2.0 * x[1]; });
  std::string path = "roundtrip_test_density2d.csv";
  write_density_csv(path, rho);
  auto back = read_density_csv(path);
  CHECK(back.grid().cells(0) == 3);
  CHECK(back.grid().cells(1) == 2);
  for (std::size_t i = 0; i < rho.size(); ++i)
    CHECK(back.mass(i) == doctest::Approx(rho.mass(i)).epsilon(1e-13));
  std::remove(path.c_str());

  // declared grid mismatch is rejected
  Grid wrong({3, 2}, {3.0, 1.0});
  write_density_csv("roundtrip_bad.csv", rho);
  CHECK_THROWS_AS(read_density_csv("roundtrip_bad.csv", wrong), InputError);
  std::remove("roundtrip_bad.csv");
}

TEST_CASE("config parsing") {
  std::ofstream f("io_test_config.ini");
  f << "# comment\n[sce]\nbudget = 5000\n\n[kinetic]\ntol = 1e-7\n";
  f.close();
  auto cfg = load_config("io_test_config.ini");
  CHECK(cfg.at("sce.budget") == "5000");
  CHECK(cfg.at("kinetic.tol") == "1e-7");
  std::remove("io_test_config.ini");
}

TEST_CASE("digests are content addressed") {
  CHECK(fnv1a64("abc") != fnv1a64("abd"));
  CHECK(fnv1a64("") == 14695981039346656037ull);
}
