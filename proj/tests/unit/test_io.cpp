#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lvlmc/manifest.hpp"
#include "lvlmc/pipeline.hpp"
#include "lvlmc/rng.hpp"
#include "lvlmc/samples.hpp"

using namespace lvlmc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "lvlmc_io_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("sample csv round trip") {
    SampleSet set;
    set.variable_names = {"ni", "fe"};
    set.locations = {{1.5, 2.5, 3.5}, {4.0, 5.0, 6.0}};
    set.values.resize(2, 2);
    set.values << 0.1, 22.5, 0.3, 41.25;

    const auto path = (temp_dir() / "roundtrip.csv").string();
    write_samples_csv(path, set);
    const auto back = read_samples(path);
    REQUIRE(back.count() == 2);
    CHECK(back.variable_names == set.variable_names);
    CHECK((back.values - set.values).norm() == 0.0);
    CHECK(back.locations[1][2] == 6.0);
}

TEST_CASE("geoeas sample file parses") {
    const auto path = (temp_dir() / "samples.dat").string();
    {
        std::ofstream out(path);
        out << "test data\n5\nX\nY\nZ\ngrade\ndensity\n";
        out << "0.0 1.0 2.0 3.5 2.61\n";
        out << "10.0 11.0 2.0 4.5 2.72\n";
    }
    const auto set = read_samples(path);
    REQUIRE(set.count() == 2);
    CHECK(set.variable_names[0] == "grade");
    CHECK(set.values(1, 1) == doctest::Approx(2.72));
    CHECK(set.locations[1][0] == doctest::Approx(10.0));
}

TEST_CASE("csv parse errors carry line numbers") {
    const auto path = (temp_dir() / "bad.csv").string();
    {
        std::ofstream out(path);
        out << "x,y,z,v1\n1,2,3,4\n1,2,3\n";
    }
    CHECK_THROWS_WITH_AS(read_samples(path), doctest::Contains(":3:"), ConfigError);
}

TEST_CASE("gslib grid file round trip") {
    Rng rng(9100);
    Eigen::MatrixXd values(12, 2);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 2; ++j) values(i, j) = rng.normal();
    const auto path = (temp_dir() / "grid.gslib").string();
    write_gslib_grid(path, "test grid", {"a", "b"}, values);

    std::vector<std::string> names;
    const auto back = read_gslib_grid(path, &names);
    REQUIRE(names.size() == 2);
    CHECK(names[0] == "a");
    CHECK((back - values).norm() == 0.0);
}

TEST_CASE("fnv digests are stable and file digests match string digests") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    const std::string payload = "lag,gamma,pairs\n1.0,0.5,10\n";
    const auto path = (temp_dir() / "digest.csv").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << payload;
    }
    CHECK(digest_file(path) == fnv1a(payload));
}
