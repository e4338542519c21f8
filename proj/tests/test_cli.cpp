#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "delaymargin/cli.hpp"
#include "delaymargin/errors.hpp"

namespace dm = delaymargin;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = dm::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class Scratch {
public:
    Scratch() : dir_(fs::temp_directory_path() / ("delaymargin_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(dir_);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    std::string file(const std::string& name, const std::string& body) const {
        const auto path = dir_ / name;
        std::ofstream(path) << body;
        return path.string();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
    fs::path dir_;
};

const std::string kExample = R"({"name": "example", "num": [3, 1, 2], "den": [4, 3, 2, 1]})";
const std::string kNegativeGain = R"({"num": [-2, -1], "den": [4, 1, 1]})";

int count_lines_starting(const std::string& text, char c) {
    int n = 0;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        n += (!line.empty() && line[0] == c) ? 1 : 0;
    }
    return n;
}

} // namespace

TEST_CASE("parse_plant accepts both forms") {
    const auto a = dm::cli::parse_plant(R"({"gain": 2, "zeros": [[-1, 0]], "poles": [[-1, 2], [-1, -2]]})");
    CHECK(a.plant.gain == 2.0);
    CHECK(a.plant.poles.size() == 2);
    CHECK(a.name.empty());

    const auto b = dm::cli::parse_plant(kExample);
    CHECK(b.name == "example");
    CHECK(b.plant.poles.size() == 3);
    CHECK(b.plant.zeros.size() == 2);

    const auto c = dm::cli::parse_plant(R"({"plant": {"gain": 1, "zeros": [], "poles": [[-1, 0]]}})");
    CHECK(c.plant.poles.size() == 1);
}

TEST_CASE("parse_plant rejects malformed input") {
    for (const std::string text : {
             "not json",
             R"({"gain": 1})",
             R"({"gain": 1, "zeros": [], "poles": [[-1, 0]], "num": [1], "den": [1, 1]})",
             R"({"num": [1], "den": [1, "x"]})",
             R"({"gain": 1, "zeros": [], "poles": [[-1]]})",
             R"({"zeros": [], "poles": [[-1, 0]]})",
         }) {
        CAPTURE(text);
        try {
            dm::cli::parse_plant(text);
            FAIL("accepted malformed input");
        } catch (const dm::Error& e) {
            CHECK(e.kind() == dm::ErrorKind::InvalidInput);
        }
    }
}

TEST_CASE("intervals prints one row per boundary interval") {
    Scratch s;
    const auto r = run({"intervals", "--sigma", "-0.1", s.file("ex.json", kExample)});
    REQUIRE(r.code == 0);
    CHECK(count_lines_starting(r.out, '[') == 4);
    CHECK(r.out.find("-1 (leaving)") != std::string::npos);
}

TEST_CASE("analyze table and csv") {
    Scratch s;
    const auto path = s.file("ex.json", kExample);
    const auto table = run({"analyze", "--hmax", "7", "--sigma", "-0.1", path});
    REQUIRE(table.code == 0);
    CHECK(count_lines_starting(table.out, '[') + count_lines_starting(table.out, '(') == 8);
    CHECK(table.out.find("stable: [0.000, 0.879)") != std::string::npos);
    CHECK(table.out.find(" \n") == std::string::npos);

    const auto csv = run({"analyze", "--hmax", "7", "--sigma", "-0.1", "--format", "csv", path});
    REQUIRE(csv.code == 0);
    std::istringstream in(csv.out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "h_lo, h_hi, count, crossing_omega, crossing_direction");
    std::vector<std::string> rows;
    for (std::string line; std::getline(in, line);) {
        rows.push_back(line);
    }
    REQUIRE(rows.size() == 8);
    double h_lo = 0;
    double h_hi = 0;
    int count = 0;
    double omega = 0;
    REQUIRE(std::sscanf(rows[1].c_str(), "%lf, %lf, %d, %lf", &h_lo, &h_hi, &count, &omega) == 4);
    CHECK(h_lo == doctest::Approx(0.879).epsilon(1e-3));
    CHECK(h_hi == doctest::Approx(2.984).epsilon(1e-3));
    CHECK(count == 2);
    CHECK(omega == doctest::Approx(2.377).epsilon(1e-3));
}

TEST_CASE("stability and imaginary") {
    Scratch s;
    const auto path = s.file("negative.json", kNegativeGain);
    const auto st = run({"stability", "--sigma", "-0.1", path});
    REQUIRE(st.code == 0);
    CHECK(st.out.find("stable: (0.105, 1.745)") != std::string::npos);

    const auto im = run({"imaginary", "--hmax", "10", path});
    REQUIRE(im.code == 0);
    CHECK(im.out.find("stable: (0.000, 2.006) U (4.443, 4.571)") != std::string::npos);
}

TEST_CASE("json output round-trips through verify") {
    Scratch s;
    const auto r = run({"analyze", "--hmax", "7", "--sigma", "-0.1", "--format", "json", s.file("ex.json", kExample)});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["reports"].size() == 8);
    CHECK(j["events"].size() == 7);
    CHECK(j["sigma0"] == -0.1);
    const auto again = s.file("again.json", r.out);
    const auto v = run({"verify", "--hmax", "7", "--sigma", "-0.1", again});
    CHECK(v.code == 0);
    CHECK(v.out.find("15 of 15 checks agree") != std::string::npos);
}

TEST_CASE("exit codes") {
    Scratch s;
    const auto ex = s.file("ex.json", kExample);
    CHECK(run({}).code == 1);
    CHECK(run({"analyze", ex}).code == 1);
    CHECK(run({"intervals", "--sigma", "-0.1", "--format", "xml", ex}).code == 1);
    CHECK(run({"intervals", "--sigma", "-0.1", "--bogus", ex}).code == 1);
    CHECK(run({"intervals", "--sigma", "-0.1", s.path("missing.json")}).code == 1);
    CHECK(run({"--help"}).code == 0);

    CHECK(run({"intervals", ex}).code == 1);

    const auto improper = run({"intervals", "--sigma", "-0.1", s.file("improper.json", R"({"num": [1, 1, 1], "den": [1, 1]})")});
    CHECK(improper.code == 2);
    CHECK(improper.err.find("NotProper") != std::string::npos);

    const auto bad = run({"intervals", "--sigma", "-0.1", s.file("bad.json", "{")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("InvalidInput") != std::string::npos);

    const auto zero = run({"imaginary", "--hmax", "3", s.file("minus_one.json", R"({"num": [-2], "den": [2, 1]})")});
    CHECK(zero.code == 2);
    CHECK(zero.err.find("CriticalFrequencyZero") != std::string::npos);
}

TEST_CASE("strict mode turns warnings into exit 3") {
    Scratch s;
    const auto path = s.file("on_line.json", R"({"gain": 1, "zeros": [], "poles": [[-0.5, 0], [-2, 0]]})");
    const auto relaxed = run({"analyze", "--hmax", "3", "--sigma", "-0.5", path});
    CHECK(relaxed.code == 0);
    CHECK(relaxed.err.find("warning") != std::string::npos);
    const auto strict = run({"analyze", "--hmax", "3", "--sigma", "-0.5", "--strict", path});
    CHECK(strict.code == 3);
    CHECK(strict.out.empty());
}

TEST_CASE("log level and curve output") {
    Scratch s;
    const auto path = s.file("on_line.json", R"({"gain": 1, "zeros": [], "poles": [[-0.5, 0], [-2, 0]]})");
    ::setenv("DELAYMARGIN_LOG", "quiet", 1);
    const auto quiet = run({"analyze", "--hmax", "3", "--sigma", "-0.5", path});
    ::setenv("DELAYMARGIN_LOG", "debug", 1);
    const auto debug = run({"analyze", "--hmax", "3", "--sigma", "-0.5", path});
    ::unsetenv("DELAYMARGIN_LOG");
    CHECK(quiet.code == 0);
    CHECK(quiet.err.empty());
    CHECK(debug.err.size() > quiet.err.size());

    const auto curves = s.path("curves.csv");
    const auto r = run({"analyze", "--hmax", "7", "--sigma", "-0.1", "--emit-curves", curves, s.file("ex.json", kExample)});
    REQUIRE(r.code == 0);
    std::ifstream in(curves);
    std::string header;
    std::getline(in, header);
    CHECK(header == "omega,H,phi");
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        ++rows;
    }
    CHECK(rows > 100);
}
