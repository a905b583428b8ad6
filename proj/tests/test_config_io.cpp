#include <doctest.h>

#include "plate/config.hpp"
#include "plate/io.hpp"

#include <filesystem>
#include <fstream>

using namespace plate;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[plate]
alpha = 0.0
delta = 1.0
beta = 0.0
kappa = 0.0
damping = 1, 0
)";

std::vector<std::string> errors_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& what) {
    for (const auto& e : errs)
        if (e.find(what) != std::string::npos) return true;
    return false;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("plate_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("minimal config takes documented defaults") {
    const RunConfig rc = parse_config_text(kMinimal);
    CHECK(rc.plate.dom.l == 1.0);
    CHECK(rc.plate.dom.sigma == 0.3);
    CHECK(rc.basis.mx == 8);
    CHECK(rc.basis.ny == 8);
    CHECK(rc.sim.dt == 1e-3);
    CHECK(rc.sweep.radii == std::vector<double>{1.0, 5.0, 25.0});
    CHECK(rc.assumption_f.accepted);
    CHECK(rc.file_hash == fnv1a64(kMinimal));
}

TEST_CASE("invalid documents list every problem") {
    CHECK(mentions(errors_of("[plate]\nalpha = 1\n"), "missing required key plate.delta"));
    CHECK(mentions(errors_of(std::string(kMinimal) + "bogus = 1\n"), "unknown key plate.bogus"));
    CHECK(mentions(errors_of(std::string(kMinimal) + "alpha = 2\n"), "duplicate key plate.alpha"));
    CHECK(mentions(errors_of(std::string(kMinimal) + "[domain]\nsigma = 0.7\n"), "sigma"));
    CHECK(mentions(errors_of(std::string(kMinimal) + "[sim]\ndt = abc\n"), "cannot parse sim.dt"));

    std::string undamped = kMinimal;
    undamped.replace(undamped.find("damping = 1, 0"), 14, "damping = 0, 0");
    const auto errs = errors_of(undamped);
    CHECK(mentions(errs, "damping"));

    const auto many = errors_of(std::string(kMinimal) + "[domain]\nsigma = 0.7\nl = -1\n");
    CHECK(many.size() >= 2);
}

TEST_CASE("a source violating the growth condition is rejected at parse time") {
    std::string text = std::string(kMinimal) + "[source]\nkind = table\ntable_min = -4\ntable_max = 4\nvalues = ";
    for (int i = 0; i <= 16; ++i) {
        const double s = -4.0 + 0.5 * i;
        text += (i ? ", " : "") + fmt17(-s * s * s);
    }
    text += "\n";
    CHECK(mentions(errors_of(text), "Assumption (f) rejected"));
}

TEST_CASE("hashes and number formatting") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hex64(0xabcull) == "0000000000000abc");
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23}) CHECK(std::stod(fmt17(x)) == x);
}

TEST_CASE("output directory guard") {
    const fs::path dir = scratch("outdir");
    prepare_output_dir(dir.string(), false);
    CHECK(fs::is_directory(dir));
    write_text((dir / "x.txt").string(), "x");
    CHECK_THROWS_AS(prepare_output_dir(dir.string(), false), ConfigError);
    CHECK_NOTHROW(prepare_output_dir(dir.string(), true));
    fs::remove_all(dir);
}

TEST_CASE("snapshot container round trip and ledger csv") {
    const RunConfig rc = parse_config_text(kMinimal);
    const DiscreteOperators ops = assemble_operators(2, 2, rc.plate.dom);
    SimPlan plan = rc.sim;
    plan.T = 0.05;
    plan.snapshot_every = 10;
    const Trajectory tr = run(rc.plate, ops, plan, random_state(ops, 1.0, 1), split_constants(rc.plate, rc.assumption_f));

    const fs::path dir = scratch("snap");
    fs::create_directories(dir);
    const std::string path = (dir / "snapshots.bin").string();
    write_snapshots(path, tr, rc.file_hash);
    const SnapshotFile f = read_snapshots(path);
    CHECK(f.version == 1);
    CHECK(f.config_hash == rc.file_hash);
    CHECK(f.Mx == 2);
    CHECK(f.Ny == 2);
    CHECK(f.dt == plan.dt);
    REQUIRE(f.snapshots.size() == tr.snapshots.size());
    for (std::size_t i = 0; i < f.snapshots.size(); ++i) {
        CHECK(f.snapshots[i].t == tr.snapshots[i].t);
        CHECK(f.snapshots[i].u == tr.snapshots[i].u);
        CHECK(f.snapshots[i].v == tr.snapshots[i].v);
    }
    // header: 8 magic + 4 version + 8 hash + 4 + 4 + 8 dt + 8 count, then (1 + 2n) doubles per record
    CHECK(fs::file_size(path) == 44 + tr.snapshots.size() * 8 * (1 + 2 * 4));

    const std::string csv = (dir / "ledger.csv").string();
    write_ledger_csv(csv, tr.ledger, hex64(rc.file_hash));
    std::ifstream in(csv);
    std::string first, header;
    std::getline(in, first);
    std::getline(in, header);
    CHECK(first == "# config_hash=" + hex64(rc.file_hash));
    CHECK(header.rfind("t,", 0) == 0);

    std::ofstream(path, std::ios::binary | std::ios::trunc) << "NOTASNAP";
    CHECK_THROWS(read_snapshots(path));
    fs::remove_all(dir);
}
