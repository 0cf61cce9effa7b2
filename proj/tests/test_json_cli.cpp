#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "deltap/eigen.hpp"
#include "deltap/json_io.hpp"

using namespace deltap;

#ifndef DELTAP_BIN
#define DELTAP_BIN "deltap"
#endif

namespace {

std::string tmpdir() {
    static std::string dir = [] {
        std::string d = "/tmp/deltap-cli-test";
        int rc = std::system(("mkdir -p " + d).c_str());
        (void)rc;
        return d;
    }();
    return dir;
}

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null") {
    std::string cmd = std::string(DELTAP_BIN) + " " + args + " > " + stdout_path + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LaurentSeries random_series(std::mt19937_64& rng, uint64_t p, int64_t low, int64_t prec) {
    std::vector<uint32_t> c(static_cast<size_t>(prec - low));
    for (auto& v : c) v = static_cast<uint32_t>(rng() % p);
    return {p, low, prec, std::move(c)};
}

} // namespace

TEST_CASE("JSON round trips") {
    std::mt19937_64 rng(51);
    for (int t = 0; t < 10; ++t) {
        auto s = random_series(rng, 5, -4, 20);
        auto back = laurent_from_json(to_json(s));
        CHECK(back.agrees_with(s));
        CHECK(to_json(back) == to_json(s)); // canonical serialization

        DeltaSeries1 f(5);
        for (int64_t m = 0; m <= 2; ++m) f.set_component(m, random_series(rng, 5, -2, 15));
        CHECK(delta1_from_json(to_json(f)).agrees_with(f));
    }

    auto a = divisor_sum_coeffs(11, 50);
    CHECK(provider_from_json(to_json(a)).at(6) == 12);

    auto sys = EigenSystem::from_provider(divisor_sum_coeffs(11, 100), 5, 11, 0);
    auto sys2 = eigensystem_from_json(to_json(sys));
    CHECK(sys2.lambda_p == sys.lambda_p);
    CHECK(sys2.lambda_at(7) == sys.lambda_at(7));

    auto F = sharp2_lift(divisor_sum_coeffs(11, 100), 5, 0, 30);
    auto F2 = padic2_from_json(to_json(F));
    CHECK(reduce_mod_p(F2).agrees_with(reduce_mod_p(F)));
}

TEST_CASE("CLI pipeline and exit codes") {
    std::string d = tmpdir();
    REQUIRE(run_cli("divisor-sum --N 11 --p 5 --nmax 300 --out " + d + "/a.json") == 0);
    REQUIRE(run_cli("sharp2 --p 5 --N 11 --kappa 0 --prec 60 --coeffs " + d +
                    "/a.json --out " + d + "/s2.json") == 0);
    CHECK(run_cli("check-eigen --p 5 --N 11 --kappa 0 --in " + d + "/s2.json --coeffs " + d +
                  "/a.json") == 0);

    // T(1) is the identity, via files.
    CHECK(run_cli("hecke --p 5 --N 11 --kappa 0 --n 1 --in " + d + "/s2.json --out " + d +
                  "/t1.json") == 0);
    auto before = delta1_from_json(load_json_file(d + "/s2.json"));
    auto after = delta1_from_json(load_json_file(d + "/t1.json"));
    CHECK(after.agrees_with(before));

    // A broken eigen system makes the check fail mathematically: exit 1.
    auto sys = EigenSystem::from_provider(divisor_sum_coeffs(11, 300), 5, 11, 0);
    sys.lambda_p = Fp(2, 5);
    save_json_file(d + "/bad_sys.json", to_json(sys));
    CHECK(run_cli("check-eigen --p 5 --N 11 --in " + d + "/s2.json --eigen-system " + d +
                  "/bad_sys.json") == 1);

    // Usage and input errors: exit 2.
    CHECK(run_cli("sharp2 --coeffs " + d + "/does-not-exist.json") == 2);
    CHECK(run_cli("divisor-sum --N 10 --p 5") == 2);
    CHECK(run_cli("no-such-subcommand") == 2);

    // lift + reduce agree.
    REQUIRE(run_cli("lift --p 5 --N 11 --kappa 0 --prec 40 --check-knacond --coeffs " + d +
                    "/a.json --out " + d + "/F.json --out-reduced " + d + "/red.json") == 0);
    REQUIRE(run_cli("reduce --p 5 --in " + d + "/F.json --out " + d + "/red2.json") == 0);
    CHECK(slurp(d + "/red.json") == slurp(d + "/red2.json"));
}

TEST_CASE("transcripts are reproducible and oracle matches pu through the CLI") {
    std::string d = tmpdir();

    // A Taylor delta-p-symmetric input: V(phi_1) Psi with polynomial phi_1.
    DeltaSeries1 f(5);
    f.set_component(1, v_classical(LaurentSeries(5, 1, 80, [] {
                        std::vector<uint32_t> c(79, 0);
                        c[0] = 1;
                        c[1] = 2;
                        c[3] = 3;
                        return c;
                    }())));
    save_json_file(d + "/f.json", to_json(f));

    REQUIRE(run_cli("pu --p 5 --in " + d + "/f.json --out " + d + "/pu.json",
                    d + "/tr1.json") == 0);
    REQUIRE(run_cli("pu --p 5 --in " + d + "/f.json --out " + d + "/pu.json",
                    d + "/tr2.json") == 0);
    CHECK(slurp(d + "/tr1.json") == slurp(d + "/tr2.json"));

    REQUIRE(run_cli("oracle-pu --p 5 --max-weight 30 --in " + d + "/f.json --out " + d +
                    "/opu.json",
                    d + "/otr.json") == 0);

    // Byte-identical series JSON within the oracle's safe precision.
    json otr = load_json_file(d + "/otr.json");
    auto direct = delta1_from_json(load_json_file(d + "/pu.json"));
    auto oracle = delta1_from_json(load_json_file(d + "/opu.json"));
    DeltaSeries1 a(5), b(5);
    for (const auto& [key, prec] : otr.at("component_precision").items()) {
        int64_t m = std::stoll(key);
        int64_t pr = prec.get<int64_t>();
        a.set_component(m, direct.component_or_zero(m, pr).truncated(pr));
        b.set_component(m, oracle.component_or_zero(m, pr).truncated(pr));
    }
    CHECK(to_json(a).dump() == to_json(b).dump());

    // Rejection through the CLI: q q' is not symmetric.
    DeltaSeries1 bad(5);
    bad.set_component(1, LaurentSeries::monomial(5, 6, Fp(1, 5), 30));
    save_json_file(d + "/bad.json", to_json(bad));
    CHECK(run_cli("pu --p 5 --in " + d + "/bad.json") == 1);
    CHECK(run_cli("oracle-pu --p 5 --max-weight 20 --in " + d + "/bad.json") == 1);
}
