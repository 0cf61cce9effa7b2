// deltap: exact arithmetic for delta-series mod p and their Hecke calculus.
//
// Subcommands operate on small JSON files (series, coefficient lists,
// eigen systems) and print a machine-readable transcript to stdout.
// Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 bad
// usage or bad input.

#include <cstdlib>
#include <iostream>
#include <numeric>
#include <string>

#include <CLI11.hpp>

#include "deltap/eigen.hpp"
#include "deltap/json_io.hpp"
#include "deltap/lift.hpp"
#include "deltap/oracle.hpp"

using namespace deltap;

namespace {

constexpr const char* kVersion = "deltap 0.1.0";

struct Options {
    int64_t p = 5;
    int64_t N = 11;
    int64_t kappa = 0;
    int64_t prec = 40;
    int64_t W = 30;
    int64_t n = 2;
    uint64_t seed = 20260810;
    int64_t gamma = 1;
    int64_t nmax = 100;
    int M = kDefaultPadicDigits;
    bool check_knacond = false;
    bool use_oracle = false;
    std::string in, out, out_reduced, coeffs, eigen_file;
    std::vector<int64_t> n_list;
};

void validate_pn(const Options& o) {
    check_prime_field(static_cast<uint64_t>(o.p));
    require(o.N >= 5, "invalid-input", "level N must be >= 5");
    require(std::gcd(o.N, o.p) == 1, "invalid-input", "level must be coprime to p");
    require(o.prec >= 1, "invalid-input", "precision must be positive");
}

json config_json(const Options& o) {
    return {{"p", o.p},   {"N", o.N},       {"kappa", o.kappa}, {"prec", o.prec},
            {"W", o.W},   {"seed", o.seed}};
}

// Transcript envelope; artifacts go to --out (or $DELTAP_OUT_DIR), falling
// back to inline embedding so every run is self-contained.
struct Transcript {
    std::string command;
    std::string echo;
    json config;
    json checks = json::array();
    json extra = json::object();
    bool pass = true;

    void add_report(const CheckReport& rep) {
        for (const auto& it : rep.items) {
            checks.push_back({{"name", it.name}, {"pass", it.pass}, {"precision", it.precision}});
            pass = pass && it.pass;
        }
    }

    void add_check(const std::string& name, bool ok, int64_t precision) {
        checks.push_back({{"name", name}, {"pass", ok}, {"precision", precision}});
        pass = pass && ok;
    }

    int emit(const std::string& out_path, const json& artifact, const char* artifact_key) {
        json t = {{"command", command}, {"argv", echo},       {"config", config},
                  {"checks", checks},   {"pass", pass},       {"version", kVersion}};
        for (const auto& [k, v] : extra.items()) t[k] = v;
        std::string path = out_path;
        if (path.empty()) {
            if (const char* dir = std::getenv("DELTAP_OUT_DIR"))
                path = std::string(dir) + "/" + command + ".json";
        }
        if (!artifact.is_null()) {
            if (!path.empty()) {
                save_json_file(path, artifact);
                t["artifact"] = path;
            } else {
                t[artifact_key] = artifact;
            }
        }
        std::cout << t.dump(2) << std::endl;
        return pass ? 0 : 1;
    }
};

// An eigen-system file is authoritative for p, N, kappa; otherwise the
// system is built from a coefficient file and the shared flags.
EigenSystem system_from_options(const Options& o) {
    if (!o.eigen_file.empty()) {
        EigenSystem sys = eigensystem_from_json(load_json_file(o.eigen_file));
        require(std::gcd(sys.N, static_cast<int64_t>(sys.p)) == 1 && sys.N >= 5,
                "invalid-input", "eigen system level must be >= 5 and coprime to p");
        return sys;
    }
    require(!o.coeffs.empty(), "invalid-input", "need --coeffs or --eigen-system");
    auto a = provider_from_json(load_json_file(o.coeffs));
    return EigenSystem::from_provider(a, static_cast<uint64_t>(o.p), o.N, o.kappa);
}

int run(int argc, char** argv) {
    CLI::App app{"exact delta-series calculus mod p"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--p", o.p, "prime p >= 5");
        cmd->add_option("--N", o.N, "level, coprime to p");
        cmd->add_option("--kappa", o.kappa, "weight degree kappa >= 0");
        cmd->add_option("--prec", o.prec, "q-adic working precision");
        cmd->add_option("--seed", o.seed, "seed echoed into the transcript");
        cmd->add_option("--out", o.out, "artifact output path");
    };

    auto* divisor = app.add_subcommand("divisor-sum", "emit divisor-sum coefficients");
    add_common(divisor);
    divisor->add_option("--nmax", o.nmax, "number of coefficients");

    auto* phifrom = app.add_subcommand("phi-from-eigen", "reconstruct phi from eigenvalues");
    add_common(phifrom);
    phifrom->add_option("--coeffs", o.coeffs, "coefficient file a_1..a_n (JSON array)");
    phifrom->add_option("--eigen-system", o.eigen_file, "eigen system JSON");
    phifrom->add_option("--gamma", o.gamma, "leading scalar");

    auto* sharp2c = app.add_subcommand("sharp2", "build phi^sharp2 from eigendata");
    add_common(sharp2c);
    sharp2c->add_option("--coeffs", o.coeffs, "coefficient file")->required();

    auto* sharp1c = app.add_subcommand("sharp1", "build phi^sharp1 (kappa=0, lambda_p != 0)");
    add_common(sharp1c);
    sharp1c->add_option("--coeffs", o.coeffs, "coefficient file")->required();

    auto* hecke = app.add_subcommand("hecke", "apply T_kappa(n) to an order-1 series");
    add_common(hecke);
    hecke->add_option("--in", o.in, "input delta-series JSON")->required();
    hecke->add_option("--n", o.n, "Hecke index, coprime to p");

    auto* hecke2 = app.add_subcommand("hecke2", "apply T_kappa(n) to an order-2 series");
    add_common(hecke2);
    hecke2->add_option("--in", o.in, "input order-2 series JSON")->required();
    hecke2->add_option("--n", o.n, "Hecke index, coprime to p");

    auto* puc = app.add_subcommand("pu", "apply \"pU\" via the closed form");
    add_common(puc);
    puc->add_option("--in", o.in, "input delta-series JSON")->required();
    puc->add_option("--max-weight", o.W, "weighted degree cap for --oracle");
    puc->add_flag("--oracle", o.use_oracle, "use the symmetric-solver route instead");

    auto* ptpc = app.add_subcommand("ptp", "apply \"pT_kappa(p)\"");
    add_common(ptpc);
    ptpc->add_option("--in", o.in, "input delta-series JSON")->required();

    auto* dec = app.add_subcommand("decompose", "structure / eigenform decomposition");
    add_common(dec);
    dec->add_option("--in", o.in, "input delta-series JSON")->required();
    dec->add_option("--coeffs", o.coeffs, "coefficient file (enables eigen decomposition)");
    dec->add_option("--eigen-system", o.eigen_file, "eigen system JSON (same)");

    auto* oracle = app.add_subcommand("oracle-pu", "apply \"pU\" via the symmetric solver");
    add_common(oracle);
    oracle->add_option("--in", o.in, "input delta-series JSON")->required();
    oracle->add_option("--max-weight", o.W, "weighted degree cap");

    auto* chke = app.add_subcommand("check-eigen", "verify the delta eigenvector equations");
    add_common(chke);
    chke->add_option("--in", o.in, "input delta-series JSON")->required();
    chke->add_option("--coeffs", o.coeffs, "coefficient file");
    chke->add_option("--eigen-system", o.eigen_file, "eigen system JSON");
    chke->add_option("--n-list", o.n_list, "Hecke indices to test");

    auto* chkc = app.add_subcommand("check-classical", "verify the classical eigen equations");
    add_common(chkc);
    chkc->add_option("--in", o.in, "input series JSON")->required();
    chkc->add_option("--coeffs", o.coeffs, "coefficient file");
    chkc->add_option("--eigen-system", o.eigen_file, "eigen system JSON");
    chkc->add_option("--n-list", o.n_list, "Hecke indices to test");

    auto* lift = app.add_subcommand("lift", "characteristic-zero f^sharp2 with integrality");
    add_common(lift);
    lift->add_option("--coeffs", o.coeffs, "coefficient file")->required();
    lift->add_option("--M", o.M, "p-adic digits of working precision");
    lift->add_flag("--check-knacond", o.check_knacond, "verify the coefficient recursions");
    lift->add_option("--out-reduced", o.out_reduced, "path for the reduced series");

    auto* red = app.add_subcommand("reduce", "reduce a p-adic order-2 series mod p");
    add_common(red);
    red->add_option("--in", o.in, "input p-adic series JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::string echo;
    for (int i = 1; i < argc; ++i) {
        if (i > 1) echo += " ";
        echo += argv[i];
    }
    Transcript tr{sub->get_name(), echo, config_json(o)};

    try {
        validate_pn(o);
        uint64_t p = static_cast<uint64_t>(o.p);

        if (sub == divisor) {
            auto a = divisor_sum_coeffs(o.N, o.nmax);
            return tr.emit(o.out, to_json(a), "coeffs");
        }

        if (sub == phifrom) {
            EigenSystem sys = system_from_options(o);
            auto phi = eigen_series(sys, Fp(o.gamma, sys.p), o.prec);
            return tr.emit(o.out, to_json(phi), "series");
        }

        if (sub == sharp2c || sub == sharp1c) {
            auto a = provider_from_json(load_json_file(o.coeffs));
            auto sys = EigenSystem::from_provider(a, p, o.N, o.kappa);
            auto phi = a.series_mod(p, o.prec);
            auto rep = eigen_check_classical(phi, sys, {2, 3});
            tr.add_report(rep);
            require(rep.all_pass(), "eigencheck-failed",
                    "input coefficients are not an eigen system");
            DeltaSeries1 f = sub == sharp2c ? sharp2(sys, phi) : sharp1(sys, phi);
            return tr.emit(o.out, to_json(f.truncated(o.prec)), "series");
        }

        if (sub == hecke) {
            auto f = delta1_from_json(load_json_file(o.in));
            return tr.emit(o.out, to_json(hecke_delta(f, o.n, o.kappa, o.N)), "series");
        }

        if (sub == hecke2) {
            auto f = delta2_from_json(load_json_file(o.in));
            return tr.emit(o.out, to_json(hecke_delta_order2(f, o.n, o.kappa, o.N)), "series");
        }

        if (sub == puc || sub == ptpc) {
            auto f = delta1_from_json(load_json_file(o.in));
            if (sub == puc && o.use_oracle) {
                auto out = pu_oracle(f, o.W);
                tr.extra["safe_degree"] = out.safe_degree;
                return tr.emit(o.out, to_json(out.series), "series");
            }
            DeltaSeries1 out = sub == puc ? pu(f) : ptp(f, o.kappa);
            return tr.emit(o.out, to_json(out), "series");
        }

        if (sub == oracle) {
            auto f = delta1_from_json(load_json_file(o.in));
            auto out = pu_oracle(f, o.W);
            tr.extra["safe_degree"] = out.safe_degree;
            json prec = json::object();
            for (const auto& [b, pr] : out.comp_prec) prec[std::to_string(b)] = pr;
            tr.extra["component_precision"] = prec;
            return tr.emit(o.out, to_json(out.series), "series");
        }

        if (sub == dec) {
            auto f = delta1_from_json(load_json_file(o.in));
            auto prof = structure_decompose(f);
            tr.add_check("structure_decompose", prof.has_value(),
                         f.is_zero() ? 0 : f.min_prec());
            json artifact;
            if (prof) {
                json phis = json::array();
                for (const auto& s : prof->phis) phis.push_back(to_json(s));
                artifact = {{"phi0", to_json(prof->phi0)},
                            {"phis", phis},
                            {"taylor", prof->taylor}};
            }
            if (prof && (!o.coeffs.empty() || !o.eigen_file.empty())) {
                EigenSystem sys = system_from_options(o);
                auto d = decompose_eigenform(f, sys);
                tr.add_report(d.eigen_report);
                json cs = json::array();
                for (const auto& ci : d.c_list) cs.push_back(ci.value());
                artifact["eigen_decomposition"] = {
                    {"c", d.c.value()},
                    {"c_list", cs},
                    {"phi", to_json(d.phi)},
                    {"tail_relation_verified", d.tail_relation_verified}};
            }
            return tr.emit(o.out, artifact, "decomposition");
        }

        if (sub == chke || sub == chkc) {
            EigenSystem sys = system_from_options(o);
            if (sub == chke) {
                auto f = delta1_from_json(load_json_file(o.in));
                auto list = o.n_list.empty() ? default_n_list(sys, f.min_prec()) : o.n_list;
                tr.add_report(eigen_check_delta(f, sys, list));
            } else {
                auto phi = laurent_from_json(load_json_file(o.in));
                auto list = o.n_list.empty() ? default_n_list(sys, phi.prec()) : o.n_list;
                tr.add_report(eigen_check_classical(phi, sys, list));
            }
            return tr.emit(o.out, json(), "series");
        }

        if (sub == lift) {
            auto a = provider_from_json(load_json_file(o.coeffs));
            if (o.check_knacond) {
                int64_t i_max = 0, pi = 1;
                while (pi * static_cast<int64_t>(p) * 8 <= a.n_max() && i_max < 3) {
                    pi *= static_cast<int64_t>(p);
                    ++i_max;
                }
                auto rep = coeff_recursion_check(a, p, o.kappa, i_max, 8);
                tr.add_report(rep.checks);
            }
            auto F = sharp2_lift(a, p, o.kappa, o.prec, o.M);
            tr.add_check("integrality", true, o.prec);
            tr.extra["audit"] = {{"digits_div_p", F.audit.digits_div_p},
                                 {"digits_div_n", F.audit.digits_div_n},
                                 {"min_valuation", F.audit.min_valuation}};
            auto reduced = reduce_mod_p(F);
            if (!o.out_reduced.empty()) {
                save_json_file(o.out_reduced, to_json(reduced));
                tr.extra["reduced_artifact"] = o.out_reduced;
            } else {
                tr.extra["reduced"] = to_json(reduced);
            }
            return tr.emit(o.out, to_json(F), "lift");
        }

        if (sub == red) {
            auto F = padic2_from_json(load_json_file(o.in));
            return tr.emit(o.out, to_json(reduce_mod_p(F)), "series");
        }

        fail("invalid-input", "unknown subcommand");
    } catch (const math_error& e) {
        json t = {{"command", tr.command}, {"argv", tr.echo},   {"config", tr.config},
                  {"checks", tr.checks},   {"pass", false},       {"error", e.kind()},
                  {"message", e.what()},   {"version", kVersion}};
        std::cout << t.dump(2) << std::endl;
        if (e.kind() == "invalid-input" || e.kind() == "range-exceeded" ||
            e.kind() == "missing-eigenvalue")
            return 2;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
