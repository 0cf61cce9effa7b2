#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "deltap/deltaseries.hpp"
#include "deltap/lift.hpp"
#include "deltap/qseries.hpp"

namespace deltap {

using nlohmann::json;

inline json to_json(const LaurentSeries& s) {
    json coeffs = json::array();
    for (int64_t e = s.low(); e < s.prec(); ++e) coeffs.push_back(s.coeff(e).value());
    return {{"p", s.prime()}, {"low", s.low()}, {"prec", s.prec()}, {"coeffs", coeffs}};
}

inline LaurentSeries laurent_from_json(const json& j) {
    require(j.contains("p") && j.contains("low") && j.contains("prec") && j.contains("coeffs"),
            "invalid-input", "series JSON needs p, low, prec, coeffs");
    uint64_t p = j.at("p").get<uint64_t>();
    check_prime_field(p);
    std::vector<uint32_t> c;
    for (const auto& v : j.at("coeffs"))
        c.push_back(static_cast<uint32_t>(fpmod::from_int(v.get<int64_t>(), p)));
    return {p, j.at("low").get<int64_t>(), j.at("prec").get<int64_t>(), std::move(c)};
}

inline json to_json(const DeltaSeries1& f) {
    json comps = json::object();
    DeltaSeries1 norm = f.normalized();
    for (const auto& [m, s] : norm.components()) comps[std::to_string(m)] = to_json(s);
    return {{"p", f.prime()}, {"components", comps}};
}

inline DeltaSeries1 delta1_from_json(const json& j) {
    require(j.contains("p") && j.contains("components"), "invalid-input",
            "delta-series JSON needs p and components");
    uint64_t p = j.at("p").get<uint64_t>();
    check_prime_field(p);
    DeltaSeries1 f(p);
    int64_t top = 0;
    for (const auto& [key, val] : j.at("components").items())
        top = std::max(top, static_cast<int64_t>(std::stoll(key)));
    if (top > f.mprime_max()) f = DeltaSeries1(p, top);
    for (const auto& [key, val] : j.at("components").items())
        f.set_component(std::stoll(key), laurent_from_json(val));
    return f;
}

inline json to_json(const DeltaSeries2& f) {
    json comps = json::object();
    for (const auto& [k, s] : f.components()) {
        if (s.is_zero()) continue;
        comps[std::to_string(k.first) + "," + std::to_string(k.second)] = to_json(s);
    }
    return {{"p", f.prime()}, {"components", comps}};
}

inline DeltaSeries2 delta2_from_json(const json& j) {
    uint64_t p = j.at("p").get<uint64_t>();
    check_prime_field(p);
    DeltaSeries2 f(p);
    for (const auto& [key, val] : j.at("components").items()) {
        auto comma = key.find(',');
        require(comma != std::string::npos, "invalid-input",
                "order-2 component keys look like \"m1,m2\"");
        f.set_component(std::stoll(key.substr(0, comma)), std::stoll(key.substr(comma + 1)),
                        laurent_from_json(val));
    }
    return f;
}

inline json to_json(const CoeffProvider& a) {
    json arr = json::array();
    for (int64_t n = 1; n <= a.n_max(); ++n) arr.push_back(a.at(n));
    return arr;
}

inline CoeffProvider provider_from_json(const json& j) {
    require(j.is_array(), "invalid-input", "coefficient file must be a JSON array a_1..a_n");
    std::vector<int64_t> vals;
    for (const auto& v : j) vals.push_back(v.get<int64_t>());
    return CoeffProvider(std::move(vals));
}

inline json to_json(const EigenSystem& sys) {
    json lam = json::object();
    for (const auto& [n, l] : sys.lambda) lam[std::to_string(n)] = l.value();
    return {{"p", sys.p},           {"N", sys.N},   {"kappa", sys.kappa},
            {"lambda", lam},        {"lambda_p", sys.lambda_p.value()},
            {"n_max", sys.n_max}};
}

inline EigenSystem eigensystem_from_json(const json& j) {
    EigenSystem sys;
    sys.p = j.at("p").get<uint64_t>();
    check_prime_field(sys.p);
    sys.N = j.at("N").get<int64_t>();
    sys.kappa = j.at("kappa").get<int64_t>();
    sys.lambda_p = Fp(j.at("lambda_p").get<int64_t>(), sys.p);
    sys.n_max = 0;
    for (const auto& [key, val] : j.at("lambda").items()) {
        int64_t n = std::stoll(key);
        sys.lambda[n] = Fp(val.get<int64_t>(), sys.p);
        sys.n_max = std::max(sys.n_max, n);
    }
    if (j.contains("n_max")) sys.n_max = j.at("n_max").get<int64_t>();
    return sys;
}

inline json to_json(const PadicDeltaSeries2& F) {
    json terms = json::array();
    for (const auto& [k, v] : F.terms) {
        json t = {{"m", k[0]}, {"m1", k[1]}, {"m2", k[2]}};
        if (v.is_zero_class()) {
            // No known digits: record the divisibility bound with unit 0.
            t["val"] = v.is_exact_zero() ? F.M : std::min<int64_t>(v.valuation_at_least(), F.M);
            t["unit"] = 0;
        } else {
            t["val"] = v.valuation();
            t["unit"] = v.unit();
        }
        terms.push_back(t);
    }
    return {{"p", F.p}, {"M", F.M}, {"prec", F.prec}, {"terms", terms}};
}

inline PadicDeltaSeries2 padic2_from_json(const json& j) {
    PadicDeltaSeries2 F{j.at("p").get<uint64_t>(), j.at("M").get<int>(),
                        j.contains("prec") ? j.at("prec").get<int64_t>() : 0,
                        {},
                        {}};
    check_prime_field(F.p);
    for (const auto& t : j.at("terms")) {
        Mono2 k{t.at("m").get<int64_t>(), t.at("m1").get<int64_t>(), t.at("m2").get<int64_t>()};
        int64_t val = t.at("val").get<int64_t>();
        uint64_t unit = t.at("unit").get<uint64_t>();
        Padic v = unit == 0 ? Padic::zero_to_precision(F.p, val)
                            : Padic::from_unit(F.p, val, unit, F.M);
        if (F.prec == 0) F.prec = std::max(F.prec, mono2_weight(k, F.p) + 1);
        F.terms.emplace(k, v);
    }
    return F;
}

inline json to_json(const CheckReport& rep) {
    json arr = json::array();
    for (const auto& it : rep.items)
        arr.push_back({{"name", it.name}, {"pass", it.pass}, {"precision", it.precision}});
    return arr;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "invalid-input", "cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    require(out.good(), "invalid-input", "cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace deltap
