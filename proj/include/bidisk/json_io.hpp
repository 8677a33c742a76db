#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "agler.hpp"
#include "analysis.hpp"
#include "bipoly.hpp"
#include "inner_function.hpp"
#include "reducing.hpp"

namespace bidisk {

/// Deterministic JSON emitter: fixed key order (insertion order), floats at
/// 17 significant digits, no locale dependence.
class JsonWriter {
  public:
    JsonWriter& begin_object() { return open('{'); }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& begin_array() { return open('['); }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& key(const std::string& k) {
        comma();
        s_ += '"';
        s_ += k;
        s_ += "\":";
        pending_value_ = true;
        return *this;
    }

    JsonWriter& value(double v) {
        comma();
        if (std::isfinite(v)) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            s_ += buf;
        } else {
            s_ += "null";
        }
        return *this;
    }

    JsonWriter& value(int v) {
        comma();
        s_ += std::to_string(v);
        return *this;
    }

    JsonWriter& value(bool v) {
        comma();
        s_ += v ? "true" : "false";
        return *this;
    }

    JsonWriter& value(const std::string& v) {
        comma();
        s_ += '"';
        for (char c : v) {
            if (c == '"' || c == '\\') s_ += '\\';
            s_ += c;
        }
        s_ += '"';
        return *this;
    }

    JsonWriter& value(const char* v) { return value(std::string(v)); }

    JsonWriter& null_value() {
        comma();
        s_ += "null";
        return *this;
    }

    JsonWriter& value(Complex v) {
        begin_array();
        value(v.real());
        value(v.imag());
        return end_array();
    }

    const std::string& str() const { return s_; }

  private:
    JsonWriter& open(char c) {
        comma();
        s_ += c;
        depth_first_.push_back(true);
        return *this;
    }

    JsonWriter& close(char c) {
        s_ += c;
        depth_first_.pop_back();
        return *this;
    }

    void comma() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!depth_first_.empty()) {
            if (!depth_first_.back()) s_ += ',';
            depth_first_.back() = false;
        }
    }

    std::string s_;
    std::vector<bool> depth_first_;
    bool pending_value_ = false;
};

inline void write_bipoly(JsonWriter& w, const BiPoly& p) {
    w.begin_object();
    w.key("degree").begin_array().value(p.deg1()).value(p.deg2()).end_array();
    w.key("coeffs").begin_array();
    for (int i = 0; i <= p.deg1(); ++i) {
        w.begin_array();
        for (int j = 0; j <= p.deg2(); ++j) w.value(p.coeff(i, j));
        w.end_array();
    }
    w.end_array();
    w.end_object();
}

inline void write_gram_kernel(JsonWriter& w, const GramKernel& k) {
    w.begin_object();
    w.key("denom");
    write_bipoly(w, k.denom);
    w.key("basis_degree").begin_array().value(k.deg1).value(k.deg2).end_array();
    w.key("gram").begin_array();
    for (int i = 0; i < k.basis_size(); ++i) {
        w.begin_array();
        for (int j = 0; j < k.basis_size(); ++j) w.value(k.gram(i, j));
        w.end_array();
    }
    w.end_array();
    w.end_object();
}

inline std::string to_json(const AglerPair& pair) {
    JsonWriter w;
    w.begin_object();
    w.key("flavor").value(to_string(pair.flavor));
    w.key("k1");
    write_gram_kernel(w, pair.k1);
    w.key("k2");
    write_gram_kernel(w, pair.k2);
    w.end_object();
    return w.str();
}

inline std::string to_json(const RankReport& rep) {
    JsonWriter w;
    w.begin_object();
    w.key("ladder").begin_array();
    for (const auto& rung : rep.ladder) {
        w.begin_object();
        w.key("D").value(rung.trunc_degree);
        w.key("sv").begin_array();
        for (Eigen::Index i = 0; i < rung.singular_values.size(); ++i)
            w.value(rung.singular_values(i));
        w.end_array();
        w.key("rank").value(rung.numerical_rank);
        w.end_object();
    }
    w.end_array();
    w.key("verdict").value(to_string(rep.verdict));
    if (rep.verdict == RankVerdict::stabilized)
        w.key("rank").value(rep.rank);
    w.key("gap").value(rep.gap);
    w.key("tol").value(rep.tol);
    w.end_object();
    return w.str();
}

inline void write_blaschke(JsonWriter& w, const BlaschkeProduct& b) {
    w.begin_object();
    w.key("zeros").begin_array();
    for (const Complex& z : b.zeros) w.value(z);
    w.end_array();
    w.key("c").value(b.unimodular_constant);
    w.end_object();
}

inline std::string to_json(const ReducingReport& rep) {
    JsonWriter w;
    w.begin_object();
    w.key("verdict").value(to_string(rep.verdict));
    w.key("z1_dependence_of_K1").value(rep.z1_dependence_of_k1);
    w.key("radial_limit_values").begin_array();
    for (const auto& lad : rep.radial.ladders) {
        w.begin_object();
        w.key("tau1").value(lad.tau1);
        w.key("values").begin_array();
        for (const Complex& v : lad.values) w.value(v);
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.key("radial_pass").value(rep.radial.pass);
    w.key("factorization");
    if (rep.factorization) {
        w.begin_object();
        w.key("phi");
        write_blaschke(w, rep.factorization->phi);
        w.key("psi");
        write_blaschke(w, rep.factorization->psi);
        w.end_object();
    } else {
        w.null_value();
    }
    if (rep.factorization)
        w.key("block_off_diag").value(rep.block_off_diag);
    else
        w.key("scan_min_dependence").value(rep.scan_min_dependence);
    w.end_object();
    return w.str();
}

// ---- parsing ----------------------------------------------------------

inline BiPoly parse_bipoly(const nlohmann::json& j) {
    if (!j.contains("degree") || !j.contains("coeffs"))
        throw DegenerateInput("polynomial JSON needs 'degree' and 'coeffs'");
    const int m = j["degree"].at(0).get<int>();
    const int n = j["degree"].at(1).get<int>();
    if (m < 0 || n < 0) throw DegenerateInput("polynomial degree must be nonnegative");
    const auto& rows = j["coeffs"];
    if (static_cast<int>(rows.size()) != m + 1)
        throw DegenerateInput("polynomial coeffs row count does not match degree");
    Eigen::MatrixXcd c(m + 1, n + 1);
    for (int i = 0; i <= m; ++i) {
        const auto& row = rows.at(i);
        if (static_cast<int>(row.size()) != n + 1)
            throw DegenerateInput("polynomial coeffs column count does not match degree");
        for (int jj = 0; jj <= n; ++jj)
            c(i, jj) = Complex(row.at(jj).at(0).get<double>(), row.at(jj).at(1).get<double>());
    }
    return BiPoly(std::move(c));
}

inline BlaschkeProduct parse_blaschke(const nlohmann::json& j) {
    std::vector<Complex> zeros;
    for (const auto& z : j.at("zeros"))
        zeros.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
    Complex c{1.0, 0.0};
    if (j.contains("c")) c = Complex(j["c"].at(0).get<double>(), j["c"].at(1).get<double>());
    return BlaschkeProduct(std::move(zeros), c);
}

/// A parsed inner-function spec: a product of Blaschke factors, a rational
/// inner function given by its stable denominator, or a raw ratio (accepted
/// by verify-inner only, to express candidates that may fail to be inner).
using InnerSpec = std::variant<ProductInner, RationalInner, RationalFn>;

inline InnerSpec parse_inner_spec(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "product")
        return ProductInner{parse_blaschke(j.at("phi")), parse_blaschke(j.at("psi"))};
    if (kind == "rational")
        return RationalInner::from_stable(parse_bipoly(j.at("p")));
    if (kind == "ratio")
        return RationalFn{parse_bipoly(j.at("num")), parse_bipoly(j.at("den"))};
    throw DegenerateInput("unknown inner-function kind: " + kind);
}

/// Canonical rational form of any spec that is actually inner.
inline RationalInner to_rational(const InnerSpec& spec) {
    if (std::holds_alternative<ProductInner>(spec))
        return RationalInner::from_product(std::get<ProductInner>(spec));
    if (std::holds_alternative<RationalInner>(spec)) return std::get<RationalInner>(spec);
    throw DegenerateInput("a raw ratio spec cannot be used here; provide 'product' or 'rational'");
}

}  // namespace bidisk
