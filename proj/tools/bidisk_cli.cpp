// Command-line front end: parse inner-function specs, run the kernel and
// commutator analyses, emit machine-readable reports.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bidisk/bidisk.hpp"

namespace {

using namespace bidisk;

struct RunConfig {
    int grid_n = 256;
    std::vector<int> ladder = {4, 6, 8, 10, 12};
    double tol_rank = 1e-7;
    double drop_tol = 1e-8;
    double cluster_tol = 1e-6;
    std::uint64_t seed = 20240601;
    std::string out_path;
    std::string flavor = "max1min2";
    int var = 1;
    int trunc = 6;

    void validate() const {
        if (grid_n < 64 || (grid_n & (grid_n - 1)) != 0)
            throw DegenerateInput("grid must be a power of two, at least 64");
        if (ladder.size() < 3) throw DegenerateInput("ladder must have at least 3 rungs");
        for (std::size_t i = 1; i < ladder.size(); ++i)
            if (ladder[i] <= ladder[i - 1])
                throw DegenerateInput("ladder must be strictly increasing");
    }
};

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DegenerateInput("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    const nlohmann::json j = load_json(path);
    if (j.contains("grid")) cfg.grid_n = j["grid"].get<int>();
    if (j.contains("ladder")) cfg.ladder = j["ladder"].get<std::vector<int>>();
    if (j.contains("tol_rank")) cfg.tol_rank = j["tol_rank"].get<double>();
    if (j.contains("drop_tol")) cfg.drop_tol = j["drop_tol"].get<double>();
    if (j.contains("cluster_tol")) cfg.cluster_tol = j["cluster_tol"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) cfg.out_path = j["out"].get<std::string>();
    if (j.contains("flavor")) cfg.flavor = j["flavor"].get<std::string>();
}

void emit(const RunConfig& cfg, const std::string& json) {
    std::cout << json << "\n";
    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path);
        out << json << "\n";
    }
}

int cmd_verify_inner(const RunConfig& cfg, const std::string& spec_path) {
    const InnerSpec spec = parse_inner_spec(load_json(spec_path));
    const auto deviation = [&](int n) {
        return std::visit([&](const auto& f) { return verify_inner(f, n); }, spec);
    };
    const double dev = deviation(cfg.grid_n);
    const double dev2 = deviation(2 * cfg.grid_n);
    const bool pass = dev <= 1e-10 && dev2 <= 1e-10;
    JsonWriter w;
    w.begin_object();
    w.key("deviation").value(dev);
    w.key("deviation_doubled_grid").value(dev2);
    w.key("grid").value(cfg.grid_n);
    w.key("inner").value(pass);
    w.end_object();
    emit(cfg, w.str());
    return pass ? 0 : 1;
}

int cmd_agler_decompose(const RunConfig& cfg, const std::string& spec_path) {
    const RationalInner theta = to_rational(parse_inner_spec(load_json(spec_path)));
    const ConstraintSystem sys = solve_constraints(theta);
    ExtremalOptions opt;
    opt.seed = cfg.seed;
    const PairFlavor flavor =
        cfg.flavor == "min1max2" ? PairFlavor::min1max2 : PairFlavor::max1min2;
    const AglerPair pair = extremal_pair(sys, flavor, opt);
    emit(cfg, to_json(pair));
    const double resid = identity_residual(theta, pair, 100, cfg.seed);
    return resid <= 1e-8 ? 0 : 1;
}

int cmd_commutator_rank(const RunConfig& cfg, const std::string& spec_path) {
    const RationalInner theta = to_rational(parse_inner_spec(load_json(spec_path)));
    const RankReport rep = rank_ladder(theta, cfg.var, cfg.ladder, cfg.tol_rank, cfg.grid_n,
                                       cfg.drop_tol);
    emit(cfg, to_json(rep));
    return rep.verdict == RankVerdict::inconclusive ? 1 : 0;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& spec_path, bool with_matrix,
                 const std::string& csv_path) {
    const InnerSpec spec = parse_inner_spec(load_json(spec_path));
    const RationalInner theta = to_rational(spec);
    const ModelSpace ms(theta, cfg.grid_n);
    const ModelSpaceFrame fr = build_frame(ms, cfg.trunc, cfg.trunc, cfg.drop_tol);
    const OperatorMatrix s = compress_shift(ms, fr, cfg.var);
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        for (int i = 0; i < fr.dim; ++i) {
            for (int j = 0; j < fr.dim; ++j) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g%+.17gi", s.entries(i, j).real(),
                              s.entries(i, j).imag());
                csv << (j ? "," : "") << buf;
            }
            csv << "\n";
        }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(s.entries, false);
    const double max_mod = es.eigenvalues().cwiseAbs().maxCoeff();
    const bool contraction_ok = max_mod <= 1.0 + 1e-8;

    bool containment_ok = true;
    double zero_dist = 0.0;
    const bool is_product = std::holds_alternative<ProductInner>(spec);
    if (is_product && cfg.var == 1 &&
        std::get<ProductInner>(spec).phi.degree() > 0) {
        const auto rep = point_spectrum_check(std::get<ProductInner>(spec), cfg.trunc, cfg.grid_n);
        zero_dist = rep.max_distance;
        containment_ok = rep.contains_zeros();
    }

    JsonWriter w;
    w.begin_object();
    w.key("var").value(cfg.var);
    w.key("D").value(cfg.trunc);
    w.key("dim").value(fr.dim);
    w.key("eigenvalues").begin_array();
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) > std::abs(b) : a.real() > b.real();
    });
    for (const Complex& v : ev) w.value(v);
    w.end_array();
    w.key("max_modulus").value(max_mod);
    w.key("contraction_ok").value(contraction_ok);
    if (is_product && cfg.var == 1) w.key("phi_zero_max_distance").value(zero_dist);
    if (with_matrix) {
        w.key("matrix").begin_array();
        for (int i = 0; i < fr.dim; ++i) {
            w.begin_array();
            for (int j = 0; j < fr.dim; ++j) w.value(s.entries(i, j));
            w.end_array();
        }
        w.end_array();
    }
    w.end_object();
    emit(cfg, w.str());
    return contraction_ok && containment_ok ? 0 : 1;
}

int cmd_reducing_test(const RunConfig& cfg, const std::string& spec_path) {
    const RationalInner theta = to_rational(parse_inner_spec(load_json(spec_path)));
    ReducingOptions opt;
    opt.grid_n = cfg.grid_n;
    opt.seed = cfg.seed;
    const ReducingReport rep = reducing_harness(theta, opt);
    emit(cfg, to_json(rep));
    return 0;
}

int cmd_theorem_suite(const RunConfig& cfg, const std::string& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DegenerateInput("no .json specs in " + dir);

    bool all_pass = true;
    JsonWriter w;
    w.begin_object();
    w.key("results").begin_array();
    for (const auto& path : files) {
        const std::string name = path.stem().string();
        const RationalInner theta = to_rational(parse_inner_spec(load_json(path.string())));
        const RankLawReport t1 =
            rank_law_harness(theta, cfg.grid_n, cfg.ladder, cfg.tol_rank, cfg.seed);
        bool t2_pass = true;
        std::string t2_verdict;
        try {
            ReducingOptions opt;
            opt.grid_n = cfg.grid_n;
            opt.seed = cfg.seed;
            t2_verdict = to_string(reducing_harness(theta, opt).verdict);
        } catch (const InconsistentWithTheorem& e) {
            t2_pass = false;
            t2_verdict = e.what();
        }
        all_pass = all_pass && t1.consistent && t2_pass;
        std::cerr << name << ": rank_law=" << (t1.consistent ? "pass" : "FAIL")
                  << " reducing=" << (t2_pass ? "pass" : "FAIL") << " (" << t2_verdict << ")\n";
        w.begin_object();
        w.key("name").value(name);
        w.key("degree").begin_array().value(t1.deg1).value(t1.deg2).end_array();
        w.key("rank_law_pass").value(t1.consistent);
        w.key("rank_verdict").value(to_string(t1.ladder.verdict));
        if (t1.ladder.verdict == RankVerdict::stabilized) w.key("rank").value(t1.ladder.rank);
        w.key("reducing_pass").value(t2_pass);
        w.key("reducing_verdict").value(t2_verdict);
        w.end_object();
    }
    w.end_array();
    w.key("all_pass").value(all_pass);
    w.end_object();
    emit(cfg, w.str());
    return all_pass ? 0 : 1;
}

int report_error(const char* kind, const std::exception& e, int code) {
    JsonWriter w;
    w.begin_object();
    w.key("error").begin_object();
    w.key("kind").value(kind);
    w.key("message").value(e.what());
    w.end_object();
    w.end_object();
    std::cerr << w.str() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Agler kernel decompositions and compressed-shift analysis for two-variable "
        "rational inner functions on the bidisk"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::string spec_path, corpus_dir, config_path;
    if (const char* env = std::getenv("BIDISK_CONFIG")) config_path = env;

    app.add_option("--config", config_path, "JSON config file (flags given explicitly win)");
    app.add_option("--grid", cfg.grid_n, "torus grid size (power of two, >= 64)");
    app.add_option("--ladder", cfg.ladder, "truncation ladder degrees")->delimiter(',');
    app.add_option("--tol-rank", cfg.tol_rank, "relative numerical-rank tolerance");
    app.add_option("--seed", cfg.seed, "seed for sample-point generators");
    app.add_option("--out", cfg.out_path, "write the JSON report to this path as well");

    auto* verify = app.add_subcommand("verify-inner", "sup-norm deviation of |theta| from 1");
    verify->add_option("spec", spec_path, "inner-function spec JSON")->required();

    auto* decompose = app.add_subcommand("agler-decompose", "extremal Agler kernel pair");
    decompose->add_option("spec", spec_path)->required();
    decompose->add_option("--flavor", cfg.flavor, "max1min2 | min1max2")
        ->check(CLI::IsMember({"max1min2", "min1max2"}));

    auto* rank = app.add_subcommand("commutator-rank", "singular-value ladder of [S*,S]");
    rank->add_option("spec", spec_path)->required();
    rank->add_option("--var", cfg.var)->check(CLI::IsMember({1, 2}));

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the truncated shift");
    bool with_matrix = false;
    std::string matrix_csv;
    spectrum->add_option("spec", spec_path)->required();
    spectrum->add_option("--var", cfg.var)->check(CLI::IsMember({1, 2}));
    spectrum->add_option("--trunc", cfg.trunc, "truncation degree");
    spectrum->add_flag("--with-matrix", with_matrix, "include the operator matrix in the report");
    spectrum->add_option("--matrix-csv", matrix_csv, "also write the operator matrix as CSV");

    auto* reducing = app.add_subcommand("reducing-test", "reducing Agler subspace harness");
    reducing->add_option("spec", spec_path)->required();

    auto* suite = app.add_subcommand("theorem-suite", "run both harnesses over a spec directory");
    suite->add_option("corpus", corpus_dir, "directory of spec JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit cleanly; bad usage is an input error
    }

    try {
        if (!config_path.empty()) {
            // values from the config file fill in anything not set on the
            // command line; explicit flags take precedence
            RunConfig file_cfg = cfg;
            apply_config_file(file_cfg, config_path);
            if (!app.count("--grid")) cfg.grid_n = file_cfg.grid_n;
            if (!app.count("--ladder")) cfg.ladder = file_cfg.ladder;
            if (!app.count("--tol-rank")) cfg.tol_rank = file_cfg.tol_rank;
            if (!app.count("--seed")) cfg.seed = file_cfg.seed;
            if (!app.count("--out")) cfg.out_path = file_cfg.out_path;
            if (!decompose->count("--flavor")) cfg.flavor = file_cfg.flavor;
        }
        cfg.validate();

        if (verify->parsed()) return cmd_verify_inner(cfg, spec_path);
        if (decompose->parsed()) return cmd_agler_decompose(cfg, spec_path);
        if (rank->parsed()) return cmd_commutator_rank(cfg, spec_path);
        if (spectrum->parsed()) return cmd_spectrum(cfg, spec_path, with_matrix, matrix_csv);
        if (reducing->parsed()) return cmd_reducing_test(cfg, spec_path);
        if (suite->parsed()) return cmd_theorem_suite(cfg, corpus_dir);
    } catch (const InconsistentWithTheorem& e) {
        return report_error("InconsistentWithTheorem", e, 1);
    } catch (const NotLoewnerMaximal& e) {
        return report_error("NotLoewnerMaximal", e, 1);
    } catch (const UnstableDenominator& e) {
        return report_error("UnstableDenominator", e, 2);
    } catch (const CommonFactor& e) {
        return report_error("CommonFactor", e, 2);
    } catch (const DegenerateInput& e) {
        return report_error("DegenerateInput", e, 2);
    } catch (const nlohmann::json::exception& e) {
        return report_error("InvalidJson", e, 2);
    } catch (const std::exception& e) {
        return report_error("Unexpected", e, 2);
    }
    return 2;
}
