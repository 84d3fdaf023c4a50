// kms-phase: command-line front end over the kmsphase C API.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kmsphase/kmsphase.h"

using json = nlohmann::json;

namespace {

struct Common {
    std::string instance;
    std::string ideals;
    double tol = 1e-9;
    double snap_tol = 1e-9;
    std::string format = "json";
    int jobs = 1;
    int k_max = 20;
    bool log2 = false;
    std::string out;
};

int report_error(kms_status s) {
    std::cerr << "error: " << kms_last_error_message() << "\n";
    return static_cast<int>(s);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string csv_to_json_array(const std::string& csv) {
    json a = json::array();
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        if (item.find_first_not_of(" \t", pos) != std::string::npos) throw std::runtime_error("bad number '" + item + "'");
        if (v == static_cast<long long>(v) && item.find('.') == std::string::npos)
            a.push_back(static_cast<long long>(v));
        else
            a.push_back(v);
    }
    return a.dump();
}

std::string options_json(const Common& c) {
    json o{{"tol", c.tol}, {"snap_tol", c.snap_tol}, {"format", c.format}, {"jobs", c.jobs}, {"k_max", c.k_max}, {"log2", c.log2}};
    if (!c.ideals.empty()) {
        if (c.ideals == "cnp")
            o["ideals"] = "cnp";
        else
            o["ideals"] = json::parse(read_file(c.ideals));
    }
    return o.dump();
}

void add_common(CLI::App* cmd, Common& c, bool with_format) {
    cmd->add_option("instance", c.instance, "instance JSON file")->required();
    cmd->add_option("--ideals", c.ideals, "ideal-lattice JSON file, or 'cnp' for the computed lattice");
    cmd->add_option("--tol", c.tol, "residual tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--snap-tol", c.snap_tol, "eigenvalue snap tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--k-max", c.k_max, "largest word length for slope tables")->check(CLI::Range(2, 64));
    cmd->add_flag("--log2", c.log2, "report entropies and beta in bits");
    cmd->add_option("-o,--out", c.out, "write the report to a file instead of stdout");
    if (with_format) cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

class Session {
public:
    explicit Session(const Common& c) : c_(c) {}
    ~Session() {
        if (st_) kms_state_free(st_);
        if (inst_) kms_instance_free(inst_);
    }
    kms_status load() { return kms_instance_from_file(c_.instance.c_str(), &inst_); }
    kms_instance* inst() { return inst_; }
    kms_state*& state() { return st_; }

    int emit(kms_status s, char* text) {
        if (s != KMS_OK) return report_error(s);
        if (c_.out.empty()) {
            std::fputs(text, stdout);
        } else {
            std::ofstream os(c_.out);
            os << text;
        }
        kms_string_free(text);
        return 0;
    }

private:
    const Common& c_;
    kms_instance* inst_ = nullptr;
    kms_state* st_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium state structure of product-system algebras for finite instances"};
    app.require_subcommand(1);

    Common c;
    std::string beta, beta_min, beta_max, F, tau, state_path, query_path, degree, dump_path;
    int steps = 50, K = 3, oracle_K = -1;
    bool have_F = false;

    auto* entropy = app.add_subcommand("entropy", "entropy report, or the slope table with --format csv");
    add_common(entropy, c, true);
    entropy->add_option("--tau", tau, "comma-separated trace vector for the tracial entropy");

    auto* simplex = app.add_subcommand("simplex", "extreme points of the trace simplices at one beta");
    add_common(simplex, c, false);
    simplex->add_option("--beta", beta, "inverse temperature, e.g. 1.5 or log(3)")->required();
    simplex->add_option("--F", F, "comma-separated 1-based colors; omit for every color set");

    auto* phase = app.add_subcommand("phase", "phase diagram over a beta range");
    add_common(phase, c, true);
    phase->add_option("--beta-min", beta_min)->required();
    phase->add_option("--beta-max", beta_max)->required();
    phase->add_option("--steps", steps)->check(CLI::PositiveNumber);

    auto* seval = app.add_subcommand("state-eval", "build a state and evaluate a query");
    add_common(seval, c, false);
    seval->add_option("--state", state_path, "state JSON file")->required();
    seval->add_option("--query", query_path, "query JSON file");
    seval->add_option("--oracle-K", oracle_K, "also evaluate on the Fock space truncated at K");
    seval->add_option("--check-kms", degree, "comma-separated degree bound for the KMS check");
    seval->add_option("--K", K, "truncation for the KMS check");

    auto* wold = app.add_subcommand("wold", "Wold decomposition of a trace");
    add_common(wold, c, false);
    wold->add_option("--beta", beta)->required();
    wold->add_option("--tau", tau, "comma-separated trace vector")->required();

    auto* verify = app.add_subcommand("verify", "operator identities on the truncated Fock space");
    add_common(verify, c, false);
    verify->add_option("--K", K, "truncation degree per color")->check(CLI::Range(1, 64));
    verify->add_option("--dump-ops", dump_path, "write operators as sparse triplets");

    auto* ground = app.add_subcommand("ground", "ground states");
    add_common(ground, c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Session s(c);
        if (kms_status st = s.load(); st != KMS_OK) return report_error(st);
        const std::string opts = options_json(c);
        char* text = nullptr;

        if (*entropy) {
            std::string taus = tau.empty() ? "" : "[" + csv_to_json_array(tau) + "]";
            {
            kms_status st = kms_entropy(s.inst(), taus.empty() ? nullptr : taus.c_str(), opts.c_str(), &text);
            return s.emit(st, text);
        }
        }
        if (*simplex) {
            have_F = simplex->count("--F") > 0;
            std::string fj = have_F ? csv_to_json_array(F) : "";
            {
            kms_status st = kms_simplex(s.inst(), beta.c_str(), have_F ? fj.c_str() : nullptr, opts.c_str(), &text);
            return s.emit(st, text);
        }
        }
        if (*phase) {
            kms_status st = kms_phase(s.inst(), beta_min.c_str(), beta_max.c_str(), steps, opts.c_str(), &text);
            return s.emit(st, text);
        }
        if (*wold) {
            std::string tj = csv_to_json_array(tau);
            {
            kms_status st = kms_wold(s.inst(), beta.c_str(), tj.c_str(), opts.c_str(), &text);
            return s.emit(st, text);
        }
        }
        if (*ground) {
            kms_status st = kms_ground(s.inst(), opts.c_str(), &text);
            return s.emit(st, text);
        }
        if (*verify) {
            if (!dump_path.empty()) {
                kms_fock* fock = nullptr;
                std::string box = std::to_string(K);
                if (kms_status st = kms_fock_build(s.inst(), box.c_str(), &fock); st != KMS_OK) return report_error(st);
                kms_status st = kms_fock_dump(fock, dump_path.c_str());
                kms_fock_free(fock);
                if (st != KMS_OK) return report_error(st);
            }
            {
            kms_status st = kms_verify(s.inst(), K, opts.c_str(), &text);
            return s.emit(st, text);
        }
        }
        if (*seval) {
            std::string sj = read_file(state_path);
            if (kms_status st = kms_state_build(s.inst(), sj.c_str(), opts.c_str(), &s.state()); st != KMS_OK)
                return report_error(st);
            if (kms_status st = kms_state_describe(s.state(), &text); st != KMS_OK) return report_error(st);
            json out = json::parse(text);
            kms_string_free(text);
            if (!query_path.empty()) {
                std::string qj = read_file(query_path);
                double v = 0;
                if (kms_status st = kms_state_evaluate(s.state(), qj.c_str(), &v); st != KMS_OK) return report_error(st);
                out["value"] = v;
                if (oracle_K >= 0) {
                    if (kms_status st = kms_state_oracle_eval(s.state(), qj.c_str(), oracle_K, &text); st != KMS_OK)
                        return report_error(st);
                    out["oracle"] = json::parse(text);
                    kms_string_free(text);
                }
            }
            if (!degree.empty()) {
                std::string bj = csv_to_json_array(degree);
                if (kms_status st = kms_state_check_kms(s.state(), bj.c_str(), K, 1e-10, &text); st != KMS_OK)
                    return report_error(st);
                out["kms_check"] = json::parse(text);
                kms_string_free(text);
            }
            std::string txt = out.dump(2) + "\n";
            return s.emit(KMS_OK, strdup(txt.c_str()));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
