// Command-line driver: ingests states or JSON files, runs the certification
// solvers over grids, and streams CSV rows with a JSON mirror.
//
// Exit codes: 0 success, 2 parse or file ingestion error, 3 solver failure
// (rows computed so far are already flushed), 4 precondition failure,
// 5 enumeration cap exceeded.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "randcert/chain.hpp"
#include "randcert/compat.hpp"
#include "randcert/npa.hpp"
#include "randcert/randomness.hpp"
#include "randcert/serialize.hpp"
#include "randcert/steering.hpp"

using nlohmann::json;
using namespace randcert;

namespace {

struct ParseFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string format_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
}

// CSV stream flushed per row plus a JSON mirror rewritten alongside it; a
// crash never corrupts rows already on disk.
class ResultWriter {
  public:
    ResultWriter(const std::string& base, std::string schema, std::vector<std::string> columns)
        : schema_(std::move(schema)), columns_(std::move(columns)), json_path_(base + ".json") {
        csv_.open(base + ".csv");
        if (!csv_) throw ParseFailure("cannot open for writing: " + base + ".csv");
        csv_ << "# schema " << schema_ << "\n";
        for (size_t i = 0; i < columns_.size(); ++i) csv_ << (i ? "," : "") << columns_[i];
        csv_ << "\n" << std::flush;
        mirror_["schema"] = schema_;
        mirror_["columns"] = columns_;
        mirror_["rows"] = json::array();
        write_mirror();
    }

    void row(const std::vector<json>& vals) {
        if (vals.size() != columns_.size()) throw std::logic_error("csv row arity");
        for (size_t i = 0; i < vals.size(); ++i) csv_ << (i ? "," : "") << format_cell(vals[i]);
        csv_ << "\n" << std::flush;
        mirror_["rows"].push_back(vals);
        write_mirror();
    }

    // Extra payload carried only by the JSON mirror (weight maps, hypergraphs).
    void attach(const std::string& key, json payload) {
        mirror_[key] = std::move(payload);
        write_mirror();
    }

  private:
    void write_mirror() { write_json_file(json_path_, mirror_); }

    std::string schema_;
    std::vector<std::string> columns_;
    std::string json_path_;
    std::ofstream csv_;
    json mirror_;
};

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw ParseFailure("bad number: " + tok);
        out.push_back(v);
    }
    if (out.empty()) throw ParseFailure("empty list: " + s);
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_doubles(s)) {
        if (v != std::floor(v)) throw ParseFailure("expected integer list: " + s);
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::string join(const std::vector<double>& v, char sep = ';') {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += format_cell(v[i]);
    }
    return out;
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

json load_json(const std::string& path) {
    try {
        return read_json_file(path);
    } catch (const std::exception& e) {
        throw ParseFailure(e.what());
    }
}

// Named Pauli sets ("XZ", "XYZ", ...) or a measurement-set JSON file.
MeasurementSet load_measurements(const std::string& spec) {
    if (file_exists(spec)) {
        try {
            return measurement_set_from_json(load_json(spec));
        } catch (const json::exception& e) {
            throw ParseFailure(std::string("bad measurement file: ") + e.what());
        }
    }
    MeasurementSet ms;
    for (char c : spec) {
        switch (c) {
            case 'X': ms.povms.push_back(pauli_projectors(PauliAxis::X)); break;
            case 'Y': ms.povms.push_back(pauli_projectors(PauliAxis::Y)); break;
            case 'Z': ms.povms.push_back(pauli_projectors(PauliAxis::Z)); break;
            default: throw ParseFailure("unknown measurement spec: " + spec);
        }
    }
    if (ms.povms.empty()) throw ParseFailure("empty measurement spec");
    return ms;
}

Behavior load_behavior(const std::string& path) {
    try {
        return behavior_from_json(load_json(path));
    } catch (const json::exception& e) {
        throw ParseFailure(std::string("bad behavior file: ") + e.what());
    }
}

void require_solved(conic::SolveStatus s, const std::string& what) {
    if (s != conic::SolveStatus::Optimal && s != conic::SolveStatus::Inaccurate)
        throw SolverFailure(what + ": " + conic::to_string(s));
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

// Runs work(i) for i in [0, n) in index batches of size jobs and hands results
// to emit in index order, so output is independent of scheduling.
template <typename Work, typename Emit>
void batched_for(int n, int jobs, Work work, Emit emit) {
    jobs = std::max(1, jobs);
    using Result = decltype(work(0));
    for (int base = 0; base < n; base += jobs) {
        int count = std::min(jobs, n - base);
        std::vector<std::optional<Result>> slots(count);
        std::vector<std::exception_ptr> errors(count);
        std::vector<std::thread> pool;
        for (int k = 0; k < count; ++k)
            pool.emplace_back([&, k] {
                try {
                    slots[k] = work(base + k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (int k = 0; k < count; ++k) {
            if (errors[k]) std::rethrow_exception(errors[k]);
            emit(base + k, std::move(*slots[k]));
        }
    }
}

// --- steer-rand ------------------------------------------------------------

struct SteerRandArgs {
    std::string assemblage_file, state = "rho_p_theta", meas = "XYZ", out = "steer_rand";
    std::string p_list = "1", theta_list, xset, weights;
    int x_star = 1;
    double eps = 1e-8;
    int jobs = 1;
};

int cmd_steer_rand(const SteerRandArgs& args) {
    conic::SolveOptions opts;
    opts.eps = args.eps;

    // Grid points: either one assemblage file or a (p, theta) product grid.
    struct Point {
        double p = std::nan(""), theta = std::nan("");
        Assemblage a;
    };
    std::vector<Point> points;
    if (!args.assemblage_file.empty()) {
        Point pt;
        try {
            pt.a = assemblage_from_json(load_json(args.assemblage_file));
        } catch (const json::exception& e) {
            throw ParseFailure(std::string("bad assemblage file: ") + e.what());
        }
        points.push_back(std::move(pt));
    } else {
        if (args.state != "rho_p_theta") throw ParseFailure("unknown state family: " + args.state);
        if (args.theta_list.empty()) throw ParseFailure("--theta required with --state");
        auto meas = load_measurements(args.meas);
        for (double p : parse_doubles(args.p_list))
            for (double theta : parse_doubles(args.theta_list)) {
                Point pt;
                pt.p = p;
                pt.theta = theta;
                pt.a = assemblage_from_state(rho_p_theta(p, theta), meas);
                points.push_back(std::move(pt));
            }
    }

    std::map<int, double> set_weights;
    if (!args.xset.empty()) {
        auto inputs = parse_ints(args.xset);
        std::vector<double> w(inputs.size(), 1.0 / static_cast<double>(inputs.size()));
        if (!args.weights.empty()) w = parse_doubles(args.weights);
        if (w.size() != inputs.size()) throw ParseFailure("--weights arity must match --xset");
        for (size_t i = 0; i < inputs.size(); ++i) set_weights[inputs[i]] = w[i];
    }

    ResultWriter out(args.out, "steer-rand/v1",
                     {"index", "p", "theta", "x_star", "x_set", "p_guess", "h_min_bits",
                      "sw_weight", "sw_guess_bound", "psw_weight", "psw_guess_bound", "status"});

    struct Row {
        std::vector<json> cells;
        bool solved = true;
    };
    auto work = [&](int i) {
        const Point& pt = points[static_cast<size_t>(i)];
        Row r;
        json p_cell = std::isnan(pt.p) ? json() : json(pt.p);
        json t_cell = std::isnan(pt.theta) ? json() : json(pt.theta);
        if (!set_weights.empty()) {
            auto res = randomness::p_guess_steering_set(pt.a, set_weights, opts);
            r.solved = res.status == conic::SolveStatus::Optimal ||
                       res.status == conic::SolveStatus::Inaccurate;
            std::string xs;
            for (auto& [x, w] : set_weights) xs += (xs.empty() ? "" : ";") + std::to_string(x);
            r.cells = {i,           p_cell, t_cell, json(), xs,     res.p_guess, res.h_min,
                       json(),      json(), json(), json(), conic::to_string(res.status)};
            return r;
        }
        auto res = randomness::p_guess_steering(pt.a, args.x_star, opts);
        auto sw = steering::steering_weight(pt.a, opts);
        auto psw = steering::partial_steering_weight(pt.a, args.x_star, opts);
        r.solved = res.status == conic::SolveStatus::Optimal ||
                   res.status == conic::SolveStatus::Inaccurate;
        r.cells = {i,
                   p_cell,
                   t_cell,
                   args.x_star,
                   json(),
                   res.p_guess,
                   res.h_min,
                   sw.weight,
                   steering::guess_bound(sw, args.x_star),
                   psw.weight,
                   steering::guess_bound(psw, args.x_star),
                   conic::to_string(res.status)};
        return r;
    };

    bool all_solved = true;
    batched_for(static_cast<int>(points.size()), args.jobs, work, [&](int, Row r) {
        out.row(r.cells);
        all_solved = all_solved && r.solved;
    });
    if (!all_solved) throw SolverFailure("steer-rand: some grid points did not solve");
    return 0;
}

// --- chain -------------------------------------------------------------------

struct ChainArgs {
    int d = 2, m = 2;
    std::string alpha, box, shift, behavior_file, out = "chain";
    bool sweep = false;
    int samples = 100;
    std::uint64_t seed = 0;
};

Eigen::VectorXd alpha_or_default(const std::string& spec, int d) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(d);
    if (spec.empty()) {
        alpha(0) = 1.0;
        return alpha;
    }
    auto vals = parse_doubles(spec);
    if (static_cast<int>(vals.size()) != d)
        throw ParseFailure("--alpha needs exactly d entries");
    for (int k = 0; k < d; ++k) alpha(k) = vals[static_cast<size_t>(k)];
    return alpha;
}

int cmd_chain(const ChainArgs& args) {
    ResultWriter out(args.out, "chain/v1",
                     {"d", "m", "alpha", "I_C_dp", "I_C_bruteforce", "box_value", "margin"});

    if (args.sweep) {
        // Deterministic-at-x* samples with random functionals; a violation
        // here would falsify the decomposition structure, so count them.
        int violations = 0;
        for (int i = 0; i < args.samples; ++i) {
            auto rng = sample_rng(args.seed, static_cast<std::uint64_t>(i));
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            Eigen::VectorXd alpha(args.d);
            for (int k = 0; k < args.d; ++k) alpha(k) = unif(rng);
            int x_star = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(args.m));
            int e = static_cast<int>(rng() % static_cast<std::uint64_t>(args.d));
            auto b = chain::random_partially_deterministic(args.d, args.m, x_star, e, rng);
            auto ineq = chain::make_chain_inequality(args.d, args.m, alpha);
            auto check = chain::verify_no_chain_violation(b, ineq);
            std::vector<double> av(alpha.data(), alpha.data() + alpha.size());
            out.row({args.d, args.m, join(av), check.bound,
                     chain::classical_bound_bruteforce(ineq), check.value, check.margin});
            if (!check.ok) ++violations;
        }
        std::cout << "violations: " << violations << "/" << args.samples << "\n";
        return violations == 0 ? 0 : 3;
    }

    int d = args.d, m = args.m;
    std::optional<Behavior> box;
    if (!args.behavior_file.empty()) {
        box = load_behavior(args.behavior_file);
        if (box->d_a != box->d_b || box->m_a != box->m_b)
            throw std::invalid_argument("chain: behavior must have square scenario");
        d = box->d_a;
        m = box->m_a;
    }
    auto ineq = chain::make_chain_inequality(d, m, alpha_or_default(args.alpha, d));
    if (!box && !args.box.empty()) {
        if (args.box != "ns") throw ParseFailure("unknown box: " + args.box);
        auto shift = chain::zero_offsets(d, m);
        if (!args.shift.empty()) shift.q = parse_ints(args.shift);
        box = chain::ns_box(d, m, shift);
    }

    double dp = chain::classical_bound_dp(ineq);
    double bf = chain::classical_bound_bruteforce(ineq);
    json value = json(), margin = json();
    if (box) {
        double v = chain::chain_value(*box, ineq);
        value = v;
        margin = dp - v;
    }
    std::vector<double> av(ineq.alpha.data(), ineq.alpha.data() + ineq.alpha.size());
    out.row({d, m, join(av), dp, bf, value, margin});
    if (box) {
        double mg = margin.get<double>();
        std::cout << "value " << format_cell(value) << " bound " << format_cell(dp)
                  << (mg < 0 ? " violated\n" : " satisfied\n");
    }
    return 0;
}

// --- decompose ---------------------------------------------------------------

struct DecomposeArgs {
    std::string behavior_file, out = "decompose";
    int x_star = 1;
};

std::string key_string(const std::vector<int>& key) {
    std::string s;
    for (size_t i = 0; i < key.size(); ++i) s += (i ? ";" : "") + std::to_string(key[i]);
    return s;
}

int cmd_decompose(const DecomposeArgs& args) {
    auto b = load_behavior(args.behavior_file);
    auto dec = chain::decompose_partially_deterministic(b, args.x_star);

    ResultWriter out(args.out, "decompose/v1",
                     {"d", "m", "x_star", "e", "f_sum", "pq_sum", "n_components",
                      "reconstruction_residual"});
    out.row({dec.d, dec.m, dec.x_star, dec.e, dec.f_sum, dec.pq_sum,
             static_cast<int>(dec.pq.size()), dec.reconstruction_residual});

    json weights;
    for (auto& [k, v] : dec.f) weights["f"][key_string(k)] = v;
    for (auto& [k, v] : dec.pq) weights["pq"][key_string(k)] = v;
    out.attach("weights", weights);
    std::cout << "reconstruction residual " << dec.reconstruction_residual << "\n";
    return 0;
}

// --- compat ------------------------------------------------------------------

struct CompatArgs {
    std::string meas = "XYZ", out = "compat";
    double eta = 1.0;
    double eps = 1e-8;
};

int cmd_compat(const CompatArgs& args) {
    auto ms = load_measurements(args.meas);
    if (args.eta < 1.0) {
        for (auto& povm : ms.povms)
            for (auto& eff : povm.effects) {
                double t = eff.trace().real();
                int dim = static_cast<int>(eff.rows());
                eff = args.eta * eff + (1.0 - args.eta) * (t / dim) * ComplexMatrix::Identity(dim, dim);
            }
    }
    conic::SolveOptions opts;
    opts.eps = args.eps;
    auto h = compat::compatibility_structure(ms, opts);

    ResultWriter out(args.out, "compat/v1", {"x_star", "contains_star"});
    for (int x = 1; x <= h.vertices; ++x) out.row({x, compat::contains_star(h, x)});
    out.attach("hypergraph", compat::hypergraph_to_json(h));

    std::cout << "hyperedges:";
    for (auto& e : h.hyperedges) {
        std::cout << " {";
        for (size_t i = 0; i < e.size(); ++i) std::cout << (i ? "," : "") << e[i];
        std::cout << "}";
    }
    std::cout << (h.hyperedges.empty() ? " none" : "") << "\n";
    return 0;
}

// --- nl-rand -----------------------------------------------------------------

struct NlRandArgs {
    std::string behavior_file, level = "1+AB", out = "nl_rand";
    int x_star = 1, y_star = 0;  // y_star 0 means Alice-marginal guessing
    double eps = 1e-8;
};

int cmd_nl_rand(const NlRandArgs& args) {
    auto b = load_behavior(args.behavior_file);
    npa::Level level;
    if (args.level == "1")
        level = npa::Level::One;
    else if (args.level == "1+AB")
        level = npa::Level::OnePlusAB;
    else
        throw ParseFailure("unknown level: " + args.level + " (use 1 or 1+AB)");

    conic::SolveOptions opts;
    opts.eps = args.eps;
    auto rel = npa::build_relaxation(level, b.m_a, b.m_b, b.d_a, b.d_b);
    auto r = args.y_star > 0 ? npa::p_guess_nl(b, args.x_star, args.y_star, rel, opts)
                             : npa::p_guess_nl_marginal(b, args.x_star, rel, opts);
    require_solved(r.status, "nl-rand");

    ResultWriter out(args.out, "nl-rand/v1",
                     {"x_star", "y_star", "level", "p_guess", "h_min_bits", "status"});
    out.row({args.x_star, args.y_star > 0 ? json(args.y_star) : json(), npa::to_string(level),
             r.p_guess, r.h_min, conic::to_string(r.status)});
    std::cout << "p_guess " << r.p_guess << " h_min " << r.h_min << " bits\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomness certification from steering and Bell correlations"};
    app.require_subcommand(1);

    SteerRandArgs sr;
    auto* steer = app.add_subcommand("steer-rand", "Steering-based guessing probability over a grid");
    steer->add_option("--assemblage", sr.assemblage_file, "Assemblage JSON file");
    steer->add_option("--state", sr.state, "State family (rho_p_theta)");
    steer->add_option("--p", sr.p_list, "Comma list of visibility values");
    steer->add_option("--theta", sr.theta_list, "Comma list of angles in radians");
    steer->add_option("--meas", sr.meas, "Pauli letters (XZ, XYZ) or measurement JSON file");
    steer->add_option("--xstar", sr.x_star, "Guessed input, 1-based");
    steer->add_option("--xset", sr.xset, "Comma list of inputs for set guessing");
    steer->add_option("--weights", sr.weights, "Input weights matching --xset");
    steer->add_option("--eps", sr.eps, "Solver tolerance");
    steer->add_option("--jobs", sr.jobs, "Parallel grid points");
    steer->add_option("--out", sr.out, "Output basename");

    ChainArgs ch;
    auto* chain_cmd = app.add_subcommand("chain", "Chain inequality bounds and violations");
    chain_cmd->add_option("--d", ch.d, "Outcomes per input");
    chain_cmd->add_option("--m", ch.m, "Inputs per party");
    chain_cmd->add_option("--alpha", ch.alpha, "Comma list of d coefficients");
    chain_cmd->add_option("--box", ch.box, "Named box (ns)");
    chain_cmd->add_option("--shift", ch.shift, "2m offsets for the ns box");
    chain_cmd->add_option("--behavior", ch.behavior_file, "Behavior JSON file");
    chain_cmd->add_flag("--sweep-partially-deterministic", ch.sweep,
                        "Random deterministic-at-x* sweep");
    chain_cmd->add_option("--samples", ch.samples, "Sweep sample count");
    chain_cmd->add_option("--seed", ch.seed, "Sweep RNG seed");
    chain_cmd->add_option("--out", ch.out, "Output basename");

    DecomposeArgs de;
    auto* dec = app.add_subcommand("decompose", "Chain-consistent decomposition weights");
    dec->add_option("--behavior", de.behavior_file, "Behavior JSON file")->required();
    dec->add_option("--xstar", de.x_star, "Deterministic input, 1-based");
    dec->add_option("--out", de.out, "Output basename");

    CompatArgs co;
    auto* comp = app.add_subcommand("compat", "Joint-measurability hypergraph");
    comp->add_option("--meas", co.meas, "Pauli letters or measurement JSON file");
    comp->add_option("--eta", co.eta, "Depolarizing visibility applied to effects");
    comp->add_option("--eps", co.eps, "Solver tolerance");
    comp->add_option("--out", co.out, "Output basename");

    NlRandArgs nl;
    auto* nlr = app.add_subcommand("nl-rand", "Device-independent guessing probability");
    nlr->add_option("--behavior", nl.behavior_file, "Behavior JSON file")->required();
    nlr->add_option("--xstar", nl.x_star, "Alice input, 1-based");
    nlr->add_option("--ystar", nl.y_star, "Bob input for joint guessing; omit for marginal");
    nlr->add_option("--level", nl.level, "Relaxation level: 1 or 1+AB");
    nlr->add_option("--eps", nl.eps, "Solver tolerance");
    nlr->add_option("--out", nl.out, "Output basename");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (steer->parsed()) return cmd_steer_rand(sr);
        if (chain_cmd->parsed()) return cmd_chain(ch);
        if (dec->parsed()) return cmd_decompose(de);
        if (comp->parsed()) return cmd_compat(co);
        if (nlr->parsed()) return cmd_nl_rand(nl);
    } catch (const ParseFailure& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const DataInfeasibleError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 4;
    } catch (const std::length_error& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return 5;
    } catch (const json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
