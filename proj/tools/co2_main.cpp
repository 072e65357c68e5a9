#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "co2/ccs/model.hpp"
#include "co2/encoding/corpus.hpp"
#include "co2/encoding/pcl_to_ccs.hpp"
#include "co2/pcl/model.hpp"
#include "co2/runtime/honesty.hpp"
#include "co2/runtime/trace.hpp"
#include "co2/syntax/parser.hpp"

using nlohmann::json;
using namespace co2;

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitError = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int state_cap_from_env() {
    if (const char* cap = std::getenv("CO2_STATE_CAP")) {
        int v = std::atoi(cap);
        if (v > 0) return v;
    }
    return ccs::kDefaultStateCap;
}

template <ContractModel M>
void apply_state_cap(runtime::Env<M>& env) {
    if constexpr (std::is_same_v<M, ccs::CcsModel>)
        env.model.state_cap = state_cap_from_env();
}

// Parse the file at `path` and run `fn` on the result, dispatching on
// the model named in its header.
template <class Fn>
int with_model(const std::string& path, Fn&& fn) {
    std::string src = read_file(path);
    std::string model = syntax::detect_model(src);
    if (model == "ccs") {
        auto parsed = syntax::parse_file<ccs::CcsModel>(src);
        apply_state_cap(parsed.env);
        return fn(parsed);
    }
    if (model == "pcl") {
        auto parsed = syntax::parse_file<pcl::PclModel>(src);
        apply_state_cap(parsed.env);
        return fn(parsed);
    }
    throw Error("unknown model " + model + "; expected ccs or pcl");
}

json record_json(const runtime::TraceRecord& r) {
    json j{{"step", r.step},
           {"rule", r.rule},
           {"agents", r.agents},
           {"state", r.state}};
    if (r.session) j["session"] = *r.session;
    if (!r.label.empty()) j["label"] = r.label;
    return j;
}

void print_record(const runtime::TraceRecord& r, const std::string& indent) {
    std::cout << indent << r.step << ". [" << r.rule << "] " << r.label << "\n"
              << indent << "   " << r.state << "\n";
}

// ----- run -----

struct RunArgs {
    std::string file;
    std::string strategy = "first";
    int max_steps = 100;
    bool as_json = false;
};

template <ContractModel M>
runtime::Chooser<M> make_chooser(const std::string& strategy,
                                 const runtime::Env<M>& env) {
    if (strategy == "first") return runtime::first_chooser<M>();
    if (strategy.rfind("random:", 0) == 0) {
        unsigned seed =
            static_cast<unsigned>(std::stoul(strategy.substr(7)));
        return runtime::random_chooser<M>(seed);
    }
    if (strategy == "interactive") {
        return [&env](const runtime::SystemState<M>& s,
                      const std::vector<runtime::StepInfo<M>>& steps)
                   -> std::optional<std::size_t> {
            std::cerr << "state: " << runtime::to_string<M>(s, env) << "\n";
            for (std::size_t i = 0; i < steps.size(); ++i)
                std::cerr << "  " << (i + 1) << ") [" << steps[i].rule << "] "
                          << steps[i].label << "\n";
            std::cerr << "choose 1-" << steps.size() << " (q quits): "
                      << std::flush;
            std::string line;
            if (!std::getline(std::cin, line) || line == "q" || line == "quit")
                return std::nullopt;
            std::size_t k = 0;
            try {
                k = std::stoul(line);
            } catch (...) {
                return std::optional<std::size_t>{0};
            }
            if (k < 1 || k > steps.size()) return std::optional<std::size_t>{0};
            return std::optional<std::size_t>{k - 1};
        };
    }
    throw Error("unknown strategy " + strategy +
                "; expected first, random:SEED or interactive");
}

int cmd_run(const RunArgs& args) {
    return with_model(args.file, [&](auto& parsed) {
        using M = typename std::decay_t<decltype(parsed)>::Model;
        auto chooser = make_chooser<M>(args.strategy, parsed.env);
        auto res = runtime::run_trace<M>(parsed.system, parsed.env,
                                         args.max_steps, chooser);
        if (args.as_json) {
            json steps = json::array();
            for (const auto& r : res.records) steps.push_back(record_json(r));
            std::cout << json{{"model", M::name()},
                              {"initial", res.initial},
                              {"steps", steps},
                              {"stuck", res.stuck},
                              {"truncated", res.truncated}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << "initial: " << res.initial << "\n";
            for (const auto& r : res.records) print_record(r, "");
            if (res.stuck)
                std::cout << "result: no further step after "
                          << res.records.size() << " step(s)\n";
            else if (res.truncated)
                std::cout << "result: step limit reached\n";
            else
                std::cout << "result: stopped\n";
        }
        return kExitTrue;
    });
}

// ----- steps -----

int cmd_steps(const std::string& file, bool as_json) {
    return with_model(file, [&](auto& parsed) {
        using M = typename std::decay_t<decltype(parsed)>::Model;
        auto initial = runtime::freeze_names<M>(
            runtime::renormalise<M>(parsed.system));
        auto steps = runtime::enumerate_steps<M>(initial, parsed.env);
        std::string init = runtime::to_string<M>(initial, parsed.env);
        if (as_json) {
            json arr = json::array();
            for (const auto& s : steps) {
                json j{{"rule", s.rule},
                       {"agents", s.agents},
                       {"state", runtime::to_string<M>(s.next, parsed.env)}};
                if (s.session) j["session"] = *s.session;
                if (!s.label.empty()) j["label"] = s.label;
                arr.push_back(std::move(j));
            }
            std::cout << json{{"model", M::name()},
                              {"initial", init},
                              {"steps", arr}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << "initial: " << init << "\n";
            if (steps.empty()) std::cout << "no steps available\n";
            for (std::size_t i = 0; i < steps.size(); ++i) {
                std::cout << (i + 1) << ". [" << steps[i].rule << "] "
                          << steps[i].label << "\n   -> "
                          << runtime::to_string<M>(steps[i].next, parsed.env)
                          << "\n";
            }
        }
        return kExitTrue;
    });
}

// ----- honesty -----

struct HonestyArgs {
    std::string file;
    std::string principal;
    int max_depth = 64;
    int max_states = 20000;
    bool as_json = false;
};

int cmd_honesty(const HonestyArgs& args) {
    return with_model(args.file, [&](auto& parsed) {
        using M = typename std::decay_t<decltype(parsed)>::Model;
        runtime::HonestyOptions opts;
        opts.max_depth = args.max_depth;
        opts.max_states = args.max_states;
        auto report = runtime::honesty_check<M>(parsed.system, parsed.env,
                                                args.principal, opts);
        if (args.as_json) {
            json j{{"model", M::name()},
                   {"principal", args.principal},
                   {"verdict", runtime::to_string(report.verdict)},
                   {"states", report.states},
                   {"truncated", report.truncated}};
            if (report.witness) {
                json stem = json::array(), cycle = json::array();
                for (const auto& r : report.witness->stem)
                    stem.push_back(record_json(r));
                for (const auto& r : report.witness->cycle)
                    cycle.push_back(record_json(r));
                j["witness"] = json{{"stem", stem}, {"cycle", cycle}};
                j["session"] = report.witness->session;
                j["obligations"] = report.witness->obligations;
            }
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "principal: " << args.principal << "\n"
                      << "verdict: " << runtime::to_string(report.verdict)
                      << " (" << report.states << " states"
                      << (report.truncated ? ", truncated" : "") << ")\n";
            if (report.witness) {
                std::cout << "witness:\n";
                for (const auto& r : report.witness->stem)
                    print_record(r, "  ");
                if (!report.witness->cycle.empty()) {
                    std::cout << "  repeat forever:\n";
                    for (const auto& r : report.witness->cycle)
                        print_record(r, "  ");
                }
                std::cout << "unfulfilled in " << report.witness->session
                          << ": " << report.witness->obligations << "\n";
            }
        }
        switch (report.verdict) {
            case runtime::Verdict::Honest: return kExitTrue;
            case runtime::Verdict::Dishonest: return kExitFalse;
            default: return kExitInconclusive;
        }
    });
}

// ----- prove (pcl entailment) -----

int cmd_prove(const std::string& contract, const std::string& goal,
              bool as_json) {
    auto c = syntax::parse_contract_string<pcl::PclModel>(contract);
    auto g = syntax::parse_observable_string<pcl::PclModel>(goal);
    pcl::PclEnv env = pcl::normalise(c);
    bool result = pcl::pcl_entails(env, g);
    if (as_json) {
        std::cout << json{{"contract", pcl::to_string(c)},
                          {"goal", pcl::to_string(g)},
                          {"result", result}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "contract: " << pcl::to_string(c) << "\n"
                  << "goal: " << pcl::to_string(g) << "\n"
                  << "result: " << (result ? "true" : "false") << "\n";
    }
    return result ? kExitTrue : kExitFalse;
}

// ----- ltl (ccs entailment) -----

int cmd_ltl(const std::string& contract, const std::string& formula,
            const std::string& context, bool as_json) {
    runtime::Env<ccs::CcsModel> env;
    if (!context.empty()) {
        auto parsed = syntax::parse_file<ccs::CcsModel>(read_file(context));
        env = parsed.env;
    }
    apply_state_cap(env);
    auto c = syntax::parse_contract_string<ccs::CcsModel>(contract, &env);
    auto f = syntax::parse_observable_string<ccs::CcsModel>(formula);
    auto graph = ccs::reachable(c, env.model.defs, env.model.state_cap);
    bool result = ccs::entails(graph, f);
    std::optional<ccs::TraceWitness> witness;
    if (!result) witness = ccs::exists_trace(graph, ccs::ltl_not(f));
    auto labels = [](const std::vector<ccs::Label>& ls) {
        json arr = json::array();
        for (const auto& l : ls) arr.push_back(l.str());
        return arr;
    };
    if (as_json) {
        json j{{"contract", ccs::to_string(c)},
               {"formula", ccs::to_string(f)},
               {"result", result}};
        if (witness)
            j["witness"] = json{{"stem", labels(witness->stem)},
                                {"cycle", labels(witness->cycle)}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "contract: " << ccs::to_string(c) << "\n"
                  << "formula: " << ccs::to_string(f) << "\n"
                  << "result: " << (result ? "true" : "false") << "\n";
        if (witness) {
            std::cout << "violating run:";
            for (const auto& l : witness->stem) std::cout << " " << l.str();
            if (!witness->cycle.empty()) {
                std::cout << " (repeat:";
                for (const auto& l : witness->cycle)
                    std::cout << " " << l.str();
                std::cout << ")";
            }
            if (witness->stem.empty() && witness->cycle.empty())
                std::cout << " (empty)";
            std::cout << "\n";
        }
    }
    return result ? kExitTrue : kExitFalse;
}

// ----- encode -----

int cmd_encode(const std::string& contract, bool as_json) {
    auto c = syntax::parse_contract_string<pcl::PclModel>(contract);
    auto enc = encoding::encode(c);
    if (as_json) {
        json defs = json::object();
        for (const auto& [name, body] : enc.defs)
            defs[name] = ccs::to_string(ccs::canonicalise(body));
        std::cout << json{{"contract", pcl::to_string(c)},
                          {"state", ccs::to_string(enc.state)},
                          {"defs", defs}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "contract: " << pcl::to_string(c) << "\n"
                  << "state: " << ccs::to_string(enc.state) << "\n";
        for (const auto& [name, body] : enc.defs)
            std::cout << "def " << name << " = "
                      << ccs::to_string(ccs::canonicalise(body)) << "\n";
    }
    return kExitTrue;
}

// ----- theorems -----

json theorem_json(const char* name, const encoding::TheoremReport& r) {
    json j{{"check", name}, {"lhs", r.lhs}, {"rhs", r.rhs},
           {"agree", r.agree()}};
    if (r.witness) {
        json arr = json::array();
        for (const auto& l : *r.witness) arr.push_back(l.str());
        j["witnessTrace"] = arr;
    }
    return j;
}

void theorem_text(const char* name, const encoding::TheoremReport& r) {
    std::cout << name << ": lhs=" << (r.lhs ? "true" : "false")
              << " rhs=" << (r.rhs ? "true" : "false")
              << (r.agree() ? " (agree)" : " (DISAGREE)") << "\n";
    if (r.witness) {
        std::cout << "  run:";
        for (const auto& l : *r.witness) std::cout << " " << l.str();
        if (r.witness->empty()) std::cout << " (empty)";
        std::cout << "\n";
    }
}

int cmd_theorems(const std::string& contract, int corpus, unsigned seed,
                 bool as_json) {
    int cap = state_cap_from_env();
    if (corpus > 0) {
        std::mt19937 rng(seed);
        std::vector<std::string> failures;
        for (int i = 0; i < corpus; ++i) {
            auto f = encoding::random_minus_formula(rng);
            auto r1 = encoding::check_entail_vs_reach(f, cap);
            auto r2 = encoding::check_fulfil_vs_fulfil(f, cap);
            if (!r1.agree() || !r2.agree())
                failures.push_back(pcl::to_string(f));
        }
        if (as_json) {
            std::cout << json{{"count", corpus},
                              {"seed", seed},
                              {"failures", failures},
                              {"agree", failures.empty()}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << corpus << " random contracts checked, "
                      << (failures.empty() ? "all agree" : "DISAGREEMENTS:")
                      << "\n";
            for (const auto& f : failures) std::cout << "  " << f << "\n";
        }
        return failures.empty() ? kExitTrue : kExitFalse;
    }
    auto c = syntax::parse_contract_string<pcl::PclModel>(contract);
    auto r1 = encoding::check_entail_vs_reach(c, cap);
    auto r2 = encoding::check_fulfil_vs_fulfil(c, cap);
    if (as_json) {
        std::cout << json{{"formula", pcl::to_string(c)},
                          {"checks",
                           json::array({theorem_json("entail-vs-empty", r1),
                                        theorem_json("fulfil-vs-fulfil", r2)})},
                          {"agree", r1.agree() && r2.agree()}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "formula: " << pcl::to_string(c) << "\n";
        theorem_text("entail-vs-empty", r1);
        theorem_text("fulfil-vs-fulfil", r2);
    }
    return r1.agree() && r2.agree() ? kExitTrue : kExitFalse;
}

// ----- agree -----

struct AgreeArgs {
    std::string file;
    std::string broker;
    std::string phi;
    bool as_json = false;
};

int cmd_agree(const AgreeArgs& args) {
    return with_model(args.file, [&](auto& parsed) {
        using M = typename std::decay_t<decltype(parsed)>::Model;
        auto state = runtime::freeze_names<M>(
            runtime::renormalise<M>(parsed.system));
        // Let every advertisement reach its target before searching, so
        // the broker's pool is complete.  Tell steps commute, so firing
        // them in enumeration order loses nothing.
        for (int guard = 0; guard < 1000; ++guard) {
            auto steps = runtime::enumerate_steps<M>(state, parsed.env);
            auto tell = std::find_if(steps.begin(), steps.end(),
                                     [](const runtime::StepInfo<M>& s) {
                                         return s.rule == "Tell1" ||
                                                s.rule == "Tell2";
                                     });
            if (tell == steps.end()) break;
            state = tell->next;
        }
        auto resolved = runtime::resolve_calls<M>(state, parsed.env);
        const runtime::ProcessPtr<M>* broker_proc = nullptr;
        std::vector<Ident> principals;
        for (const auto& [name, proc] : resolved.agents) {
            principals.push_back(name);
            if (name == args.broker) broker_proc = &proc;
        }
        if (!broker_proc)
            throw Error("no agent named " + args.broker + " in the system");

        std::vector<std::pair<Ident, typename M::Contract>> pool;
        std::optional<typename M::Observable> obs;
        Ident fuse_var;
        for (const auto& comp :
             runtime::detail::components<M>(*broker_proc)) {
            if (comp->kind == runtime::Process<M>::Kind::Latent)
                pool.emplace_back(comp->latent_var, *comp->latent_contract);
            if (comp->kind == runtime::Process<M>::Kind::Sum && !obs)
                for (const auto& br : comp->branches)
                    if (br.prefix.kind == runtime::Prefix<M>::Kind::Fuse) {
                        obs = *br.prefix.obs;
                        fuse_var = br.prefix.fuse_var;
                        break;
                    }
        }
        if (!args.phi.empty()) {
            obs = syntax::parse_observable_string<M>(args.phi);
            FreshVarAllocator alloc{runtime::all_idents<M>(resolved)};
            fuse_var = alloc.next("x");
        }
        if (!obs)
            throw Error(args.broker +
                        " has no fuse prefix; pass the observable with --phi");

        auto result = runtime::agreement_search<M>(
            pool, principals, runtime::all_idents<M>(resolved), fuse_var, *obs,
            parsed.env);
        bool any = false;
        for (const auto& c : result.admissible) any = any || c.minimal;
        auto sigma_json = [](const Subst& s) {
            json j = json::object();
            for (const auto& [v, img] : s) j[v] = img;
            return j;
        };
        if (args.as_json) {
            json arr = json::array();
            for (const auto& c : result.admissible) {
                json latents = json::array();
                for (std::size_t i : c.chosen) latents.push_back(pool[i].first);
                arr.push_back(
                    json{{"latents", latents},
                         {"sigma", sigma_json(c.sigma)},
                         {"minimal", c.minimal},
                         {"session",
                          M::print_session(c.composed, parsed.env.model)}});
            }
            std::cout << json{{"model", M::name()},
                              {"broker", args.broker},
                              {"observable", M::print_observable(*obs)},
                              {"freshSession", result.fresh_session},
                              {"candidates", arr},
                              {"agreement", any}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << "broker: " << args.broker << " with "
                      << pool.size() << " latent contract(s)\n"
                      << "observable: " << M::print_observable(*obs) << "\n"
                      << "fresh session: " << result.fresh_session << "\n";
            if (result.admissible.empty())
                std::cout << "no admissible agreement\n";
            for (const auto& c : result.admissible) {
                std::cout << (c.minimal ? "agreement" : "admissible") << ":";
                for (std::size_t i : c.chosen)
                    std::cout << " [" << pool[i].first << "]";
                std::cout << " with " << runtime::detail::subst_str(c.sigma)
                          << " -> " << result.fresh_session << "["
                          << M::print_session(c.composed, parsed.env.model)
                          << "]\n";
            }
        }
        return any ? kExitTrue : kExitFalse;
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"co2c: a kernel for contract-oriented systems"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run one trace of a system");
    run->add_option("file", run_args.file, "a .co2 file")->required();
    run->add_option("--strategy", run_args.strategy,
                    "first, random:SEED or interactive");
    run->add_option("--max-steps", run_args.max_steps, "step limit");
    run->add_flag("--json", run_args.as_json, "JSON output");

    std::string steps_file;
    bool steps_json = false;
    auto* steps =
        app.add_subcommand("steps", "list the steps of the initial state");
    steps->add_option("file", steps_file, "a .co2 file")->required();
    steps->add_flag("--json", steps_json, "JSON output");

    HonestyArgs honesty_args;
    auto* honesty =
        app.add_subcommand("honesty", "decide honesty of a principal");
    honesty->add_option("file", honesty_args.file, "a .co2 file")->required();
    honesty->add_option("--principal", honesty_args.principal, "the principal")
        ->required();
    honesty->add_option("--max-depth", honesty_args.max_depth,
                        "exploration depth bound");
    honesty->add_option("--max-states", honesty_args.max_states,
                        "exploration state bound");
    honesty->add_flag("--json", honesty_args.as_json, "JSON output");

    std::string prove_contract, prove_goal;
    bool prove_json = false;
    auto* prove = app.add_subcommand(
        "prove", "logical contract entailment (pcl model)");
    prove->add_option("--contract", prove_contract, "a pcl contract")
        ->required();
    prove->add_option("--goal", prove_goal, "the formula to derive")
        ->required();
    prove->add_flag("--json", prove_json, "JSON output");

    std::string ltl_contract, ltl_formula, ltl_context;
    bool ltl_json = false;
    auto* ltl = app.add_subcommand(
        "ltl", "temporal property of a process contract (ccs model)");
    ltl->add_option("--contract", ltl_contract, "a ccs contract")->required();
    ltl->add_option("--formula", ltl_formula, "an ltl formula")->required();
    ltl->add_option("--context", ltl_context,
                    "a .co2 file providing defining equations");
    ltl->add_flag("--json", ltl_json, "JSON output");

    std::string encode_contract;
    bool encode_json = false;
    auto* encode = app.add_subcommand(
        "encode", "translate a pcl contract into a ccs contract");
    encode->add_option("--contract", encode_contract, "a pcl contract")
        ->required();
    encode->add_flag("--json", encode_json, "JSON output");

    std::string thm_contract;
    int thm_corpus = 0;
    unsigned thm_seed = 1;
    bool thm_json = false;
    auto* thm = app.add_subcommand(
        "theorems", "check the encoding correspondences on a contract");
    thm->add_option("--contract", thm_contract, "a pcl contract");
    thm->add_option("--corpus", thm_corpus,
                    "check N random contracts instead");
    thm->add_option("--seed", thm_seed, "seed for --corpus");
    thm->add_flag("--json", thm_json, "JSON output");

    AgreeArgs agree_args;
    auto* agree = app.add_subcommand(
        "agree", "search agreements among a broker's latent contracts");
    agree->add_option("file", agree_args.file, "a .co2 file")->required();
    agree->add_option("--broker", agree_args.broker, "the broker principal")
        ->required();
    agree->add_option("--phi", agree_args.phi,
                      "observable (default: the broker's fuse)");
    agree->add_flag("--json", agree_args.as_json, "JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (steps->parsed()) return cmd_steps(steps_file, steps_json);
        if (honesty->parsed()) return cmd_honesty(honesty_args);
        if (prove->parsed())
            return cmd_prove(prove_contract, prove_goal, prove_json);
        if (ltl->parsed())
            return cmd_ltl(ltl_contract, ltl_formula, ltl_context, ltl_json);
        if (encode->parsed()) return cmd_encode(encode_contract, encode_json);
        if (thm->parsed()) {
            if (thm_corpus <= 0 && thm_contract.empty())
                throw Error("theorems needs --contract or --corpus");
            return cmd_theorems(thm_contract, thm_corpus, thm_seed, thm_json);
        }
        if (agree->parsed()) return cmd_agree(agree_args);
    } catch (const BoundedError& e) {
        std::cerr << "bound exceeded: " << e.what() << "\n";
        return kExitInconclusive;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
