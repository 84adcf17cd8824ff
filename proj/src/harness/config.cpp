#include "sonata/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sonata/errors.hpp"
#include "sonata/metrics.hpp"

namespace sonata {

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
          std::string message = "invalid configuration";
          for (const auto& v : violations) message += "; " + v;
          return message;
      }()),
      violations_(std::move(violations)) {}

namespace {

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

double to_double(const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::logic_error&) {
        throw ArgumentError("expected a number, got '" + value + "'");
    }
    if (used != value.size()) throw ArgumentError("expected a number, got '" + value + "'");
    return v;
}

std::uint64_t to_u64(const std::string& value) {
    if (value.empty() || !std::all_of(value.begin(), value.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ArgumentError("expected a nonnegative integer, got '" + value + "'");
    }
    try {
        return std::stoull(value);
    } catch (const std::logic_error&) {
        throw ArgumentError("integer out of range: '" + value + "'");
    }
}

std::size_t to_size(const std::string& value) { return static_cast<std::size_t>(to_u64(value)); }

bool to_bool(const std::string& value) {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    throw ArgumentError("expected true or false, got '" + value + "'");
}

struct ScheduleFields {
    std::string kind = "polynomial";
    double alpha0 = 0.1;
    double beta = 1.0;
    double mu = 0.01;
};

StepSizeSchedule make_schedule(const ScheduleFields& f) {
    if (f.kind == "polynomial") return StepSizeSchedule::polynomial(f.alpha0, f.beta);
    if (f.kind == "recursive") return StepSizeSchedule::recursive(f.alpha0, f.mu);
    if (f.kind == "constant") return StepSizeSchedule::constant(f.alpha0);
    throw ArgumentError("unknown schedule kind '" + f.kind + "'");
}

struct ParseState {
    ExperimentConfig config;
    ScheduleFields schedule;
    std::optional<ScheduleFields> benchmark;
};

using Setter = std::function<void(ParseState&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
    static const std::map<std::string, std::map<std::string, Setter>> table = {
        {"problem",
         {
             {"kind", [](ParseState& s, const std::string& v) { s.config.problem.kind = v; }},
             {"agents", [](ParseState& s, const std::string& v) { s.config.problem.agents = to_size(v); }},
             {"dimension", [](ParseState& s, const std::string& v) { s.config.problem.dimension = to_size(v); }},
             {"rows", [](ParseState& s, const std::string& v) { s.config.problem.rows = to_size(v); }},
             {"measurements", [](ParseState& s, const std::string& v) { s.config.problem.measurements = to_size(v); }},
             {"targets", [](ParseState& s, const std::string& v) { s.config.problem.targets = to_size(v); }},
             {"sigma", [](ParseState& s, const std::string& v) { s.config.problem.sigma = to_double(v); }},
             {"outlier_scale", [](ParseState& s, const std::string& v) { s.config.problem.outlier_scale = to_double(v); }},
             {"cutoff_scale", [](ParseState& s, const std::string& v) { s.config.problem.cutoff_scale = to_double(v); }},
             {"noiseless", [](ParseState& s, const std::string& v) { s.config.problem.noiseless = to_bool(v); }},
             {"noise_scale", [](ParseState& s, const std::string& v) { s.config.problem.noise_scale = to_double(v); }},
             {"l1", [](ParseState& s, const std::string& v) { s.config.problem.l1 = to_double(v); }},
             {"box_radius", [](ParseState& s, const std::string& v) { s.config.problem.box_radius = to_double(v); }},
             {"path", [](ParseState& s, const std::string& v) { s.config.problem.path = v; }},
         }},
        {"graph",
         {
             {"kind", [](ParseState& s, const std::string& v) { s.config.graph.kind = v; }},
             {"random_out_edges", [](ParseState& s, const std::string& v) { s.config.graph.random_out_edges = to_size(v); }},
             {"symmetrize", [](ParseState& s, const std::string& v) { s.config.graph.symmetrize = to_bool(v); }},
             {"file", [](ParseState& s, const std::string& v) { s.config.graph.file = v; }},
             {"mixing", [](ParseState& s, const std::string& v) { s.config.graph.mixing = parse_mixing_rule(v); }},
         }},
        {"algorithm",
         {
             {"variant", [](ParseState& s, const std::string& v) { s.config.variant = parse_algorithm(v); }},
             {"direction", [](ParseState& s, const std::string& v) { s.config.options.direction = parse_direction(v); }},
             {"surrogate",
              [](ParseState& s, const std::string& v) { s.config.options.surrogate.kind = parse_surrogate_kind(v); }},
             {"tau", [](ParseState& s, const std::string& v) { s.config.options.surrogate.tau = to_double(v); }},
             {"epsilon", [](ParseState& s, const std::string& v) { s.config.options.surrogate.epsilon = to_double(v); }},
             {"aug_dgm_form",
              [](ParseState& s, const std::string& v) {
                  if (v == "uncoordinated") s.config.options.aug_dgm_form = AugDgmForm::uncoordinated;
                  else if (v == "coordinated") s.config.options.aug_dgm_form = AugDgmForm::coordinated;
                  else throw ArgumentError("expected uncoordinated or coordinated, got '" + v + "'");
              }},
             {"add_opt_form",
              [](ParseState& s, const std::string& v) {
                  if (v == "push") s.config.options.add_opt_form = AddOptForm::push;
                  else if (v == "row-stochastic") s.config.options.add_opt_form = AddOptForm::row_stochastic;
                  else throw ArgumentError("expected push or row-stochastic, got '" + v + "'");
              }},
             {"inner_tol", [](ParseState& s, const std::string& v) { s.config.options.inner.tolerance = to_double(v); }},
             {"inner_max_iterations",
              [](ParseState& s, const std::string& v) { s.config.options.inner.max_iterations = to_size(v); }},
         }},
        {"schedule",
         {
             {"kind", [](ParseState& s, const std::string& v) { s.schedule.kind = v; }},
             {"alpha0", [](ParseState& s, const std::string& v) { s.schedule.alpha0 = to_double(v); }},
             {"beta", [](ParseState& s, const std::string& v) { s.schedule.beta = to_double(v); }},
             {"mu", [](ParseState& s, const std::string& v) { s.schedule.mu = to_double(v); }},
         }},
        {"benchmark",
         {
             {"alpha0",
              [](ParseState& s, const std::string& v) {
                  if (!s.benchmark) s.benchmark = ScheduleFields{"recursive", 0.5, 1.0, 0.01};
                  s.benchmark->alpha0 = to_double(v);
              }},
             {"mu",
              [](ParseState& s, const std::string& v) {
                  if (!s.benchmark) s.benchmark = ScheduleFields{"recursive", 0.5, 1.0, 0.01};
                  s.benchmark->mu = to_double(v);
              }},
         }},
        {"run",
         {
             {"seed", [](ParseState& s, const std::string& v) { s.config.seed = to_u64(v); }},
             {"runs", [](ParseState& s, const std::string& v) { s.config.runs = to_size(v); }},
             {"iterations", [](ParseState& s, const std::string& v) { s.config.options.max_iterations = to_size(v); }},
             {"start",
              [](ParseState& s, const std::string& v) {
                  if (v == "random") s.config.random_start = true;
                  else if (v == "zero") s.config.random_start = false;
                  else throw ArgumentError("expected zero or random, got '" + v + "'");
              }},
             {"terminate", [](ParseState& s, const std::string& v) { s.config.options.termination.enabled = to_bool(v); }},
             {"tol_J", [](ParseState& s, const std::string& v) { s.config.options.termination.J = to_double(v); }},
             {"tol_D", [](ParseState& s, const std::string& v) { s.config.options.termination.D = to_double(v); }},
             {"threads", [](ParseState& s, const std::string& v) { s.config.threads = to_size(v); }},
         }},
    };
    return table;
}

bool needs_doubly_stochastic(Algorithm a) {
    return a == Algorithm::sonata_next || a == Algorithm::sonata_next_l || a == Algorithm::aug_dgm ||
           a == Algorithm::diging;
}

bool needs_smooth(Algorithm a) {
    return a != Algorithm::sonata && a != Algorithm::sonata_next && a != Algorithm::subgradient_push;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    ParseState state;
    std::vector<std::string> violations;
    std::set<std::string> seen;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        // A '#' preceded by whitespace starts a trailing comment.
        for (std::size_t k = 1; k < line.size(); ++k) {
            if (line[k] == '#' && (line[k - 1] == ' ' || line[k - 1] == '\t')) {
                line = trim(std::string_view(line).substr(0, k));
                break;
            }
        }
        const std::string where = "line " + std::to_string(line_number);
        if (line.front() == '[') {
            if (line.back() != ']') {
                violations.push_back(where + ": malformed section header");
                continue;
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!setters().count(section)) violations.push_back(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            violations.push_back(where + ": expected key = value");
            continue;
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (section.empty()) {
            violations.push_back(where + ": key '" + key + "' outside any section");
            continue;
        }
        const auto table = setters().find(section);
        if (table == setters().end()) continue;
        const auto setter = table->second.find(key);
        if (setter == table->second.end()) {
            violations.push_back(where + ": unknown key '" + section + "." + key + "'");
            continue;
        }
        if (!seen.insert(section + "." + key).second) {
            violations.push_back(where + ": duplicate key '" + section + "." + key + "'");
            continue;
        }
        try {
            setter->second(state, value);
        } catch (const std::exception& e) {
            violations.push_back(section + "." + key + ": " + e.what());
        }
    }

    try {
        state.config.options.schedule = make_schedule(state.schedule);
    } catch (const std::exception& e) {
        violations.push_back(std::string("schedule: ") + e.what());
    }
    if (state.benchmark) {
        state.config.benchmark_schedule = StepSizeSchedule::recursive(state.benchmark->alpha0, state.benchmark->mu);
    }
    for (auto& v : config_violations(state.config)) violations.push_back(std::move(v));
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return state.config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::vector<std::string> config_violations(const ExperimentConfig& c) {
    std::vector<std::string> out;
    const ProblemSpec& p = c.problem;
    const std::string variant(algorithm_name(c.variant));

    const bool known_problem = p.kind == "quadratic" || p.kind == "huber" || p.kind == "localization" || p.kind == "file";
    if (!known_problem) out.push_back("problem.kind: unknown problem '" + p.kind + "'");
    if (p.kind != "file") {
        if (p.agents < 1) out.push_back("problem.agents must be at least 1");
        if (p.kind != "localization" && p.dimension < 1) out.push_back("problem.dimension must be at least 1");
    }
    if (p.kind == "quadratic" && p.rows != 0 && p.rows < p.dimension) {
        out.push_back("problem.rows must be 0 or at least problem.dimension");
    }
    if (p.kind == "huber") {
        if (p.measurements < 1) out.push_back("problem.measurements must be at least 1");
        if (!(p.sigma > 0.0)) out.push_back("problem.sigma must be positive");
        if (!(p.cutoff_scale > 0.0)) out.push_back("problem.cutoff_scale must be positive");
    }
    if (p.kind == "localization" && p.targets < 1) out.push_back("problem.targets must be at least 1");
    if (p.kind == "file" && p.path.empty()) out.push_back("problem.path is required for kind = file");
    if (p.l1 < 0.0) out.push_back("problem.l1 must be nonnegative");
    if (p.box_radius && !(*p.box_radius > 0.0)) out.push_back("problem.box_radius must be positive");

    const bool constrained = p.kind == "localization" || (p.kind == "quadratic" && p.box_radius);
    const bool nonsmooth = p.kind == "quadratic" && p.l1 > 0.0;

    const GraphSpec& g = c.graph;
    const bool known_graph = g.kind == "paper" || g.kind == "complete" || g.kind == "cycle" || g.kind == "ring" ||
                             g.kind == "path" || g.kind == "replay";
    if (!known_graph) out.push_back("graph.kind: unknown graph '" + g.kind + "'");
    if (g.kind == "replay" && g.file.empty()) out.push_back("graph.file is required for kind = replay");
    if (g.kind == "paper" && p.kind != "file" && p.agents < 3) out.push_back("graph.kind = paper needs at least 3 agents");
    const bool symmetric = g.symmetrize || g.kind == "complete" || g.kind == "ring" || g.kind == "path";
    if (requires_symmetric_graph(g.mixing) && !symmetric && g.kind != "replay") {
        out.push_back("graph.mixing = " + std::string(mixing_rule_name(g.mixing)) + " needs an undirected graph");
    }
    const bool is_static = g.kind != "paper";

    try {
        c.options.schedule.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("schedule: ") + e.what());
    }
    if (c.benchmark_schedule) {
        try {
            c.benchmark_schedule->validate();
        } catch (const std::exception& e) {
            out.push_back(std::string("benchmark: ") + e.what());
        }
    }

    if (needs_doubly_stochastic(c.variant) && g.mixing == MixingRule::push_sum) {
        out.push_back("algorithm.variant = " + variant + " needs doubly stochastic weights, not push-sum");
    }
    if ((c.variant == Algorithm::push_diging || c.variant == Algorithm::subgradient_push) &&
        g.mixing != MixingRule::push_sum) {
        out.push_back("algorithm.variant = " + variant + " needs push-sum weights");
    }
    if (needs_smooth(c.variant) && (constrained || nonsmooth)) {
        out.push_back("algorithm.variant = " + variant + " needs an unconstrained smooth problem");
    }
    if (c.variant == Algorithm::subgradient_push && nonsmooth) {
        out.push_back("algorithm.variant = subgrad-push needs G = 0");
    }
    if ((c.variant == Algorithm::aug_dgm || c.variant == Algorithm::add_opt) && !is_static) {
        out.push_back("algorithm.variant = " + variant + " needs a static graph");
    }
    if ((c.variant == Algorithm::diging || c.variant == Algorithm::add_opt) &&
        c.options.schedule.kind() != StepSizeSchedule::Kind::constant) {
        out.push_back("algorithm.variant = " + variant + " needs schedule.kind = constant");
    }
    if ((c.variant == Algorithm::sonata || c.variant == Algorithm::sonata_next) &&
        c.options.direction == Direction::cta && constrained) {
        out.push_back("algorithm.direction = cta is not supported with a constraint set");
    }
    if (c.options.surrogate.kind == SurrogateKind::huber_sca && p.kind != "huber" && p.kind != "file") {
        out.push_back("algorithm.surrogate = huber-sca needs problem.kind = huber");
    }
    if (!(c.options.surrogate.tau > 0.0)) out.push_back("algorithm.tau must be positive");
    if (!(c.options.surrogate.epsilon > 0.0)) out.push_back("algorithm.epsilon must be positive");
    if (!(c.options.inner.tolerance > 0.0)) out.push_back("algorithm.inner_tol must be positive");
    if (c.options.inner.max_iterations < 1) out.push_back("algorithm.inner_max_iterations must be at least 1");

    if (c.runs < 1) out.push_back("run.runs must be at least 1");
    if (c.options.max_iterations < 1) out.push_back("run.iterations must be at least 1");
    return out;
}

void validate(const ExperimentConfig& config) {
    auto violations = config_violations(config);
    if (!violations.empty()) throw ConfigError(std::move(violations));
}

namespace {

std::string schedule_lines(const StepSizeSchedule& s) {
    std::string out = "kind = " + std::string(schedule_kind_name(s.kind())) + "\n";
    out += "alpha0 = " + format_double(s.alpha0()) + "\n";
    if (s.kind() == StepSizeSchedule::Kind::polynomial) out += "beta = " + format_double(s.beta()) + "\n";
    if (s.kind() == StepSizeSchedule::Kind::recursive) out += "mu = " + format_double(s.mu()) + "\n";
    return out;
}

}  // namespace

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream out;
    const ProblemSpec& p = c.problem;
    out << "[problem]\nkind = " << p.kind << "\nagents = " << p.agents << "\ndimension = " << p.dimension
        << "\nrows = " << p.rows << "\nmeasurements = " << p.measurements << "\ntargets = " << p.targets
        << "\nsigma = " << format_double(p.sigma) << "\noutlier_scale = " << format_double(p.outlier_scale)
        << "\ncutoff_scale = " << format_double(p.cutoff_scale) << "\nnoiseless = " << (p.noiseless ? "true" : "false")
        << "\nnoise_scale = " << format_double(p.noise_scale) << "\nl1 = " << format_double(p.l1) << '\n';
    if (p.box_radius) out << "box_radius = " << format_double(*p.box_radius) << '\n';
    if (!p.path.empty()) out << "path = " << p.path << '\n';

    out << "\n[graph]\nkind = " << c.graph.kind << "\nrandom_out_edges = " << c.graph.random_out_edges
        << "\nsymmetrize = " << (c.graph.symmetrize ? "true" : "false") << '\n';
    if (!c.graph.file.empty()) out << "file = " << c.graph.file << '\n';
    out << "mixing = " << mixing_rule_name(c.graph.mixing) << '\n';

    const VariantOptions& o = c.options;
    out << "\n[algorithm]\nvariant = " << algorithm_name(c.variant) << "\ndirection = " << direction_name(o.direction)
        << "\nsurrogate = " << surrogate_kind_name(o.surrogate.kind) << "\ntau = " << format_double(o.surrogate.tau)
        << "\nepsilon = " << format_double(o.surrogate.epsilon) << "\naug_dgm_form = "
        << (o.aug_dgm_form == AugDgmForm::coordinated ? "coordinated" : "uncoordinated")
        << "\nadd_opt_form = " << (o.add_opt_form == AddOptForm::push ? "push" : "row-stochastic")
        << "\ninner_tol = " << format_double(o.inner.tolerance)
        << "\ninner_max_iterations = " << o.inner.max_iterations << '\n';

    out << "\n[schedule]\n" << schedule_lines(o.schedule);
    if (c.benchmark_schedule) {
        out << "\n[benchmark]\nalpha0 = " << format_double(c.benchmark_schedule->alpha0())
            << "\nmu = " << format_double(c.benchmark_schedule->mu()) << '\n';
    }
    out << "\n[run]\nseed = " << c.seed << "\nruns = " << c.runs << "\niterations = " << o.max_iterations
        << "\nstart = " << (c.random_start ? "random" : "zero")
        << "\nterminate = " << (o.termination.enabled ? "true" : "false") << "\ntol_J = " << format_double(o.termination.J)
        << "\ntol_D = " << format_double(o.termination.D) << "\nthreads = " << c.threads << '\n';
    return out.str();
}

ProblemInstance build_problem(const ProblemSpec& spec, std::uint64_t run_seed, std::uint64_t master_seed) {
    if (spec.kind == "quadratic") {
        QuadraticOracleOptions o;
        o.seed = run_seed;
        o.agents = spec.agents;
        o.dimension = spec.dimension;
        o.rows = spec.rows;
        o.l1_weight = spec.l1;
        o.box_radius = spec.box_radius;
        return build_quadratic_oracle(o);
    }
    if (spec.kind == "huber") {
        HuberOptions o;
        o.seed = run_seed;
        o.truth_seed = master_seed;
        o.agents = spec.agents;
        o.measurements = spec.measurements;
        o.dimension = spec.dimension;
        o.sigma = spec.sigma;
        o.outlier_scale = spec.outlier_scale;
        o.cutoff_scale = spec.cutoff_scale;
        o.noiseless = spec.noiseless;
        return build_huber_regression(o);
    }
    if (spec.kind == "localization") {
        LocalizationOptions o;
        o.seed = run_seed;
        o.agents = spec.agents;
        o.targets = spec.targets;
        o.noise_scale = spec.noise_scale;
        return build_localization(o);
    }
    if (spec.kind == "file") {
        std::ifstream in(spec.path);
        if (!in) throw ArgumentError("cannot open problem file '" + spec.path + "'");
        return read_problem(in);
    }
    throw ArgumentError("unknown problem kind '" + spec.kind + "'");
}

DigraphSequence build_graphs(const GraphSpec& spec, std::size_t agents, std::uint64_t run_seed) {
    auto finish = [&](DigraphSequence seq) {
        return spec.symmetrize ? DigraphSequence::symmetrized(seq) : seq;
    };
    if (spec.kind == "paper") return finish(DigraphSequence::paper_topology(agents, run_seed, spec.random_out_edges));
    if (spec.kind == "complete") return finish(DigraphSequence::constant(complete_digraph(agents)));
    if (spec.kind == "cycle") return finish(DigraphSequence::constant(directed_cycle(agents)));
    if (spec.kind == "ring") return finish(DigraphSequence::constant(undirected_ring(agents)));
    if (spec.kind == "path") return finish(DigraphSequence::constant(undirected_path(agents)));
    if (spec.kind == "replay") {
        std::ifstream in(spec.file);
        if (!in) throw ArgumentError("cannot open graph file '" + spec.file + "'");
        return finish(DigraphSequence::replay(read_digraph_sequence(in, agents)));
    }
    throw ArgumentError("unknown graph kind '" + spec.kind + "'");
}

StepSizeSchedule effective_schedule(const ExperimentConfig& config) {
    if (config.variant == Algorithm::subgradient_push && config.benchmark_schedule) return *config.benchmark_schedule;
    return config.options.schedule;
}

}  // namespace sonata
