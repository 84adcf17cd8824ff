#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "sonata/errors.hpp"
#include "sonata/problems.hpp"

namespace sonata {
namespace {

constexpr const char* magic = "sonata-problem";
constexpr int format_version = 1;

std::string fmt(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

void write_vector(std::ostream& out, const Vector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) out << (k ? " " : "") << fmt(v(k));
    out << '\n';
}

void write_matrix(std::ostream& out, const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) write_vector(out, m.row(r).transpose());
}

std::string expect_word(std::istream& in, const char* what) {
    std::string word;
    if (!(in >> word)) throw ArgumentError(std::string("problem file truncated before ") + what);
    return word;
}

void expect_keyword(std::istream& in, const std::string& keyword) {
    const std::string word = expect_word(in, keyword.c_str());
    if (word != keyword) throw ArgumentError("problem file: expected '" + keyword + "', got '" + word + "'");
}

double read_double(std::istream& in) {
    const std::string word = expect_word(in, "a number");
    try {
        std::size_t used = 0;
        const double v = std::stod(word, &used);
        if (used != word.size()) throw ArgumentError("problem file: bad number '" + word + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ArgumentError("problem file: bad number '" + word + "'");
    }
}

std::size_t read_size(std::istream& in) {
    const double v = read_double(in);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ArgumentError("problem file: expected a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

Vector read_vector(std::istream& in, std::size_t n) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = read_double(in);
    return v;
}

Matrix read_matrix(std::istream& in, std::size_t rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_double(in);
    return m;
}

void write_optional(std::ostream& out, const char* key, const std::optional<Vector>& v) {
    if (!v) {
        out << key << " none\n";
        return;
    }
    out << key << ' ' << v->size() << '\n';
    write_vector(out, *v);
}

std::optional<Vector> read_optional(std::istream& in, const char* key) {
    expect_keyword(in, key);
    const std::string word = expect_word(in, key);
    if (word == "none") return std::nullopt;
    std::size_t used = 0;
    const auto n = std::stoul(word, &used);
    if (used != word.size()) throw ArgumentError(std::string("problem file: bad size for ") + key);
    return read_vector(in, n);
}

}  // namespace

void write_problem(std::ostream& out, const ProblemInstance& problem) {
    out << magic << ' ' << format_version << '\n';
    out << "name " << (problem.name.empty() ? "unnamed" : problem.name) << '\n';
    out << "agents " << problem.agent_count << '\n';
    out << "dimension " << problem.dimension << '\n';

    if (problem.regularizer->is_zero()) {
        out << "regularizer zero\n";
    } else if (auto l1 = std::dynamic_pointer_cast<const L1Regularizer>(problem.regularizer)) {
        out << "regularizer l1 " << fmt(l1->lambda()) << '\n';
    } else {
        throw ArgumentError("cannot serialize regularizer " + problem.regularizer->describe());
    }

    if (problem.feasible_set->is_whole_space()) {
        out << "set whole\n";
    } else if (auto box = std::dynamic_pointer_cast<const Box>(problem.feasible_set)) {
        out << "set box\n";
        write_vector(out, box->lower());
        write_vector(out, box->upper());
    } else {
        throw ArgumentError("cannot serialize feasible set " + problem.feasible_set->describe());
    }

    write_optional(out, "solution", problem.reference_solution);
    write_optional(out, "lipschitz", problem.lipschitz_bounds);

    for (std::size_t i = 0; i < problem.costs.size(); ++i) {
        const auto& cost = problem.costs[i];
        if (auto q = std::dynamic_pointer_cast<const QuadraticCost>(cost)) {
            out << "agent " << i << " quadratic " << q->Q().rows() << ' ' << q->Q().cols() << '\n';
            write_matrix(out, q->Q());
            write_vector(out, q->c());
        } else if (auto h = std::dynamic_pointer_cast<const HuberCost>(cost)) {
            out << "agent " << i << " huber " << h->A().rows() << ' ' << h->A().cols() << ' '
                << fmt(h->cutoff()) << '\n';
            write_matrix(out, h->A());
            write_vector(out, h->b());
        } else if (auto l = std::dynamic_pointer_cast<const LocalizationCost>(cost)) {
            out << "agent " << i << " localization " << l->target_count() << '\n';
            write_vector(out, l->sensor());
            write_vector(out, l->distances());
            write_vector(out, l->mask());
        } else {
            throw ArgumentError("cannot serialize the cost of agent " + std::to_string(i));
        }
    }
}

ProblemInstance read_problem(std::istream& in) {
    expect_keyword(in, magic);
    if (read_size(in) != static_cast<std::size_t>(format_version)) {
        throw ArgumentError("problem file: unsupported format version");
    }
    ProblemInstance problem;
    expect_keyword(in, "name");
    problem.name = expect_word(in, "name");
    expect_keyword(in, "agents");
    problem.agent_count = read_size(in);
    expect_keyword(in, "dimension");
    problem.dimension = read_size(in);

    expect_keyword(in, "regularizer");
    const std::string reg = expect_word(in, "regularizer");
    if (reg == "l1") {
        problem.regularizer = std::make_shared<L1Regularizer>(read_double(in));
    } else if (reg != "zero") {
        throw ArgumentError("problem file: unknown regularizer '" + reg + "'");
    }

    expect_keyword(in, "set");
    const std::string set = expect_word(in, "set");
    if (set == "box") {
        Vector lower = read_vector(in, problem.dimension);
        Vector upper = read_vector(in, problem.dimension);
        problem.feasible_set = std::make_shared<Box>(std::move(lower), std::move(upper));
    } else if (set != "whole") {
        throw ArgumentError("problem file: unknown set '" + set + "'");
    }

    problem.reference_solution = read_optional(in, "solution");
    problem.lipschitz_bounds = read_optional(in, "lipschitz");

    for (std::size_t i = 0; i < problem.agent_count; ++i) {
        expect_keyword(in, "agent");
        if (read_size(in) != i) throw ArgumentError("problem file: agents out of order");
        const std::string kind = expect_word(in, "cost kind");
        if (kind == "quadratic") {
            const std::size_t rows = read_size(in);
            const std::size_t cols = read_size(in);
            Matrix Q = read_matrix(in, rows, cols);
            problem.costs.push_back(std::make_shared<QuadraticCost>(std::move(Q), read_vector(in, rows)));
        } else if (kind == "huber") {
            const std::size_t rows = read_size(in);
            const std::size_t cols = read_size(in);
            const double cutoff = read_double(in);
            Matrix A = read_matrix(in, rows, cols);
            problem.costs.push_back(std::make_shared<HuberCost>(std::move(A), read_vector(in, rows), cutoff));
        } else if (kind == "localization") {
            const std::size_t targets = read_size(in);
            const Vector sensor = read_vector(in, 2);
            Vector distances = read_vector(in, targets);
            Vector mask = read_vector(in, targets);
            problem.costs.push_back(std::make_shared<LocalizationCost>(Eigen::Vector2d(sensor(0), sensor(1)),
                                                                       std::move(distances), std::move(mask)));
        } else {
            throw ArgumentError("problem file: unknown cost kind '" + kind + "'");
        }
    }
    problem.validate();
    return problem;
}

}  // namespace sonata
