#include "hjm/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace hjm {

struct Expression::Node {
    enum class Kind { Number, Var, Unary, Binary, Call, Index };
    Kind kind;
    double number = 0;
    std::string name;  // variable or function name
    char op = 0;
    std::vector<std::shared_ptr<const Node>> kids;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

struct Token {
    enum class Kind { Number, Ident, Symbol, End };
    Kind kind = Kind::End;
    double number = 0;
    std::string text;
    std::size_t pos = 0;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        tok_ = Token{};
        tok_.pos = i_;
        if (i_ >= src_.size()) {
            tok_.kind = Token::Kind::End;
            return;
        }
        const char c = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + i_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) throw ConfigError(err("malformed number"));
            tok_.kind = Token::Kind::Number;
            tok_.number = v;
            i_ += static_cast<std::size_t>(end - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) ||
                                       src_[j] == '_'))
                ++j;
            tok_.kind = Token::Kind::Ident;
            tok_.text = src_.substr(i_, j - i_);
            i_ = j;
            return;
        }
        if (std::string("+-*/^()[],").find(c) != std::string::npos) {
            tok_.kind = Token::Kind::Symbol;
            tok_.text = std::string(1, c);
            ++i_;
            return;
        }
        throw ConfigError(err(std::string("unexpected character '") + c + "'"));
    }

    std::string err(const std::string& what) const {
        return "expression error at offset " + std::to_string(i_) + ": " + what;
    }

    const std::string& src_;
    std::size_t i_ = 0;
    Token tok_;
};

int call_arity(const std::string& name) {
    if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt" ||
        name == "abs" || name == "norm")
        return 1;
    if (name == "min" || name == "max" || name == "dot") return 2;
    return -1;
}

class Parser {
  public:
    explicit Parser(const std::string& src) : lex_(src) {}

    NodePtr parse() {
        NodePtr e = expr(0);
        if (lex_.peek().kind != Token::Kind::End)
            throw ConfigError("expression error: unexpected trailing input at offset " +
                              std::to_string(lex_.peek().pos));
        return e;
    }

  private:
    bool at_symbol(const char* s) const {
        return lex_.peek().kind == Token::Kind::Symbol && lex_.peek().text == s;
    }

    void expect_symbol(const char* s) {
        if (!at_symbol(s))
            throw ConfigError(std::string("expression error: expected '") + s + "'");
        lex_.take();
    }

    // Binding powers: additive 10, multiplicative 20, unary minus 25,
    // power 30 (right-associative), indexing 40.
    NodePtr expr(int min_bp) {
        NodePtr lhs = prefix();
        for (;;) {
            if (lex_.peek().kind == Token::Kind::Symbol) {
                const std::string& s = lex_.peek().text;
                if (s == "[" && min_bp < 40) {
                    lex_.take();
                    NodePtr idx = expr(0);
                    expect_symbol("]");
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Kind::Index;
                    n->kids = {lhs, idx};
                    lhs = n;
                    continue;
                }
                int bp = 0;
                if (s == "+" || s == "-") bp = 10;
                else if (s == "*" || s == "/") bp = 20;
                else if (s == "^") bp = 30;
                if (bp > min_bp) {
                    const char op = lex_.take().text[0];
                    NodePtr rhs = expr(op == '^' ? bp - 1 : bp);
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Kind::Binary;
                    n->op = op;
                    n->kids = {lhs, rhs};
                    lhs = n;
                    continue;
                }
            }
            return lhs;
        }
    }

    NodePtr prefix() {
        const Token t = lex_.take();
        switch (t.kind) {
            case Token::Kind::Number: {
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Number;
                n->number = t.number;
                return n;
            }
            case Token::Kind::Ident: {
                if (at_symbol("(")) {
                    const int arity = call_arity(t.text);
                    if (arity < 0)
                        throw ConfigError("expression error: unknown function '" + t.text +
                                          "'");
                    lex_.take();
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Kind::Call;
                    n->name = t.text;
                    n->kids.push_back(expr(0));
                    while (at_symbol(",")) {
                        lex_.take();
                        n->kids.push_back(expr(0));
                    }
                    expect_symbol(")");
                    if (static_cast<int>(n->kids.size()) != arity)
                        throw ConfigError("expression error: '" + t.text + "' takes " +
                                          std::to_string(arity) + " argument(s)");
                    return n;
                }
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Var;
                n->name = t.text;
                return n;
            }
            case Token::Kind::Symbol:
                if (t.text == "(") {
                    NodePtr inner = expr(0);
                    expect_symbol(")");
                    return inner;
                }
                if (t.text == "-") {
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Kind::Unary;
                    n->op = '-';
                    n->kids = {expr(25)};
                    return n;
                }
                if (t.text == "+") return expr(25);
                break;
            case Token::Kind::End:
                break;
        }
        throw ConfigError("expression error: expected a value at offset " +
                          std::to_string(t.pos));
    }

    Lexer lex_;
};

double as_scalar(const ExprValue& v, const char* ctx) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw ConfigError(std::string("expression error: ") + ctx + " needs a scalar");
}

const Vec& as_vec(const ExprValue& v, const char* ctx) {
    if (const Vec* w = std::get_if<Vec>(&v)) return *w;
    throw ConfigError(std::string("expression error: ") + ctx + " needs a vector");
}

ExprValue eval_node(const Node& n, const ExprEnv& env) {
    switch (n.kind) {
        case Node::Kind::Number:
            return n.number;
        case Node::Kind::Var: {
            auto it = env.find(n.name);
            if (it != env.end()) return it->second;
            if (n.name == "pi") return M_PI;
            throw ConfigError("expression error: unknown name '" + n.name + "'");
        }
        case Node::Kind::Unary: {
            ExprValue a = eval_node(*n.kids[0], env);
            if (double* d = std::get_if<double>(&a)) return -*d;
            return ExprValue(Vec(-std::get<Vec>(a)));
        }
        case Node::Kind::Index: {
            const ExprValue base = eval_node(*n.kids[0], env);
            const Vec& v = as_vec(base, "indexing");
            const double raw = as_scalar(eval_node(*n.kids[1], env), "an index");
            const double r = std::round(raw);
            if (std::abs(raw - r) > 1e-9)
                throw ConfigError("expression error: index is not an integer");
            const int i = static_cast<int>(r);
            if (i < 0 || i >= v.size())
                throw ConfigError("expression error: index " + std::to_string(i) +
                                  " out of range");
            return v[i];
        }
        case Node::Kind::Binary: {
            ExprValue a = eval_node(*n.kids[0], env);
            ExprValue b = eval_node(*n.kids[1], env);
            const bool sa = std::holds_alternative<double>(a);
            const bool sb = std::holds_alternative<double>(b);
            switch (n.op) {
                case '+':
                case '-': {
                    const double sign = n.op == '+' ? 1.0 : -1.0;
                    if (sa && sb) return std::get<double>(a) + sign * std::get<double>(b);
                    if (!sa && !sb) {
                        const Vec& x = std::get<Vec>(a);
                        const Vec& y = std::get<Vec>(b);
                        if (x.size() != y.size())
                            throw ConfigError("expression error: vector sizes disagree");
                        return ExprValue(Vec(x + sign * y));
                    }
                    throw ConfigError("expression error: cannot add a scalar and a vector");
                }
                case '*':
                    if (sa && sb) return std::get<double>(a) * std::get<double>(b);
                    if (sa) return ExprValue(Vec(std::get<double>(a) * std::get<Vec>(b)));
                    if (sb) return ExprValue(Vec(std::get<Vec>(a) * std::get<double>(b)));
                    throw ConfigError(
                        "expression error: use dot(a,b) to multiply vectors");
                case '/': {
                    const double den = as_scalar(b, "a divisor");
                    if (sa) return std::get<double>(a) / den;
                    return ExprValue(Vec(std::get<Vec>(a) / den));
                }
                case '^':
                    return std::pow(as_scalar(a, "a power base"),
                                    as_scalar(b, "an exponent"));
            }
            throw ConfigError("expression error: bad operator");
        }
        case Node::Kind::Call: {
            if (n.name == "norm") {
                const ExprValue a = eval_node(*n.kids[0], env);
                return as_vec(a, "norm").norm();
            }
            if (n.name == "dot") {
                const ExprValue xa = eval_node(*n.kids[0], env);
                const ExprValue ya = eval_node(*n.kids[1], env);
                const Vec& x = as_vec(xa, "dot");
                const Vec& y = as_vec(ya, "dot");
                if (x.size() != y.size())
                    throw ConfigError("expression error: vector sizes disagree");
                return x.dot(y);
            }
            const double a = as_scalar(eval_node(*n.kids[0], env), n.name.c_str());
            if (n.name == "sin") return std::sin(a);
            if (n.name == "cos") return std::cos(a);
            if (n.name == "exp") return std::exp(a);
            if (n.name == "sqrt") return std::sqrt(a);
            if (n.name == "abs") return std::abs(a);
            const double b = as_scalar(eval_node(*n.kids[1], env), n.name.c_str());
            return n.name == "min" ? std::min(a, b) : std::max(a, b);
        }
    }
    throw ConfigError("expression error: bad node");
}

}  // namespace

Expression Expression::parse(const std::string& src) {
    Expression e;
    e.source_ = src;
    e.root_ = Parser(src).parse();
    return e;
}

ExprValue Expression::evaluate(const ExprEnv& env) const {
    if (!root_) throw ConfigError("empty expression");
    return eval_node(*root_, env);
}

double Expression::evaluate_scalar(const ExprEnv& env) const {
    return as_scalar(evaluate(env), "the result");
}

HamiltonianField make_expression_hamiltonian(const std::string& src, int dim) {
    Expression ex = Expression::parse(src);
    return HamiltonianField("expr:" + src, dim, [ex](const Vec& q, const Vec& p) {
        ExprEnv env;
        env["q"] = q;
        env["p"] = p;
        return ex.evaluate_scalar(env);
    });
}

std::function<double(const Vec&)> make_expression_scalar_field(const std::string& src,
                                                               int dim) {
    Expression ex = Expression::parse(src);
    (void)dim;
    return [ex](const Vec& q) {
        ExprEnv env;
        env["q"] = q;
        return ex.evaluate_scalar(env);
    };
}

}  // namespace hjm
