#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "quantsurf/errors.hpp"
#include "quantsurf/scalars.hpp"

namespace quantsurf {

/// Constant of the evaluation scalar type, shaped like an existing value
/// (series types carry their truncation order through `like`).
template <typename T>
T expr_constant(double v, const T&) {
    return T(v);
}

/// Parsed arithmetic expression in the variables x, y.
///
/// Grammar: + - * / ^ (right assoc), unary minus, parentheses,
/// functions sin cos exp log sqrt, numeric literals, pi, and named
/// constants supplied at parse time.  Template evaluation admits any
/// scalar with the matching operator and function overloads, so the
/// same tree yields values, derivative jets, or truncated series.
class Expr {
public:
    Expr() = default;

    static Expr parse(const std::string& text, const std::map<std::string, double>& params = {});

    template <typename T>
    T eval(const T& x, const T& y) const {
        if (nodes_.empty()) throw ParseError("empty expression");
        return eval_node<T>(static_cast<int>(nodes_.size()) - 1, x, y);
    }

    double operator()(double x, double y) const { return eval<double>(x, y); }

    const std::string& text() const { return text_; }
    bool empty() const { return nodes_.empty(); }

private:
    enum class Op : std::uint8_t { Num, VarX, VarY, Add, Sub, Mul, Div, Pow, PowInt, Neg, Sin, Cos, Exp, Log, Sqrt };

    struct Node {
        Op op;
        double num = 0;      // Num payload
        long long iexp = 0;  // PowInt payload
        int a = -1, b = -1;  // child indices
    };

    template <typename T>
    T eval_node(int i, const T& x, const T& y) const {
        const Node& n = nodes_[static_cast<size_t>(i)];
        switch (n.op) {
            case Op::Num: return expr_constant(n.num, x);
            case Op::VarX: return x;
            case Op::VarY: return y;
            case Op::Add: return eval_node<T>(n.a, x, y) + eval_node<T>(n.b, x, y);
            case Op::Sub: return eval_node<T>(n.a, x, y) - eval_node<T>(n.b, x, y);
            case Op::Mul: return eval_node<T>(n.a, x, y) * eval_node<T>(n.b, x, y);
            case Op::Div: return eval_node<T>(n.a, x, y) / eval_node<T>(n.b, x, y);
            case Op::Pow: {
                using std::pow;
                return pow(eval_node<T>(n.a, x, y), eval_node<T>(n.b, x, y));
            }
            case Op::PowInt: return pow_int(eval_node<T>(n.a, x, y), n.iexp);
            case Op::Neg: return -eval_node<T>(n.a, x, y);
            case Op::Sin: {
                using std::sin;
                return sin(eval_node<T>(n.a, x, y));
            }
            case Op::Cos: {
                using std::cos;
                return cos(eval_node<T>(n.a, x, y));
            }
            case Op::Exp: {
                using std::exp;
                return exp(eval_node<T>(n.a, x, y));
            }
            case Op::Log: {
                using std::log;
                return log(eval_node<T>(n.a, x, y));
            }
            case Op::Sqrt: {
                using std::sqrt;
                return sqrt(eval_node<T>(n.a, x, y));
            }
        }
        throw ParseError("corrupt expression node");
    }

    int push(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    friend class ExprParser;

    std::vector<Node> nodes_;  // last node is the root
    std::string text_;
};

} // namespace quantsurf
