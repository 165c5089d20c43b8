#include "quantsurf/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace quantsurf {

namespace {

struct Token {
    enum Kind { Number, Ident, Symbol, End } kind;
    double num = 0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    Token next() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ >= s_.size()) return {Token::End, 0, ""};
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError("bad number at '" + s_.substr(pos_, 8) + "'");
            pos_ += static_cast<size_t>(end - begin);
            return {Token::Number, v, ""};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            return {Token::Ident, 0, s_.substr(start, pos_ - start)};
        }
        ++pos_;
        return {Token::Symbol, 0, std::string(1, c)};
    }

private:
    const std::string& s_;
    size_t pos_ = 0;
};

} // namespace

class ExprParser {
public:
    ExprParser(const std::string& text, const std::map<std::string, double>& params)
        : lex_(text), params_(params) {
        advance();
    }

    Expr run(const std::string& text) {
        Expr e;
        e.text_ = text;
        int root = parse_sum(e);
        if (tok_.kind != Token::End)
            throw ParseError("trailing input near '" + tok_.text + "'");
        (void)root;
        return e;
    }

private:
    using Op = decltype(Expr::Node::op);

    static constexpr Op OpOf(char c) {
        switch (c) {
            case 'N': return Op::Num;
            case 'X': return Op::VarX;
            case 'Y': return Op::VarY;
            case 'A': return Op::Add;
            case 'S': return Op::Sub;
            case 'M': return Op::Mul;
            case 'D': return Op::Div;
            case 'P': return Op::Pow;
            case 'I': return Op::PowInt;
            case 'G': return Op::Neg;
            case 's': return Op::Sin;
            case 'c': return Op::Cos;
            case 'e': return Op::Exp;
            case 'l': return Op::Log;
            case 'q': return Op::Sqrt;
        }
        return Op::Num;
    }

    void advance() { tok_ = lex_.next(); }

    bool accept_symbol(const char* s) {
        if (tok_.kind == Token::Symbol && tok_.text == s) {
            advance();
            return true;
        }
        return false;
    }

    int parse_sum(Expr& e) {
        int a = parse_term(e);
        for (;;) {
            if (accept_symbol("+"))
                a = push2(e, 'A', a, parse_term(e));
            else if (accept_symbol("-"))
                a = push2(e, 'S', a, parse_term(e));
            else
                return a;
        }
    }

    int parse_term(Expr& e) {
        int a = parse_factor(e);
        for (;;) {
            if (accept_symbol("*"))
                a = push2(e, 'M', a, parse_factor(e));
            else if (accept_symbol("/"))
                a = push2(e, 'D', a, parse_factor(e));
            else
                return a;
        }
    }

    // right-associative power
    int parse_factor(Expr& e) {
        int a = parse_unary(e);
        if (!accept_symbol("^")) return a;
        int b = parse_factor(e);
        const auto& bn = e.nodes_[static_cast<size_t>(b)];
        if (bn.op == OpOf('N') && bn.num == std::floor(bn.num) && std::abs(bn.num) < 1e9) {
            Expr::Node n;
            n.op = OpOf('I');
            n.iexp = static_cast<long long>(bn.num);
            n.a = a;
            return e.push(n);
        }
        return push2(e, 'P', a, b);
    }

    int parse_unary(Expr& e) {
        if (accept_symbol("-")) {
            Expr::Node n;
            n.op = OpOf('G');
            n.a = parse_unary(e);
            return e.push(n);
        }
        if (accept_symbol("+")) return parse_unary(e);
        return parse_primary(e);
    }

    int parse_primary(Expr& e) {
        if (tok_.kind == Token::Number) {
            Expr::Node n;
            n.op = OpOf('N');
            n.num = tok_.num;
            advance();
            return e.push(n);
        }
        if (tok_.kind == Token::Ident) {
            std::string name = tok_.text;
            advance();
            if (accept_symbol("(")) {
                int arg = parse_sum(e);
                if (!accept_symbol(")")) throw ParseError("missing ')' after " + name);
                Expr::Node n;
                n.a = arg;
                if (name == "sin")
                    n.op = OpOf('s');
                else if (name == "cos")
                    n.op = OpOf('c');
                else if (name == "exp")
                    n.op = OpOf('e');
                else if (name == "log")
                    n.op = OpOf('l');
                else if (name == "sqrt")
                    n.op = OpOf('q');
                else
                    throw ParseError("unknown function '" + name + "'");
                return e.push(n);
            }
            Expr::Node n;
            if (name == "x") {
                n.op = OpOf('X');
            } else if (name == "y") {
                n.op = OpOf('Y');
            } else if (name == "pi") {
                n.op = OpOf('N');
                n.num = 3.14159265358979323846;
            } else {
                auto it = params_.find(name);
                if (it == params_.end()) throw ParseError("unknown identifier '" + name + "'");
                n.op = OpOf('N');
                n.num = it->second;
            }
            return e.push(n);
        }
        if (accept_symbol("(")) {
            int a = parse_sum(e);
            if (!accept_symbol(")")) throw ParseError("missing ')'");
            return a;
        }
        throw ParseError("unexpected token '" + tok_.text + "'");
    }

    int push2(Expr& e, char op, int a, int b) {
        Expr::Node n;
        n.op = OpOf(op);
        n.a = a;
        n.b = b;
        return e.push(n);
    }

    Lexer lex_;
    Token tok_;
    const std::map<std::string, double>& params_;
};

Expr Expr::parse(const std::string& text, const std::map<std::string, double>& params) {
    ExprParser p(text, params);
    return p.run(text);
}

} // namespace quantsurf
