#include "ccgeo/expression.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace ccgeo {
namespace detail {

enum class NodeKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };

struct ExprNode {
    NodeKind kind;
    double value = 0.0;  // Constant
    int var = 0;         // Variable (0-based)
    std::shared_ptr<const ExprNode> a, b;
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

NodePtr make(NodeKind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

struct Token {
    enum Kind { Number, Ident, Op, LParen, RParen, End } kind;
    double num = 0.0;
    std::string text;
    char op = 0;
    int line = 1, col = 1;
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
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            try {
                tok_.num = std::stod(src_.substr(pos_), &used);
            } catch (const std::exception&) {
                throw ParseError("malformed number", line_, col_);
            }
            tok_.kind = Token::Number;
            pos_ += used;
            col_ += static_cast<int>(used);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
                ++col_;
            }
            tok_.kind = Token::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        if (c == '(') {
            tok_.kind = Token::LParen;
        } else if (c == ')') {
            tok_.kind = Token::RParen;
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            tok_.kind = Token::Op;
            tok_.op = c;
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
        }
        ++pos_;
        ++col_;
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
  public:
    Parser(const std::string& src, int n_vars) : lex_(src), n_vars_(n_vars) {}

    NodePtr parse() {
        NodePtr e = expr();
        const Token& t = lex_.peek();
        if (t.kind != Token::End) throw ParseError("trailing input", t.line, t.col);
        return e;
    }

  private:
    // expr := term (('+'|'-') term)*
    NodePtr expr() {
        NodePtr left = term();
        while (lex_.peek().kind == Token::Op &&
               (lex_.peek().op == '+' || lex_.peek().op == '-')) {
            char op = lex_.take().op;
            NodePtr right = term();
            left = make(op == '+' ? NodeKind::Add : NodeKind::Sub, left, right);
        }
        return left;
    }

    // term := factor (('*'|'/') factor)*
    NodePtr term() {
        NodePtr left = factor();
        while (lex_.peek().kind == Token::Op &&
               (lex_.peek().op == '*' || lex_.peek().op == '/')) {
            char op = lex_.take().op;
            NodePtr right = factor();
            left = make(op == '*' ? NodeKind::Mul : NodeKind::Div, left, right);
        }
        return left;
    }

    // factor := ('+'|'-') factor | power
    NodePtr factor() {
        if (lex_.peek().kind == Token::Op && (lex_.peek().op == '+' || lex_.peek().op == '-')) {
            char op = lex_.take().op;
            NodePtr inner = factor();
            return op == '-' ? make(NodeKind::Neg, inner) : inner;
        }
        return power();
    }

    // power := atom ('^' factor)?   (right associative, binds tighter than unary minus on the left)
    NodePtr power() {
        NodePtr base = atom();
        if (lex_.peek().kind == Token::Op && lex_.peek().op == '^') {
            lex_.take();
            NodePtr exp = factor();
            return make(NodeKind::Pow, base, exp);
        }
        return base;
    }

    NodePtr atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::Number: {
                auto n = std::make_shared<ExprNode>();
                n->kind = NodeKind::Constant;
                n->value = t.num;
                return n;
            }
            case Token::Ident:
                return ident(t);
            case Token::LParen: {
                NodePtr e = expr();
                Token close = lex_.take();
                if (close.kind != Token::RParen)
                    throw ParseError("expected ')'", close.line, close.col);
                return e;
            }
            default:
                throw ParseError("expected a number, variable, or '('", t.line, t.col);
        }
    }

    NodePtr ident(const Token& t) {
        if (t.text == "sin" || t.text == "cos" || t.text == "exp" || t.text == "sqrt") {
            Token open = lex_.take();
            if (open.kind != Token::LParen)
                throw ParseError("expected '(' after function name", open.line, open.col);
            NodePtr arg = expr();
            Token close = lex_.take();
            if (close.kind != Token::RParen)
                throw ParseError("expected ')'", close.line, close.col);
            NodeKind k = t.text == "sin"   ? NodeKind::Sin
                         : t.text == "cos" ? NodeKind::Cos
                         : t.text == "exp" ? NodeKind::Exp
                                           : NodeKind::Sqrt;
            return make(k, arg);
        }
        if (t.text.size() >= 2 && t.text[0] == 'x') {
            int idx = 0;
            bool digits = true;
            for (size_t i = 1; i < t.text.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(t.text[i]))) {
                    digits = false;
                    break;
                }
                idx = idx * 10 + (t.text[i] - '0');
            }
            if (digits) {
                if (idx < 1 || idx > n_vars_)
                    throw ParseError("variable '" + t.text + "' out of range (have x1..x" +
                                         std::to_string(n_vars_) + ")",
                                     t.line, t.col);
                auto n = std::make_shared<ExprNode>();
                n->kind = NodeKind::Variable;
                n->var = idx - 1;
                return n;
            }
        }
        throw ParseError("unknown identifier '" + t.text + "'", t.line, t.col);
    }

    Lexer lex_;
    int n_vars_;
};

double eval_node(const ExprNode& n, const Vec& x) {
    switch (n.kind) {
        case NodeKind::Constant:
            return n.value;
        case NodeKind::Variable:
            return x[n.var];
        case NodeKind::Add:
            return eval_node(*n.a, x) + eval_node(*n.b, x);
        case NodeKind::Sub:
            return eval_node(*n.a, x) - eval_node(*n.b, x);
        case NodeKind::Mul:
            return eval_node(*n.a, x) * eval_node(*n.b, x);
        case NodeKind::Div:
            return eval_node(*n.a, x) / eval_node(*n.b, x);
        case NodeKind::Pow:
            return std::pow(eval_node(*n.a, x), eval_node(*n.b, x));
        case NodeKind::Neg:
            return -eval_node(*n.a, x);
        case NodeKind::Sin:
            return std::sin(eval_node(*n.a, x));
        case NodeKind::Cos:
            return std::cos(eval_node(*n.a, x));
        case NodeKind::Exp:
            return std::exp(eval_node(*n.a, x));
        case NodeKind::Sqrt:
            return std::sqrt(eval_node(*n.a, x));
    }
    return 0.0;
}

}  // namespace
}  // namespace detail

Expression Expression::parse(const std::string& src, int n_vars) {
    Expression e;
    e.root_ = detail::Parser(src, n_vars).parse();
    e.src_ = src;
    return e;
}

double Expression::eval(const Vec& x) const { return detail::eval_node(*root_, x); }

}  // namespace ccgeo
