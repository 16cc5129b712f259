#ifndef CCGEO_EXPRESSION_HPP
#define CCGEO_EXPRESSION_HPP

#include <memory>
#include <string>

#include "ccgeo/types.hpp"

namespace ccgeo {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line, int col)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ")"),
          line(line),
          col(col) {}
    int line;
    int col;
};

namespace detail {
struct ExprNode;
}

/// A parsed arithmetic expression in variables x1..xn.
/// Grammar: + - * / ^ (right-assoc), parentheses, real literals, and the
/// functions sin, cos, exp, sqrt.
class Expression {
  public:
    /// Throws ParseError with line/column on malformed input.
    static Expression parse(const std::string& src, int n_vars);

    double eval(const Vec& x) const;

    const std::string& source() const { return src_; }

  private:
    std::shared_ptr<const detail::ExprNode> root_;
    std::string src_;
};

}  // namespace ccgeo

#endif
