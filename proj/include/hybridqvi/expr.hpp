// Fixed small expression language used by model files: variables x1..xd, t,
// u1.., v1.., y1.., arithmetic, comparisons, min/max, exp, piecewise.
// Models stay data; no code is loaded.
#ifndef HYBRIDQVI_EXPR_HPP
#define HYBRIDQVI_EXPR_HPP

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridqvi {

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Variable bindings for one evaluation. y holds the jump destination
// coordinates when evaluating controlled-jump costs C_c(x, y).
struct EvalContext {
    std::span<const double> x{};
    double t = 0.0;
    std::span<const double> u{};
    std::span<const double> v{};
    std::span<const double> y{};
};

class Expr {
public:
    Expr() = default;

    // Throws ExprError with position info on malformed input.
    static Expr parse(const std::string& src);

    double eval(const EvalContext& ctx) const;
    double operator()(const EvalContext& ctx) const { return eval(ctx); }

    bool valid() const { return root_ != nullptr; }
    const std::string& source() const { return src_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string src_;
};

}  // namespace hybridqvi

#endif
