#include "hybridqvi/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace hybridqvi {

namespace {

enum class NodeKind { Constant, Variable, Unary, Binary, Call };
enum class VarKind { X, U, V, Y, T };

enum class Builtin {
    Min, Max, Exp, Log, Sqrt, Abs, Sin, Cos, Tan, Tanh, Floor, Sign, Pow, If, Piecewise
};

struct BuiltinInfo {
    Builtin id;
    int minArgs;
    int maxArgs;  // -1 = variadic
};

const std::map<std::string, BuiltinInfo>& builtins() {
    static const std::map<std::string, BuiltinInfo> table = {
        {"min", {Builtin::Min, 2, -1}},   {"max", {Builtin::Max, 2, -1}},
        {"exp", {Builtin::Exp, 1, 1}},    {"log", {Builtin::Log, 1, 1}},
        {"sqrt", {Builtin::Sqrt, 1, 1}},  {"abs", {Builtin::Abs, 1, 1}},
        {"sin", {Builtin::Sin, 1, 1}},    {"cos", {Builtin::Cos, 1, 1}},
        {"tan", {Builtin::Tan, 1, 1}},    {"tanh", {Builtin::Tanh, 1, 1}},
        {"floor", {Builtin::Floor, 1, 1}},{"sign", {Builtin::Sign, 1, 1}},
        {"pow", {Builtin::Pow, 2, 2}},    {"if", {Builtin::If, 3, 3}},
        {"piecewise", {Builtin::Piecewise, 3, -1}},
    };
    return table;
}

}  // namespace

struct Expr::Node {
    NodeKind kind;
    double value = 0.0;                 // Constant
    VarKind var = VarKind::T;           // Variable
    int varIndex = 0;                   // 0-based (x1 -> 0)
    char op = 0;                        // Unary '-' / Binary '+-*/^<>lgen'
    Builtin fn = Builtin::Min;          // Call
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
}

NodePtr make_var(VarKind k, int idx) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Variable;
    n->var = k;
    n->varIndex = idx;
    return n;
}

NodePtr make_binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& src) : src_(src) {}

    NodePtr parse() {
        skip_ws();
        if (eof()) throw ExprError("empty expression");
        NodePtr e = comparison();
        skip_ws();
        if (!eof()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ExprError("expression error at position " + std::to_string(pos_) +
                        " in \"" + src_ + "\": " + msg);
    }

    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return eof() ? '\0' : src_[pos_]; }
    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    // comparison ops are encoded as single chars on the node:
    // '<' '>' 'l'(<=) 'g'(>=) 'e'(==) 'n'(!=)
    NodePtr comparison() {
        NodePtr lhs = additive();
        skip_ws();
        if (peek() == '<' || peek() == '>' || peek() == '=' || peek() == '!') {
            char first = src_[pos_++];
            char op = first;
            if (peek() == '=') {
                ++pos_;
                op = first == '<' ? 'l' : first == '>' ? 'g' : first == '=' ? 'e' : 'n';
            } else if (first == '=' || first == '!') {
                fail("expected '=' after comparison start");
            }
            return make_binary(op, std::move(lhs), additive());
        }
        return lhs;
    }

    NodePtr additive() {
        NodePtr lhs = multiplicative();
        for (;;) {
            skip_ws();
            if (peek() == '+' || peek() == '-') {
                char op = src_[pos_++];
                lhs = make_binary(op, std::move(lhs), multiplicative());
            } else {
                return lhs;
            }
        }
    }

    NodePtr multiplicative() {
        NodePtr lhs = unary();
        for (;;) {
            skip_ws();
            if (peek() == '*' || peek() == '/') {
                char op = src_[pos_++];
                lhs = make_binary(op, std::move(lhs), unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        skip_ws();
        if (consume('-')) {
            auto n = std::make_shared<Expr::Node>();
            n->kind = NodeKind::Unary;
            n->op = '-';
            n->args = {unary()};
            return n;
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            return make_binary('^', std::move(base), unary());  // right assoc
        }
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (eof()) fail("unexpected end of input");
        char c = peek();
        if (c == '(') {
            ++pos_;
            NodePtr e = comparison();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return make_const(v);
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name = src_.substr(start, pos_ - start);

        skip_ws();
        if (peek() == '(') {
            auto it = builtins().find(name);
            if (it == builtins().end()) fail("unknown function '" + name + "'");
            ++pos_;
            std::vector<NodePtr> args;
            if (!consume(')')) {
                do {
                    args.push_back(comparison());
                } while (consume(','));
                if (!consume(')')) fail("expected ')' in call to '" + name + "'");
            }
            const BuiltinInfo& info = it->second;
            if (static_cast<int>(args.size()) < info.minArgs ||
                (info.maxArgs >= 0 && static_cast<int>(args.size()) > info.maxArgs))
                fail("wrong argument count for '" + name + "'");
            if (info.id == Builtin::Piecewise && args.size() % 2 == 0)
                fail("piecewise needs cond/value pairs plus a default");
            auto n = std::make_shared<Expr::Node>();
            n->kind = NodeKind::Call;
            n->fn = info.id;
            n->args = std::move(args);
            return n;
        }

        if (name == "t") return make_var(VarKind::T, 0);
        if (name == "pi") return make_const(M_PI);
        if (name == "e") return make_const(M_E);
        if (name.size() >= 2) {
            char head = name[0];
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (digits) {
                int idx = std::atoi(name.c_str() + 1) - 1;
                if (idx < 0) fail("variable indices start at 1");
                switch (head) {
                    case 'x': return make_var(VarKind::X, idx);
                    case 'u': return make_var(VarKind::U, idx);
                    case 'v': return make_var(VarKind::V, idx);
                    case 'y': return make_var(VarKind::Y, idx);
                    default: break;
                }
            }
        }
        fail("unknown identifier '" + name + "'");
    }
};

double eval_node(const Expr::Node& n, const EvalContext& ctx) {
    switch (n.kind) {
        case NodeKind::Constant:
            return n.value;
        case NodeKind::Variable: {
            const std::span<const double>* src = nullptr;
            switch (n.var) {
                case VarKind::T: return ctx.t;
                case VarKind::X: src = &ctx.x; break;
                case VarKind::U: src = &ctx.u; break;
                case VarKind::V: src = &ctx.v; break;
                case VarKind::Y: src = &ctx.y; break;
            }
            if (n.varIndex >= static_cast<int>(src->size()))
                throw ExprError("variable index out of range for this evaluation");
            return (*src)[n.varIndex];
        }
        case NodeKind::Unary:
            return -eval_node(*n.args[0], ctx);
        case NodeKind::Binary: {
            const double a = eval_node(*n.args[0], ctx);
            const double b = eval_node(*n.args[1], ctx);
            switch (n.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/': return a / b;
                case '^': return std::pow(a, b);
                case '<': return a < b ? 1.0 : 0.0;
                case '>': return a > b ? 1.0 : 0.0;
                case 'l': return a <= b ? 1.0 : 0.0;
                case 'g': return a >= b ? 1.0 : 0.0;
                case 'e': return a == b ? 1.0 : 0.0;
                case 'n': return a != b ? 1.0 : 0.0;
            }
            throw ExprError("corrupt expression node");
        }
        case NodeKind::Call: {
            switch (n.fn) {
                case Builtin::Min: {
                    double m = eval_node(*n.args[0], ctx);
                    for (std::size_t i = 1; i < n.args.size(); ++i)
                        m = std::min(m, eval_node(*n.args[i], ctx));
                    return m;
                }
                case Builtin::Max: {
                    double m = eval_node(*n.args[0], ctx);
                    for (std::size_t i = 1; i < n.args.size(); ++i)
                        m = std::max(m, eval_node(*n.args[i], ctx));
                    return m;
                }
                case Builtin::Exp: return std::exp(eval_node(*n.args[0], ctx));
                case Builtin::Log: return std::log(eval_node(*n.args[0], ctx));
                case Builtin::Sqrt: return std::sqrt(eval_node(*n.args[0], ctx));
                case Builtin::Abs: return std::abs(eval_node(*n.args[0], ctx));
                case Builtin::Sin: return std::sin(eval_node(*n.args[0], ctx));
                case Builtin::Cos: return std::cos(eval_node(*n.args[0], ctx));
                case Builtin::Tan: return std::tan(eval_node(*n.args[0], ctx));
                case Builtin::Tanh: return std::tanh(eval_node(*n.args[0], ctx));
                case Builtin::Floor: return std::floor(eval_node(*n.args[0], ctx));
                case Builtin::Sign: {
                    const double a = eval_node(*n.args[0], ctx);
                    return a > 0 ? 1.0 : a < 0 ? -1.0 : 0.0;
                }
                case Builtin::Pow:
                    return std::pow(eval_node(*n.args[0], ctx), eval_node(*n.args[1], ctx));
                case Builtin::If:
                    return eval_node(*n.args[0], ctx) != 0.0 ? eval_node(*n.args[1], ctx)
                                                             : eval_node(*n.args[2], ctx);
                case Builtin::Piecewise: {
                    std::size_t i = 0;
                    for (; i + 1 < n.args.size(); i += 2)
                        if (eval_node(*n.args[i], ctx) != 0.0) return eval_node(*n.args[i + 1], ctx);
                    return eval_node(*n.args.back(), ctx);
                }
            }
            throw ExprError("corrupt expression node");
        }
    }
    throw ExprError("corrupt expression node");
}

}  // namespace

Expr Expr::parse(const std::string& src) {
    Expr e;
    e.root_ = Parser(src).parse();
    e.src_ = src;
    return e;
}

double Expr::eval(const EvalContext& ctx) const {
    if (!root_) throw ExprError("evaluating empty expression");
    return eval_node(*root_, ctx);
}

}  // namespace hybridqvi
