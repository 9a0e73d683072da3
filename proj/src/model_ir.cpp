#include "orsynth/model_ir.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace orsynth {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

std::string join_lines(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

}  // namespace

SemanticError::SemanticError(std::vector<std::string> violations)
    : std::runtime_error(join_lines(violations)), violations_(std::move(violations)) {}

std::size_t OptModel::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return i;
    return npos;
}

const VariableDecl* OptModel::find(std::string_view name) const {
    auto i = index_of(name);
    return i == npos ? nullptr : &variables[i];
}

std::string_view to_string(VarKind kind) {
    switch (kind) {
        case VarKind::Continuous: return "continuous";
        case VarKind::Integer: return "integer";
        case VarKind::Binary: return "binary";
    }
    return "continuous";
}

std::string_view to_string(Sense sense) {
    switch (sense) {
        case Sense::Le: return "<=";
        case Sense::Ge: return ">=";
        case Sense::Eq: return "=";
    }
    return "=";
}

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    if (value == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

LinearExpression normalized(const LinearExpression& expr) {
    std::map<std::string, double> sums;
    for (const auto& t : expr.terms) sums[t.var] += t.coef;
    LinearExpression out;
    out.constant = expr.constant;
    for (auto& [var, coef] : sums)
        if (coef != 0.0) out.terms.push_back({coef, var});
    return out;
}

Constraint normalized(const Constraint& c) {
    Constraint out = c;
    out.expr = normalized(c.expr);
    out.rhs = c.rhs - out.expr.constant;
    out.expr.constant = 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Ident, Number, Colon, Comma, LBracket, RBracket, LParen, RParen, Plus, Minus,
                 Star, Le, Ge, Eq, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    std::size_t column = 0;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex_line(std::string_view line, std::size_t line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        Token tok;
        tok.column = i + 1;
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < line.size() && is_ident_char(line[j])) ++j;
            tok.kind = Tok::Ident;
            tok.text = std::string(line.substr(i, j - i));
            i = j;
        } else if (is_digit(c) || (c == '.' && i + 1 < line.size() && is_digit(line[i + 1]))) {
            std::size_t j = i;
            while (j < line.size() && is_digit(line[j])) ++j;
            if (j < line.size() && line[j] == '.') {
                ++j;
                while (j < line.size() && is_digit(line[j])) ++j;
            }
            if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
                if (k < line.size() && is_digit(line[k])) {
                    while (k < line.size() && is_digit(line[k])) ++k;
                    j = k;
                }
            }
            tok.kind = Tok::Number;
            tok.text = std::string(line.substr(i, j - i));
            auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(),
                                             tok.number);
            if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size())
                throw ParseError(line_no, tok.column, "malformed number '" + tok.text + "'");
            i = j;
        } else {
            auto two = line.substr(i, 2);
            if (two == "<=") {
                tok.kind = Tok::Le;
                i += 2;
            } else if (two == ">=") {
                tok.kind = Tok::Ge;
                i += 2;
            } else {
                switch (c) {
                    case ':': tok.kind = Tok::Colon; break;
                    case ',': tok.kind = Tok::Comma; break;
                    case '[': tok.kind = Tok::LBracket; break;
                    case ']': tok.kind = Tok::RBracket; break;
                    case '(': tok.kind = Tok::LParen; break;
                    case ')': tok.kind = Tok::RParen; break;
                    case '+': tok.kind = Tok::Plus; break;
                    case '-': tok.kind = Tok::Minus; break;
                    case '*': tok.kind = Tok::Star; break;
                    case '=': tok.kind = Tok::Eq; break;
                    default:
                        throw ParseError(line_no, i + 1,
                                         std::string("unexpected character '") + c + "'");
                }
                ++i;
            }
            tok.text = std::string(line.substr(tok.column - 1, i - tok.column + 1));
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = Tok::End;
    end.column = line.size() + 1;
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------------------
// Line parser

class LineParser {
public:
    LineParser(std::vector<Token> tokens, std::size_t line_no)
        : toks_(std::move(tokens)), line_(line_no) {}

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool accept(Tok kind) {
        if (peek().kind != kind) return false;
        next();
        return true;
    }
    const Token& expect(Tok kind, std::string_view what) {
        if (peek().kind != kind) fail("expected " + std::string(what));
        return next();
    }
    [[noreturn]] void fail(const std::string& message) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of line" : "'" + t.text + "'";
        throw ParseError(line_, t.column, message + ", found " + found);
    }
    void expect_end() {
        if (peek().kind != Tok::End) fail("unexpected trailing input");
    }

    std::string identifier(std::string_view what) { return expect(Tok::Ident, what).text; }

    // [+|-] (NUM | inf)
    double signed_number(bool allow_inf) {
        double sign = 1.0;
        if (accept(Tok::Minus))
            sign = -1.0;
        else
            accept(Tok::Plus);
        if (peek().kind == Tok::Number) return sign * next().number;
        if (allow_inf && peek().kind == Tok::Ident && peek().text == "inf") {
            next();
            return sign * kInf;
        }
        fail("expected number");
    }

    LinearExpression expression() {
        LinearExpression expr;
        bool first = true;
        while (true) {
            double sign = 1.0;
            if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
                sign = next().kind == Tok::Minus ? -1.0 : 1.0;
            } else if (!first) {
                break;
            }
            if (peek().kind == Tok::Number) {
                double value = next().number;
                accept(Tok::Star);
                if (peek().kind == Tok::Ident) {
                    expr.terms.push_back({sign * value, next().text});
                } else {
                    expr.constant += sign * value;
                }
            } else if (peek().kind == Tok::Ident) {
                expr.terms.push_back({sign, next().text});
            } else {
                fail("expected term");
            }
            first = false;
        }
        return expr;
    }

    std::vector<std::string> identifier_list() {
        std::vector<std::string> out;
        expect(Tok::LBracket, "'['");
        if (accept(Tok::RBracket)) return out;
        out.push_back(identifier("identifier"));
        while (accept(Tok::Comma)) out.push_back(identifier("identifier"));
        expect(Tok::RBracket, "']'");
        return out;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

void parse_var(LineParser& p, OptModel& model) {
    VariableDecl decl;
    decl.name = p.identifier("variable name");
    if (p.peek().kind == Tok::Ident) {
        const std::string& kind = p.peek().text;
        if (kind == "continuous")
            decl.kind = VarKind::Continuous;
        else if (kind == "integer")
            decl.kind = VarKind::Integer;
        else if (kind == "binary")
            decl.kind = VarKind::Binary;
        else
            p.fail("expected variable kind");
        p.next();
    }
    std::optional<double> lower, upper;
    while (p.peek().kind == Tok::Ge || p.peek().kind == Tok::Le) {
        bool is_lower = p.next().kind == Tok::Ge;
        auto& slot = is_lower ? lower : upper;
        if (slot) p.fail(is_lower ? "duplicate lower bound" : "duplicate upper bound");
        slot = p.signed_number(true);
    }
    p.expect_end();
    decl.lower = lower.value_or(0.0);
    decl.upper = upper.value_or(decl.kind == VarKind::Binary ? 1.0 : kInf);
    model.variables.push_back(std::move(decl));
}

void parse_objective(LineParser& p, OptModel& model, ObjSense sense) {
    Objective obj;
    obj.sense = sense;
    if (p.peek().kind == Tok::Ident && p.peek().text == "weight" &&
        p.peek(1).kind == Tok::Number) {
        p.next();
        obj.weight = p.next().number;
    }
    obj.expr = normalized(p.expression());
    p.expect_end();
    model.objectives.push_back(std::move(obj));
}

void parse_constraint(LineParser& p, OptModel& model) {
    Constraint c;
    c.name = p.identifier("constraint name");
    p.expect(Tok::Colon, "':'");
    c.expr = p.expression();
    switch (p.peek().kind) {
        case Tok::Le: c.sense = Sense::Le; break;
        case Tok::Ge: c.sense = Sense::Ge; break;
        case Tok::Eq: c.sense = Sense::Eq; break;
        default: p.fail("expected '<=', '>=' or '='");
    }
    p.next();
    c.rhs = p.signed_number(false);
    p.expect_end();
    model.constraints.push_back(normalized(c));
}

void parse_requirement(LineParser& p, OptModel& model) {
    std::string kind = p.identifier("requirement kind");
    p.expect(Tok::LParen, "'('");
    if (kind == "abs_ge") {
        AbsGe req;
        req.xi = p.identifier("variable");
        p.expect(Tok::Comma, "','");
        req.xj = p.identifier("variable");
        p.expect(Tok::Comma, "','");
        req.a = p.signed_number(false);
        p.expect(Tok::RParen, "')'");
        model.requirements.emplace_back(std::move(req));
    } else if (kind == "kway") {
        KWay req;
        const Token& k = p.expect(Tok::Number, "integer k");
        if (k.number != std::floor(k.number)) p.fail("kway k must be an integer");
        req.k = static_cast<long>(k.number);
        p.expect(Tok::Comma, "','");
        req.selectors = p.identifier_list();
        p.expect(Tok::Comma, "','");
        req.linked = p.identifier_list();
        p.expect(Tok::RParen, "')'");
        model.requirements.emplace_back(std::move(req));
    } else {
        throw ParseError(0, 0, "unknown requirement '" + kind + "'");
    }
    p.expect_end();
}

bool valid_identifier(std::string_view name) {
    if (name.empty() || !is_ident_start(name.front())) return false;
    return std::all_of(name.begin(), name.end(), is_ident_char);
}

}  // namespace

OptModel parse_model(std::string_view text) {
    OptModel model;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;

        LineParser p(lex_line(line, line_no), line_no);
        if (p.peek().kind == Tok::End) {
            if (end == text.size()) break;
            continue;
        }
        const Token& head = p.peek();
        if (head.kind != Tok::Ident) p.fail("expected a declaration keyword");
        std::string keyword = p.next().text;
        try {
            if (keyword == "var")
                parse_var(p, model);
            else if (keyword == "min")
                parse_objective(p, model, ObjSense::Minimize);
            else if (keyword == "max")
                parse_objective(p, model, ObjSense::Maximize);
            else if (keyword == "st")
                parse_constraint(p, model);
            else if (keyword == "require")
                parse_requirement(p, model);
            else
                throw ParseError(line_no, head.column, "unknown keyword '" + keyword + "'");
        } catch (const ParseError& e) {
            if (e.line() != 0) throw;
            throw ParseError(line_no, head.column, e.message());
        }
        if (end == text.size()) break;
    }
    auto violations = structural_violations(model);
    if (!violations.empty()) throw SemanticError(std::move(violations));
    return model;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void render_expression(std::ostringstream& os, const LinearExpression& expr) {
    bool first = true;
    for (const auto& t : expr.terms) {
        double mag = std::fabs(t.coef);
        if (first)
            os << (t.coef < 0 ? "-" : "");
        else
            os << (t.coef < 0 ? " - " : " + ");
        os << format_number(mag) << ' ' << t.var;
        first = false;
    }
    if (expr.constant != 0.0 || first) {
        if (first)
            os << format_number(expr.constant);
        else
            os << (expr.constant < 0 ? " - " : " + ") << format_number(std::fabs(expr.constant));
    }
}

void render_list(std::ostringstream& os, const std::vector<std::string>& items) {
    os << '[';
    for (std::size_t i = 0; i < items.size(); ++i) os << (i ? ", " : "") << items[i];
    os << ']';
}

}  // namespace

std::string render_model(const OptModel& model) {
    std::ostringstream os;
    for (const auto& v : model.variables) {
        os << "var " << v.name << ' ' << to_string(v.kind);
        bool default_lower = v.lower == 0.0;
        bool default_upper = v.kind == VarKind::Binary ? v.upper == 1.0 : std::isinf(v.upper) &&
                                                                             v.upper > 0;
        if (!default_lower) os << " >= " << format_number(v.lower);
        if (!default_upper) os << " <= " << format_number(v.upper);
        os << '\n';
    }
    for (const auto& o : model.objectives) {
        os << (o.sense == ObjSense::Minimize ? "min " : "max ");
        if (o.weight != 1.0) os << "weight " << format_number(o.weight) << ' ';
        render_expression(os, normalized(o.expr));
        os << '\n';
    }
    for (const auto& raw : model.constraints) {
        Constraint c = normalized(raw);
        os << "st " << c.name << ": ";
        render_expression(os, c.expr);
        os << ' ' << to_string(c.sense) << ' ' << format_number(c.rhs) << '\n';
    }
    for (const auto& r : model.requirements) {
        os << "require ";
        if (const auto* abs = std::get_if<AbsGe>(&r)) {
            os << "abs_ge(" << abs->xi << ", " << abs->xj << ", " << format_number(abs->a) << ')';
        } else {
            const auto& kw = std::get<KWay>(r);
            os << "kway(" << kw.k << ", ";
            render_list(os, kw.selectors);
            os << ", ";
            render_list(os, kw.linked);
            os << ')';
        }
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Structure

std::vector<std::string> structural_violations(const OptModel& model) {
    std::vector<std::string> out;
    std::set<std::string> declared;
    std::set<std::string> reported_undeclared;

    if (model.variables.empty()) out.push_back("model has no variables");
    if (model.objectives.empty()) out.push_back("model has no objective");
    if (model.objectives.size() > 2)
        out.push_back("objective count exceeds 2 (found " +
                      std::to_string(model.objectives.size()) + ")");

    for (const auto& v : model.variables) {
        if (!valid_identifier(v.name)) out.push_back("invalid identifier '" + v.name + "'");
        if (!declared.insert(v.name).second) out.push_back("duplicate variable " + v.name);
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower == kInf || v.upper == -kInf) {
            out.push_back("invalid bounds on " + v.name);
        } else if (v.lower > v.upper) {
            out.push_back("bound conflict on " + v.name + ": lower " + format_number(v.lower) +
                          " exceeds upper " + format_number(v.upper));
        }
        if (v.kind == VarKind::Binary && (v.lower != 0.0 || v.upper != 1.0))
            out.push_back("binary bound conflict on " + v.name);
    }

    auto check_ref = [&](const std::string& name) {
        if (!declared.count(name) && reported_undeclared.insert(name).second)
            out.push_back("undeclared variable " + name);
    };
    auto check_expr = [&](const LinearExpression& e, const std::string& where) {
        for (const auto& t : e.terms) {
            check_ref(t.var);
            if (!std::isfinite(t.coef))
                out.push_back("non-finite coefficient on " + t.var + " in " + where);
        }
        if (!std::isfinite(e.constant)) out.push_back("non-finite constant in " + where);
    };

    for (std::size_t i = 0; i < model.objectives.size(); ++i) {
        const auto& o = model.objectives[i];
        std::string where = "objective " + std::to_string(i + 1);
        check_expr(o.expr, where);
        if (!(o.weight > 0.0) || !std::isfinite(o.weight))
            out.push_back(where + " weight must be positive");
    }

    std::set<std::string> constraint_names;
    for (const auto& c : model.constraints) {
        if (!valid_identifier(c.name)) out.push_back("invalid identifier '" + c.name + "'");
        if (!constraint_names.insert(c.name).second)
            out.push_back("duplicate constraint name " + c.name);
        check_expr(c.expr, "constraint " + c.name);
        if (!std::isfinite(c.rhs))
            out.push_back("non-finite right-hand side in constraint " + c.name);
    }

    for (const auto& r : model.requirements) {
        if (const auto* abs = std::get_if<AbsGe>(&r)) {
            check_ref(abs->xi);
            check_ref(abs->xj);
            if (abs->xi == abs->xj) out.push_back("abs_ge requires distinct variables");
            if (!(abs->a >= 0.0) || !std::isfinite(abs->a))
                out.push_back("abs_ge threshold must be non-negative and finite");
        } else {
            const auto& kw = std::get<KWay>(r);
            if (kw.k < 0) out.push_back("kway k must be non-negative");
            if (kw.selectors.size() != kw.linked.size())
                out.push_back("kway selector and linked lists differ in length");
            for (const auto& s : kw.selectors) {
                check_ref(s);
                const auto* decl = model.find(s);
                if (decl && decl->kind != VarKind::Binary)
                    out.push_back("kway selector " + s + " is not binary");
            }
            for (const auto& l : kw.linked) check_ref(l);
        }
    }
    return out;
}

CheckReport validate_structure(const OptModel& model) {
    return CheckReport::from_violations(Stage::Variables, structural_violations(model));
}

}  // namespace orsynth
