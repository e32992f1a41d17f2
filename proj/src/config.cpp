#include "nots/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "nots/errors.hpp"

namespace nots {

double TomlValue::as_number() const {
    if (type == Type::Int) return static_cast<double>(i);
    if (type == Type::Float) return d;
    throw ValidationError("expected a number");
}

namespace {

class Parser {
public:
    Parser(const std::string& text, int line) : s_(text), line_(line) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("config line " + std::to_string(line_) + ": " + what);
    }

    void skip_ws() {
        while (p_ < s_.size() && (s_[p_] == ' ' || s_[p_] == '\t')) ++p_;
    }
    bool at_end_or_comment() {
        skip_ws();
        return p_ >= s_.size() || s_[p_] == '#';
    }
    char peek() const { return p_ < s_.size() ? s_[p_] : '\0'; }

    TomlValue value() {
        skip_ws();
        TomlValue v;
        const char c = peek();
        if (c == '"') {
            v.type = TomlValue::Type::String;
            v.s = string();
        } else if (c == '[') {
            v.type = TomlValue::Type::Array;
            ++p_;
            for (;;) {
                skip_ws();
                if (peek() == ']') {
                    ++p_;
                    break;
                }
                v.array.push_back(value());
                if (v.array.back().type == TomlValue::Type::Array) fail("nested arrays are not supported");
                skip_ws();
                if (peek() == ',') ++p_;
                else if (peek() != ']') fail("expected ',' or ']' in array");
            }
        } else if (s_.compare(p_, 4, "true") == 0) {
            v.type = TomlValue::Type::Bool;
            v.b = true;
            p_ += 4;
        } else if (s_.compare(p_, 5, "false") == 0) {
            v.type = TomlValue::Type::Bool;
            p_ += 5;
        } else {
            std::size_t e = p_;
            while (e < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[e])) || s_[e] == '+' || s_[e] == '-' ||
                                     s_[e] == '.' || s_[e] == '_'))
                ++e;
            std::string tok = s_.substr(p_, e - p_);
            std::erase(tok, '_');
            if (tok.empty()) fail("expected a value");
            p_ = e;
            const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "+inf" ||
                                  tok == "nan";
            if (is_float) {
                v.type = TomlValue::Type::Float;
                try {
                    std::size_t used = 0;
                    v.d = std::stod(tok, &used);
                    if (used != tok.size()) fail("bad float '" + tok + "'");
                } catch (const std::logic_error&) {
                    fail("bad float '" + tok + "'");
                }
            } else {
                v.type = TomlValue::Type::Int;
                const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
                auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v.i);
                if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("bad integer '" + tok + "'");
            }
        }
        return v;
    }

    std::string string() {
        ++p_;
        std::string out;
        while (p_ < s_.size() && s_[p_] != '"') {
            char c = s_[p_++];
            if (c == '\\') {
                if (p_ >= s_.size()) fail("unterminated escape");
                const char e = s_[p_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out.push_back(c);
        }
        if (p_ >= s_.size()) fail("unterminated string");
        ++p_;
        return out;
    }

    std::string key() {
        skip_ws();
        std::size_t e = p_;
        while (e < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[e])) || s_[e] == '_' || s_[e] == '-' || s_[e] == '.'))
            ++e;
        if (e == p_) fail("expected a key");
        std::string k = s_.substr(p_, e - p_);
        p_ = e;
        return k;
    }

    std::size_t pos() const { return p_; }
    void advance(std::size_t n) { p_ += n; }

private:
    const std::string& s_;
    int line_;
    std::size_t p_ = 0;
};

}  // namespace

TomlTable parse_toml(const std::string& text) {
    TomlTable table;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        Parser p(line, lineno);
        if (p.at_end_or_comment()) continue;
        if (p.peek() == '[') {
            p.advance(1);
            section = p.key();
            p.skip_ws();
            if (p.peek() != ']') p.fail("expected ']'");
            p.advance(1);
            if (!p.at_end_or_comment()) p.fail("trailing characters after section header");
            continue;
        }
        const std::string k = p.key();
        p.skip_ws();
        if (p.peek() != '=') p.fail("expected '='");
        p.advance(1);
        TomlValue v = p.value();
        if (!p.at_end_or_comment()) p.fail("trailing characters after value");
        const std::string full = section.empty() ? k : section + "." + k;
        if (table.count(full)) p.fail("duplicate key " + full);
        table.emplace(full, std::move(v));
    }
    return table;
}

TomlTable load_toml(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_toml(ss.str());
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ValidationError("trials must be at least 1");
    if (budget < 1) throw ValidationError("budget must be at least 1");
    if (algorithms.empty()) throw ValidationError("no algorithms selected");
    for (const auto& a : algorithms) algorithm_from_name(a);
    FunctionalSpec::from_name(functional);
    if (pool.path.empty() && pool.size < 1) throw ValidationError("pool size must be at least 1");
    settings.validate();
}

ExperimentConfig experiment_from_toml(const TomlTable& t) {
    ExperimentConfig c;
    std::set<std::string> used;
    auto get = [&](const std::string& k) -> const TomlValue* {
        auto it = t.find(k);
        if (it == t.end()) return nullptr;
        used.insert(k);
        return &it->second;
    };
    auto num = [&](const std::string& k, auto& dst) {
        if (const auto* v = get(k)) {
            try {
                dst = static_cast<std::remove_reference_t<decltype(dst)>>(v->as_number());
            } catch (const ValidationError&) {
                throw ValidationError("config key " + k + " must be a number");
            }
        }
    };
    auto str = [&](const std::string& k, std::string& dst) {
        if (const auto* v = get(k)) {
            if (v->type != TomlValue::Type::String) throw ValidationError("config key " + k + " must be a string");
            dst = v->s;
        }
    };
    auto flag = [&](const std::string& k, bool& dst) {
        if (const auto* v = get(k)) {
            if (v->type != TomlValue::Type::Bool) throw ValidationError("config key " + k + " must be a boolean");
            dst = v->b;
        }
    };

    str("pool.path", c.pool.path);
    num("pool.size", c.pool.size);
    num("pool.nx", c.pool.nx);
    num("pool.ny", c.pool.ny);
    num("pool.seed", c.pool.seed);
    num("pool.tau", c.pool.tau);
    num("pool.alpha", c.pool.alpha);
    num("pool.a_low", c.pool.a_low);
    num("pool.a_high", c.pool.a_high);
    num("pool.forcing", c.pool.forcing);

    str("experiment.functional", c.functional);
    num("experiment.k", c.high_gradient_k);
    num("experiment.target_index", c.target_index);
    if (const auto* v = get("experiment.algorithms")) {
        if (v->type != TomlValue::Type::Array) throw ValidationError("experiment.algorithms must be an array");
        c.algorithms.clear();
        for (const auto& e : v->array) {
            if (e.type != TomlValue::Type::String) throw ValidationError("algorithm names must be strings");
            c.algorithms.push_back(e.s);
        }
    }
    num("experiment.budget", c.budget);
    num("experiment.trials", c.trials);
    num("experiment.seed", c.seed);
    num("experiment.noise", c.noise);
    str("experiment.out", c.out);
    num("experiment.threads", c.threads);
    num("experiment.warm_start", c.settings.warm_start);

    auto& s = c.settings;
    num("snots.width", s.snots.width);
    num("snots.modes", s.snots.features.n_modes);
    std::string init = s.snots.init == Initializer::Kaiming ? "kaiming" : "lecun";
    str("snots.init", init);
    if (init == "kaiming") s.snots.init = Initializer::Kaiming;
    else if (init == "lecun") s.snots.init = Initializer::LeCun;
    else throw ValidationError("snots.init must be kaiming or lecun");
    flag("snots.quadrature_weighted", s.snots.quadrature_weighted);
    flag("snots.perturb_targets", s.snots.perturb_targets);
    num("snots.lambda_floor", s.lambda_floor);

    num("fno.layers", s.fno.model.layers);
    num("fno.channels", s.fno.model.channels);
    num("fno.modes", s.fno.model.modes);
    flag("fno.coordinates", s.fno.model.coordinates);
    num("fno.epochs", s.fno.epochs);
    num("fno.batch_size", s.fno.batch_size);
    num("fno.learning_rate", s.fno.learning_rate);
    std::string opt = s.fno.optimizer == Optimizer::Adam ? "adam" : "sgd";
    str("fno.optimizer", opt);
    if (opt == "adam") s.fno.optimizer = Optimizer::Adam;
    else if (opt == "sgd") s.fno.optimizer = Optimizer::Sgd;
    else throw ValidationError("fno.optimizer must be adam or sgd");
    std::string reg = s.fno.regularization == RegularizationTarget::Initialization ? "init" : "zero";
    str("fno.regularization", reg);
    if (reg == "init") s.fno.regularization = RegularizationTarget::Initialization;
    else if (reg == "zero") s.fno.regularization = RegularizationTarget::Zero;
    else throw ValidationError("fno.regularization must be init or zero");

    num("mlp.hidden", s.mlp.hidden);
    num("mlp.steps", s.mlp.steps);
    num("mlp.learning_rate", s.mlp.learning_rate);

    num("gp.depth", s.gp_depth);
    num("gp.c_w", s.gp_kernel.c_w);
    num("gp.c_b", s.gp_kernel.c_b);
    num("bfo.lengthscale", s.bfo_lengthscale);
    num("bfo.base_lengthscale", s.bfo_base_lengthscale);
    num("surrogate.lambda", s.lambda);

    for (const auto& [k, v] : t)
        if (!used.count(k)) throw ValidationError("unknown config key " + k);
    return c;
}

ExperimentConfig load_experiment(const std::string& path) { return experiment_from_toml(load_toml(path)); }

}  // namespace nots
