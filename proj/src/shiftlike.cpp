#include "tractdyn/shiftlike.hpp"

#include "tractdyn/caps.hpp"
#include "tractdyn/error.hpp"

#include <algorithm>
#include <limits>

namespace tractdyn::shiftlike {

namespace {

void check_alphabet(unsigned alphabet) {
    if (alphabet < 2) {
        throw ValidationError("alphabet size must be at least 2");
    }
}

std::string length_error(const char *what, std::size_t required, std::size_t given) {
    return std::string(what) + ": prefix of length " + std::to_string(given) + " is too short, need " +
           std::to_string(required);
}

} // namespace

Word::Word(unsigned alphabet, std::vector<Symbol> symbols) : alphabet_(alphabet), symbols_(std::move(symbols)) {
    check_alphabet(alphabet_);
    for (Symbol s : symbols_) {
        if (s >= alphabet_) {
            throw ValidationError("symbol " + std::to_string(s) + " outside alphabet of size " +
                                  std::to_string(alphabet_));
        }
    }
}

Word Word::from_index(unsigned alphabet, std::size_t length, std::uint64_t index) {
    check_alphabet(alphabet);
    std::vector<Symbol> symbols(length);
    for (std::size_t i = 0; i < length; ++i) {
        symbols[i] = static_cast<Symbol>(index % alphabet);
        index /= alphabet;
    }
    if (index != 0) {
        throw ValidationError("index does not fit in a word of length " + std::to_string(length));
    }
    Word w;
    w.alphabet_ = alphabet;
    w.symbols_ = std::move(symbols);
    return w;
}

std::uint64_t Word::index() const {
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t value = 0;
    for (std::size_t i = symbols_.size(); i-- > 0;) {
        if (value > (max - symbols_[i]) / alphabet_) {
            throw ValidationError("word of length " + std::to_string(symbols_.size()) +
                                  " does not fit a 64-bit index");
        }
        value = value * alphabet_ + symbols_[i];
    }
    return value;
}

Word Word::prefix(std::size_t length) const { return substr(0, length); }

Word Word::drop(std::size_t count) const {
    return substr(std::min(count, symbols_.size()), symbols_.size() - std::min(count, symbols_.size()));
}

Word Word::substr(std::size_t start, std::size_t length) const {
    if (start + length > symbols_.size()) {
        throw ValidationError("substring past the end of a word of length " + std::to_string(symbols_.size()));
    }
    Word w;
    w.alphabet_ = alphabet_;
    w.symbols_.assign(symbols_.begin() + static_cast<std::ptrdiff_t>(start),
                      symbols_.begin() + static_cast<std::ptrdiff_t>(start + length));
    return w;
}

std::string Word::label() const {
    std::string out;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (alphabet_ > 10 && i > 0) {
            out += '.';
        }
        out += std::to_string(symbols_[i]);
    }
    return out;
}

Word operator+(const Word &a, const Word &b) {
    if (a.alphabet_ != b.alphabet_) {
        throw ValidationError("cannot concatenate words over different alphabets");
    }
    Word w = a;
    w.symbols_.insert(w.symbols_.end(), b.symbols_.begin(), b.symbols_.end());
    return w;
}

void validate_code(const SlidingBlockCode &code) {
    check_alphabet(code.N);
    if (code.m < 1) {
        throw ValidationError("window m must be at least 1");
    }
    const std::uint64_t size = saturating_pow(code.N, code.m);
    require_within_cap("sliding block code table", size);
    if (code.phi.size() != size) {
        throw ValidationError("code table has " + std::to_string(code.phi.size()) + " entries, expected " +
                              std::to_string(size));
    }
    for (Symbol s : code.phi) {
        if (s >= code.N) {
            throw ValidationError("code table entry " + std::to_string(s) + " outside alphabet");
        }
    }
}

Word apply_f(const SlidingBlockCode &code, const Word &prefix) {
    if (prefix.alphabet() != code.N) {
        throw ValidationError("prefix alphabet does not match the code");
    }
    if (prefix.size() < code.m) {
        throw ValidationError(length_error("apply_f", code.m, prefix.size()));
    }
    const std::size_t out_len = prefix.size() - code.m + 1;
    std::vector<Symbol> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        std::uint64_t window = 0;
        for (std::size_t t = code.m; t-- > 0;) {
            window = window * code.N + prefix[i + t];
        }
        out[i] = code.phi[window];
    }
    return Word(code.N, std::move(out));
}

ShiftLikeSystem::ShiftLikeSystem(unsigned N, unsigned n, unsigned k, std::vector<std::uint64_t> gamma)
    : N_(N), n_(n), k_(k), base_count_(0), gamma_(std::move(gamma)) {
    check_alphabet(N_);
    if (n_ < 1 || k_ < 1) {
        throw ValidationError("shift-like systems need n ≥ 1 and k ≥ 1");
    }
    const std::uint64_t size = saturating_pow(N_, std::uint64_t{n_} + k_);
    require_within_cap("gamma table N^(n+k)", size);
    base_count_ = saturating_pow(N_, n_);
    if (gamma_.size() != size) {
        throw ValidationError("gamma table has " + std::to_string(gamma_.size()) + " entries, expected " +
                              std::to_string(size));
    }
    for (std::uint64_t v : gamma_) {
        if (v >= base_count_) {
            throw ValidationError("gamma table entry " + std::to_string(v) + " is not an n-word index");
        }
    }
}

ShiftLikeSystem derive_gamma(const SlidingBlockCode &code, unsigned n) {
    validate_code(code);
    if (n < 1) {
        throw ValidationError("n must be at least 1");
    }
    const unsigned k = std::max(code.m - 1, 1u);
    const std::uint64_t size = saturating_pow(code.N, std::uint64_t{n} + k);
    require_within_cap("gamma table N^(n+k)", size);
    std::vector<std::uint64_t> gamma(size);
    for (std::uint64_t s = 0; s < size; ++s) {
        gamma[s] = apply_f(code, Word::from_index(code.N, n + k, s)).prefix(n).index();
    }
    return ShiftLikeSystem(code.N, n, k, std::move(gamma));
}

Word apply_g(const ShiftLikeSystem &system, const Word &prefix) {
    const std::size_t head = system.n() + system.k();
    if (prefix.alphabet() != system.N()) {
        throw ValidationError("prefix alphabet does not match the system");
    }
    if (prefix.size() < head) {
        throw ValidationError(length_error("apply_g", head, prefix.size()));
    }
    const Word image = Word::from_index(system.N(), system.n(), system.gamma(prefix.prefix(head).index()));
    return image + prefix.drop(head);
}

std::vector<Word> code_R(const SlidingBlockCode &code, unsigned n, const Word &prefix, std::size_t depth) {
    validate_code(code);
    const std::size_t head = n + std::max(code.m - 1, 1u);
    const std::size_t required = head + depth * (code.m - 1);
    if (prefix.size() < required) {
        throw ValidationError(length_error("code_R", required, prefix.size()));
    }
    std::vector<Word> out;
    out.reserve(depth + 1);
    Word x = prefix;
    for (std::size_t j = 0; j <= depth; ++j) {
        out.push_back(x.prefix(head));
        if (j < depth) {
            x = apply_f(code, x);
        }
    }
    return out;
}

std::vector<Word> code_R(const ShiftLikeSystem &system, const Word &prefix, std::size_t depth) {
    const std::size_t head = system.n() + system.k();
    const std::size_t required = head + depth * system.k();
    if (prefix.size() < required) {
        throw ValidationError(length_error("code_R", required, prefix.size()));
    }
    std::vector<Word> out;
    out.reserve(depth + 1);
    Word x = prefix;
    for (std::size_t j = 0; j <= depth; ++j) {
        out.push_back(x.prefix(head));
        if (j < depth) {
            x = apply_g(system, x);
        }
    }
    return out;
}

bool star_edge(const ShiftLikeSystem &system, const Word &current, const Word &next) {
    return next.prefix(system.n()).index() == system.gamma(current.index());
}

Word decode_H(const ShiftLikeSystem &system, const std::vector<Word> &sequence) {
    const std::size_t head = system.n() + system.k();
    if (sequence.empty()) {
        throw ValidationError("decode_H needs at least one K* word");
    }
    for (const auto &w : sequence) {
        if (w.size() != head || w.alphabet() != system.N()) {
            throw ValidationError("decode_H: every entry must be a word of length n+k");
        }
    }
    std::vector<Symbol> out = sequence.front().symbols();
    out.reserve(head + (sequence.size() - 1) * system.k());
    for (std::size_t j = 1; j < sequence.size(); ++j) {
        if (!star_edge(system, sequence[j - 1], sequence[j])) {
            throw ValidationError("decode_H: step " + std::to_string(j) + " leaves G*");
        }
        const auto &s = sequence[j].symbols();
        out.insert(out.end(), s.end() - system.k(), s.end());
    }
    return Word(system.N(), std::move(out));
}

Word shadow_Q(const SlidingBlockCode &code, const ShiftLikeSystem &system, const Word &prefix,
              std::size_t depth) {
    if (code.N != system.N() || std::max(code.m - 1, 1u) != system.k()) {
        throw ValidationError("shadow_Q: system was not derived from this code");
    }
    return decode_H(system, code_R(code, system.n(), prefix, depth));
}

Rational bernoulli_cylinder(unsigned N, const Word &word) {
    check_alphabet(N);
    mpz_class denominator;
    mpz_ui_pow_ui(denominator.get_mpz_t(), N, word.size());
    return Rational(mpz_class(1), denominator);
}

TwoAlphabetModel shiftlike_model(const ShiftLikeSystem &system) {
    const std::uint64_t base = system.base_count();
    const std::uint64_t star = system.star_count();
    std::vector<std::string> base_labels, star_labels;
    base_labels.reserve(base);
    star_labels.reserve(star);
    for (std::uint64_t s = 0; s < base; ++s) {
        base_labels.push_back(Word::from_index(system.N(), system.n(), s).label());
    }
    std::vector<std::size_t> J(star), gamma(star);
    for (std::uint64_t s = 0; s < star; ++s) {
        star_labels.push_back(Word::from_index(system.N(), system.n() + system.k(), s).label());
        J[s] = static_cast<std::size_t>(s % base);
        gamma[s] = static_cast<std::size_t>(system.gamma(s));
    }
    mpz_class fiber;
    mpz_ui_pow_ui(fiber.get_mpz_t(), system.N(), system.k());
    std::vector<Rational> nu(star, Rational(mpz_class(1), fiber));
    return build_model(std::move(star_labels), std::move(base_labels), std::move(J), std::move(gamma),
                       std::move(nu));
}

ShiftLikeReport tractability_report_shiftlike(const ShiftLikeSystem &system) {
    TwoAlphabetModel model = shiftlike_model(system);
    Correspondence correspondence = basic_set_correspondence(model);
    const ExactMatrix cover = induced_base_cover_exact(model);

    std::vector<ShiftLikeTerminal> terminals;
    bool identities = true;
    for (std::size_t p = 0; p < correspondence.pairs.size(); ++p) {
        const auto &pair = correspondence.pairs[p];
        if (!pair.terminal) {
            continue;
        }
        ShiftLikeTerminal t;
        t.base_class = pair.base_class;
        t.star_class = pair.star_class;
        t.stationary = exact_stationary_distribution(cover, correspondence.base.classes[pair.base_class]);
        t.stationary_identity = stationary_identity_holds(model, correspondence, p, t.stationary);
        identities = identities && t.stationary_identity;
        for (std::size_t s : correspondence.base.classes[pair.base_class]) {
            t.measure.push_back({model.base_labels()[s], t.stationary[s]});
        }
        for (std::size_t s : correspondence.star.classes[pair.star_class]) {
            t.support_cylinders.push_back(model.star_labels()[s]);
        }
        terminals.push_back(std::move(t));
    }
    if (!identities) {
        throw InvariantViolation("stationary identity failed for a terminal class");
    }

    const std::size_t count = correspondence.pairs.size();
    ShiftLikeReport report{system.N(), system.n(), system.k(), std::move(model), std::move(correspondence),
                           std::move(terminals), {}, {}, {}, {}};
    report.trac1 = {true, std::to_string(count) + " basic sets, carried over from G* by the conjugacy H_gamma"};
    report.trac2 = {true, std::to_string(report.terminals.size()) +
                              " ergodic measures lambda_B; Bernoulli background measure is full"};
    report.trac3 = {true, "each lambda_B is supported on the terminal basic set H_gamma(B*)"};
    report.trac4 = {true, "distinct basic sets are disjoint, so supports meet in a null set"};
    return report;
}

} // namespace tractdyn::shiftlike
