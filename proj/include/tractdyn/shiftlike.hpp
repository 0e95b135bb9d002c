#ifndef TRACTDYN_SHIFTLIKE_HPP
#define TRACTDYN_SHIFTLIKE_HPP

#include "tractdyn/markov.hpp"
#include "tractdyn/rational.hpp"
#include "tractdyn/two_alphabet.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tractdyn::shiftlike {

using Symbol = std::uint32_t;

/**
 * Finite word over A = {0, ..., N-1}. Symbols are stored one per slot so
 * that long prefixes fit; index() packs them little-endian in base N
 * (symbol 0 is the least significant digit) for table lookup.
 */
class Word {
  public:
    Word() = default;
    /// Throws ValidationError if N < 2 or a symbol is out of range.
    Word(unsigned alphabet, std::vector<Symbol> symbols);

    static Word from_index(unsigned alphabet, std::size_t length, std::uint64_t index);

    unsigned alphabet() const { return alphabet_; }
    std::size_t size() const { return symbols_.size(); }
    bool empty() const { return symbols_.empty(); }
    Symbol operator[](std::size_t i) const { return symbols_[i]; }
    const std::vector<Symbol> &symbols() const { return symbols_; }

    /// Throws ValidationError when the packed value would not fit in 64 bits.
    std::uint64_t index() const;

    Word prefix(std::size_t length) const;
    Word drop(std::size_t count) const;
    Word substr(std::size_t start, std::size_t length) const;

    /// Digits run together for N ≤ 10, dot separated otherwise.
    std::string label() const;

    friend Word operator+(const Word &a, const Word &b);
    friend bool operator==(const Word &, const Word &) = default;

  private:
    unsigned alphabet_ = 2;
    std::vector<Symbol> symbols_;
};

/// Finite description of a continuous f : A^Z+ -> A^Z+ by
/// f(x)_i = φ(x_i … x_{i+m-1}).
struct SlidingBlockCode {
    unsigned N = 2;
    unsigned m = 1;
    std::vector<Symbol> phi;
};

/// Throws ValidationError unless |phi| = N^m and every entry is below N.
void validate_code(const SlidingBlockCode &code);

/// f on a prefix; the result is m-1 symbols shorter.
Word apply_f(const SlidingBlockCode &code, const Word &prefix);

/// g(s*x) = γ(s*)x with γ : A^{n+k} -> A^n stored by packed index.
class ShiftLikeSystem {
  public:
    /// Validates table size N^{n+k} (against the cell cap) and entries < N^n.
    ShiftLikeSystem(unsigned N, unsigned n, unsigned k, std::vector<std::uint64_t> gamma);

    unsigned N() const { return N_; }
    unsigned n() const { return n_; }
    unsigned k() const { return k_; }
    const std::vector<std::uint64_t> &gamma() const { return gamma_; }
    std::uint64_t gamma(std::uint64_t star_index) const { return gamma_[star_index]; }
    std::uint64_t base_count() const { return base_count_; }
    std::uint64_t star_count() const { return gamma_.size(); }

  private:
    unsigned N_, n_, k_;
    std::uint64_t base_count_;
    std::vector<std::uint64_t> gamma_;
};

/// k = max(m-1, 1) and γ(s*) = first n symbols of f(s*).
ShiftLikeSystem derive_gamma(const SlidingBlockCode &code, unsigned n);

/// Requires |prefix| ≥ n+k; the result has length |prefix| - k.
Word apply_g(const ShiftLikeSystem &system, const Word &prefix);

/// R^f(x)_j = J_{n+k}(f^j(x)) for j = 0..depth, with k = max(m-1, 1).
/// Needs a prefix of length n+k+depth·(m-1).
std::vector<Word> code_R(const SlidingBlockCode &code, unsigned n, const Word &prefix, std::size_t depth);

/// R^g(x)_j = J_{n+k}(g^j(x)) for j = 0..depth; needs n+k+depth·k symbols.
std::vector<Word> code_R(const ShiftLikeSystem &system, const Word &prefix, std::size_t depth);

/// True iff J_n(next) = γ(current), i.e. (current, next) ∈ G*.
bool star_edge(const ShiftLikeSystem &system, const Word &current, const Word &next);

/// H_γ(s*_0 s*_1 …) = s*_0 s̄_1 s̄_2 … where s̄_j is the last k symbols of s*_j.
/// Throws ValidationError when the sequence leaves G*.
Word decode_H(const ShiftLikeSystem &system, const std::vector<Word> &sequence);

/// Q^f = H_γ ∘ R^f; system must be the one derived from code.
Word shadow_Q(const SlidingBlockCode &code, const ShiftLikeSystem &system, const Word &prefix,
              std::size_t depth);

/// λ₀⟨w⟩ = 1/N^|w|.
Rational bernoulli_cylinder(unsigned N, const Word &word);

/// Special two-alphabet model: K = A^n, K* = A^{n+k}, J = prefix map,
/// ν ≡ 1/N^k. Labels are Word::label() of the packed indices.
TwoAlphabetModel shiftlike_model(const ShiftLikeSystem &system);

struct CylinderWeight {
    std::string word;
    Rational weight;
};

struct ShiftLikeTerminal {
    std::size_t base_class = 0;
    std::size_t star_class = 0;
    std::vector<Rational> stationary; ///< v_B over K
    bool stationary_identity = false;
    /// λ_B = Σ v_B(s) λ_s: positive weights on base cylinders ⟨s⟩.
    std::vector<CylinderWeight> measure;
    /// B*_g = H_γ(B*_{G*}) lies in the union of these K* cylinders.
    std::vector<std::string> support_cylinders;
};

struct ShiftLikeReport {
    unsigned N = 2, n = 1, k = 1;
    TwoAlphabetModel model;
    Correspondence correspondence;
    std::vector<ShiftLikeTerminal> terminals;
    TracStatus trac1, trac2, trac3, trac4;
};

ShiftLikeReport tractability_report_shiftlike(const ShiftLikeSystem &system);

} // namespace tractdyn::shiftlike

#endif
