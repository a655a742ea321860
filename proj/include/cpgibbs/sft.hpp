#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpgibbs/error.hpp"

namespace cpgibbs::sft {

using Symbol = int;
using Word = std::vector<Symbol>;

/// Subshift of finite type given by an order-1 transition matrix.
///
/// allowed(u, v) is true iff symbol v may follow symbol u. Construction only
/// checks the shape; call validate() to reject dead symbols.
class Sft {
public:
    Sft() = default;
    Sft(int symbol_count, std::vector<std::uint8_t> allowed_row_major);
    Sft(const std::vector<std::vector<int>>& matrix);

    int symbol_count() const noexcept { return k_; }
    bool allowed(Symbol u, Symbol v) const noexcept {
        return allowed_[static_cast<std::size_t>(u) * k_ + v] != 0;
    }
    std::span<const std::uint8_t> matrix() const noexcept { return allowed_; }

    /// True iff every adjacent pair of `w` is allowed and every symbol is in range.
    bool admits(std::span<const Symbol> w) const noexcept;

    std::vector<Symbol> successors(Symbol u) const;

    friend bool operator==(const Sft&, const Sft&) = default;

private:
    int k_ = 0;
    std::vector<std::uint8_t> allowed_;
};

/// Throws DeadSymbolError naming the first symbol with an empty row or column.
void validate(const Sft& sft);

/// Strong connectivity of the transition graph.
bool is_transitive(const Sft& sft);

inline constexpr std::size_t kDefaultWordCap = 10'000'000;

/// All allowed words of length `length`, lexicographic order.
/// Throws ResourceLimitError when the count would exceed `cap`.
std::vector<Word> enumerate_words(const Sft& sft, int length,
                                  std::size_t cap = kDefaultWordCap);

/// Number of allowed words of the given length (sum of entries of A^(L-1)).
std::uint64_t count_words(const Sft& sft, int length);

Sft full_shift(int symbol_count);
Sft golden_mean();

/// Pair alphabet Lambda x Lambda' with the canonical index i*n + j.
struct ProductAlphabet {
    int m = 2;
    int n = 3;

    int size() const noexcept { return m * n; }
    int encode(int i, int j) const noexcept { return i * n + j; }
    std::pair<int, int> decode(int pair) const noexcept { return {pair / n, pair % n}; }
    int first(int pair) const noexcept { return pair / n; }
    int second(int pair) const noexcept { return pair % n; }
};

std::string to_digit_string(std::span<const Symbol> w);
Word from_digit_string(const std::string& s);

}  // namespace cpgibbs::sft
