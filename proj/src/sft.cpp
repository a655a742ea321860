#include "cpgibbs/sft.hpp"

#include <algorithm>
#include <limits>

namespace cpgibbs::sft {

Sft::Sft(int symbol_count, std::vector<std::uint8_t> allowed_row_major)
    : k_(symbol_count), allowed_(std::move(allowed_row_major)) {
    if (k_ <= 0)
        throw InvalidArgument("sft: symbol count must be positive");
    if (allowed_.size() != static_cast<std::size_t>(k_) * k_)
        throw InvalidArgument("sft: transition matrix must be square with side = symbol count");
    for (auto& a : allowed_) a = a ? 1 : 0;
}

Sft::Sft(const std::vector<std::vector<int>>& matrix) {
    k_ = static_cast<int>(matrix.size());
    if (k_ == 0) throw InvalidArgument("sft: empty transition matrix");
    allowed_.reserve(static_cast<std::size_t>(k_) * k_);
    for (const auto& row : matrix) {
        if (static_cast<int>(row.size()) != k_)
            throw InvalidArgument("sft: transition matrix must be square");
        for (int v : row) allowed_.push_back(v != 0 ? 1 : 0);
    }
}

bool Sft::admits(std::span<const Symbol> w) const noexcept {
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < 0 || w[i] >= k_) return false;
        if (i > 0 && !allowed(w[i - 1], w[i])) return false;
    }
    return true;
}

std::vector<Symbol> Sft::successors(Symbol u) const {
    std::vector<Symbol> out;
    for (Symbol v = 0; v < k_; ++v)
        if (allowed(u, v)) out.push_back(v);
    return out;
}

void validate(const Sft& sft) {
    const int k = sft.symbol_count();
    for (int u = 0; u < k; ++u) {
        bool out = false, in = false;
        for (int v = 0; v < k; ++v) {
            out = out || sft.allowed(u, v);
            in = in || sft.allowed(v, u);
        }
        if (!out || !in) throw DeadSymbolError(u);
    }
}

namespace {

std::vector<char> reachable_from(const Sft& sft, int start, bool reverse) {
    const int k = sft.symbol_count();
    std::vector<char> seen(k, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < k; ++v) {
            bool edge = reverse ? sft.allowed(v, u) : sft.allowed(u, v);
            if (edge && !seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace

bool is_transitive(const Sft& sft) {
    if (sft.symbol_count() == 0) return false;
    auto fwd = reachable_from(sft, 0, false);
    auto bwd = reachable_from(sft, 0, true);
    return std::all_of(fwd.begin(), fwd.end(), [](char c) { return c != 0; }) &&
           std::all_of(bwd.begin(), bwd.end(), [](char c) { return c != 0; });
}

std::uint64_t count_words(const Sft& sft, int length) {
    if (length < 1) throw InvalidArgument("word length must be >= 1");
    const int k = sft.symbol_count();
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> ends(k, 1), next(k);
    for (int step = 1; step < length; ++step) {
        std::fill(next.begin(), next.end(), 0);
        for (int u = 0; u < k; ++u) {
            if (ends[u] == 0) continue;
            for (int v = 0; v < k; ++v) {
                if (!sft.allowed(u, v)) continue;
                next[v] = (next[v] > kMax - ends[u]) ? kMax : next[v] + ends[u];
            }
        }
        ends.swap(next);
    }
    std::uint64_t total = 0;
    for (auto c : ends) total = (total > kMax - c) ? kMax : total + c;
    return total;
}

std::vector<Word> enumerate_words(const Sft& sft, int length, std::size_t cap) {
    const std::uint64_t count = count_words(sft, length);
    if (count > cap)
        throw ResourceLimitError("enumerate_words: " + std::to_string(count) +
                                 " words exceeds cap " + std::to_string(cap));
    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(count));
    Word w(static_cast<std::size_t>(length), 0);
    // Depth-first in lexicographic order.
    auto rec = [&](auto&& self, int pos) -> void {
        if (pos == length) {
            out.push_back(w);
            return;
        }
        for (Symbol s = 0; s < sft.symbol_count(); ++s) {
            if (pos > 0 && !sft.allowed(w[pos - 1], s)) continue;
            w[pos] = s;
            self(self, pos + 1);
        }
    };
    rec(rec, 0);
    return out;
}

Sft full_shift(int symbol_count) {
    return Sft(symbol_count,
               std::vector<std::uint8_t>(static_cast<std::size_t>(symbol_count) * symbol_count, 1));
}

Sft golden_mean() { return Sft({{1, 1}, {1, 0}}); }

std::string to_digit_string(std::span<const Symbol> w) {
    static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    std::string s;
    s.reserve(w.size());
    for (Symbol x : w) {
        if (x < 0 || x >= 36) throw InvalidArgument("symbol out of digit-string range");
        s.push_back(kDigits[x]);
    }
    return s;
}

Word from_digit_string(const std::string& s) {
    Word w;
    w.reserve(s.size());
    for (char c : s) {
        if (c >= '0' && c <= '9')
            w.push_back(c - '0');
        else if (c >= 'a' && c <= 'z')
            w.push_back(10 + c - 'a');
        else
            throw InvalidArgument(std::string("invalid symbol digit '") + c + "'");
    }
    return w;
}

}  // namespace cpgibbs::sft
