#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wg/potentials.hpp"

namespace wg {

// Nested cells A_{x,1} subset A_{x,2} subset ... per window site x, each inside
// {y : y >= x} (in the scheme's order) and ending at all of it. A set A with
// order-minimal site x belongs to the class P_{x,m} of the first cell
// containing it.
class RegroupingScheme {
public:
    enum class Kind { kozlov, shell, custom };

    // A_{x,m} = {z : #x <= #z <= r(#x + m)}, # the 1-based rank of the order
    // restricted to the window; r(n) = radii[n-1] (clamped to |window|),
    // identity when radii is empty.
    static RegroupingScheme kozlov(Window window, SiteOrder order, std::vector<std::size_t> radii = {});
    // A_{x,m} = {z >= x lexicographically, |z - x|_inf <= m}, m = 1, 2, ...
    static RegroupingScheme shell(Window window);
    // cells[x] lists A_{x,1}, A_{x,2}, ... as window masks (x = window index)
    static RegroupingScheme custom(Window window, SiteOrder order,
                                   std::vector<std::vector<std::uint64_t>> cells);

    Kind kind() const { return kind_; }
    const Window& window() const { return window_; }
    const SiteOrder& order() const { return order_; }
    std::size_t rank(std::size_t x) const { return rank_[x]; }
    const std::vector<std::uint64_t>& cells(std::size_t x) const { return cells_[x]; }
    // {y : #y >= #x} as a mask
    std::uint64_t upper_set(std::size_t x) const;

    // (x, m) with m 1-based; DomainError for the empty set
    std::pair<std::size_t, std::size_t> class_of(std::uint64_t a) const;
    std::uint64_t cell_of(std::uint64_t a) const;

    // DomainError unless the cells are nested, contain x, stay in {y >= x}
    // and exhaust it.
    void validate() const;

private:
    Kind kind_ = Kind::custom;
    Window window_;
    SiteOrder order_;
    std::vector<std::size_t> rank_;
    std::vector<std::vector<std::uint64_t>> cells_;
};

// U^gr_C = sum over the class of C of U_A; entries keyed by cell masks.
PotentialTable regroup(const PotentialTable& table, const RegroupingScheme& scheme);
PotentialTable kozlov_regroup(const PotentialTable& table, const RegroupingScheme& scheme);
PotentialTable shell_regroup(const PotentialTable& table);

// Every A subset Delta meeting Lambda has its cell inside Delta.
bool net_compatible(const RegroupingScheme& scheme, std::uint64_t lambda, std::uint64_t delta);

struct NetCheck {
    std::size_t deltas = 0;
    double max_abs_violation = 0.0;
};

// Differences eta1_Lambda vs eta2_Lambda (equal off Lambda) of the partial
// sums of both tables, over every scheme-compatible Delta containing Lambda.
NetCheck check_net_equality(const PotentialTable& original, const PotentialTable& regrouped,
                            const RegroupingScheme& scheme, std::uint64_t lambda,
                            std::span<const int> eta1_window, std::span<const int> eta2_window);

// Cell value from the relative energies directly:
// E_{A_m} - E_{A_{m-1}} - E_{A_m \ x} + E_{A_{m-1} \ x}.
double cell_value_from_energies(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                                const SiteSet& cell, const SiteSet& prev, const Site& x,
                                std::span<const int> eta_box);

// Same from single-site kernels: int alpha log Q_x(.. eta_{A_m\x} ..) minus the
// A_{m-1} term (m >= 2; the second term is absent for m = 1).
double cell_value_from_logq(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                            const SiteSet& cell, const SiteSet& prev, const Site& x,
                            std::span<const int> eta_box);

struct ShellBracket {
    Site y;
    double from_energies = 0.0;  // E(Q<=y) - E(Q<y) - E(Q<=y \ x) + E(Q<y \ x)
    double from_ratio = 0.0;     // int alpha log[mu(e^-dH_xy) / (mu(e^-dH_x) mu(e^-dH_y))]
    double bound = 0.0;          // e^{B_x + B_y} int alpha |c_xy|
};

// Telescoping decomposition of the shell cell L_{x,m} over the new sites y
// of L_{x,m} \ L_{x,m-1} (lexicographic), L_{x,0} = {x}. The brackets of
// shell m sum to the cell value for m >= 2; for m = 1 add E({x}).
std::vector<ShellBracket> shell_brackets(const QKernelContext& ctx, const NormalizingMeasure& alpha,
                                         const Window& window, const Site& x, int m,
                                         std::span<const int> eta_box);

}  // namespace wg
