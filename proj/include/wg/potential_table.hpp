#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "wg/lattice.hpp"
#include "wg/model.hpp"

namespace wg {

// alpha: product measure (per-site weights, nu by default) or a point mass on
// a vacuum configuration. Both are handled as per-site weight vectors; the
// point mass is the indicator of the vacuum value.
struct NormalizingMeasure {
    enum class Kind { product, point_mass };
    Kind kind = Kind::product;
    std::vector<std::vector<double>> weights;  // product: per box site (empty: nu everywhere)
    std::vector<int> vacuum;                   // point mass: box configuration

    static NormalizingMeasure product();
    static NormalizingMeasure product(std::vector<std::vector<double>> per_site);
    static NormalizingMeasure point_mass(std::vector<int> vacuum);

    std::string tag() const { return kind == Kind::product ? "IP" : "vacuum"; }
    // weights over H0 at box index i
    std::vector<double> site_weights(std::size_t i, const ModelSpec& spec) const;
    void validate(std::size_t box_size, const ModelSpec& spec) const;
};

// Closed forms recognised for built-in models (s = scalar disorder value,
// p = its nu-mean): c*prod s, c*prod (s - p), c*(prod s - p^|A|).
enum class CoeffForm { tabulated, vacuum_product, centered_product, shifted_product };

std::string to_string(CoeffForm f);

struct PotentialEntry {
    // Local tables: indexed by the code of eta_A (first site of A least
    // significant, radix |H0|). Fixed tables: a single value.
    std::vector<double> values;
    std::vector<double> stderrs;  // empty unless Monte Carlo
    CoeffForm form = CoeffForm::tabulated;
    double coeff = 0.0;
};

// Sparse map from subsets A of a window (bitmask) to U_A.
class PotentialTable {
public:
    enum class Kind { local, fixed };

    PotentialTable() = default;
    PotentialTable(Window window, int radix, std::string alpha, Kind kind = Kind::local);

    const Window& window() const { return window_; }
    int radix() const { return radix_; }
    const std::string& alpha() const { return alpha_; }
    Kind kind() const { return kind_; }
    bool local() const { return kind_ == Kind::local; }

    // scalar disorder values and nu (for closed forms and centring)
    std::vector<double> scalar_values;
    std::vector<double> nu;

    void set(std::uint64_t mask, PotentialEntry e);
    void add(std::uint64_t mask, std::span<const double> values);
    const PotentialEntry* find(std::uint64_t mask) const;
    PotentialEntry* find(std::uint64_t mask);
    const std::map<std::uint64_t, PotentialEntry>& entries() const { return entries_; }
    void erase(std::uint64_t mask) { entries_.erase(mask); }

    // local code of eta_A from a window configuration
    std::size_t local_code(std::uint64_t mask, std::span<const int> eta_window) const;
    double value(std::uint64_t mask, std::span<const int> eta_window) const;

    // number of entries with some |value| > tol
    std::size_t support_size(double tol = 0.0) const;
    // drop entries whose values are all within tol of zero
    void prune(double tol);

private:
    Window window_;
    int radix_ = 1;
    std::string alpha_;
    Kind kind_ = Kind::local;
    std::map<std::uint64_t, PotentialEntry> entries_;
};

// U_A = sum_{L subset A} (-1)^{|A\L|} E(L) over all subsets of the window, for
// one fixed disorder configuration (fixed table).
PotentialTable mobius_potential(const Window& window, const std::function<double(std::uint64_t)>& energy,
                                std::size_t cap = 20);
// E(L) = sum_{A subset L} U_A for every L (inverse transform), indexed by mask.
std::vector<double> subset_sums(const PotentialTable& fixed_table);

// U_A - int IP(d eta~) U_A(eta~), exact over H0^|A| with the table's nu.
PotentialTable center_potential(const PotentialTable& table);

// Tries the closed forms entry by entry; tabulated entries stay as they are.
void annotate_forms(PotentialTable& table, double tol = 1e-10);

nlohmann::json to_json(const PotentialTable& table);

}  // namespace wg
