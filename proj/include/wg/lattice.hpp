#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace wg {

inline constexpr int kMaxDim = 4;

class Site {
public:
    Site() = default;
    Site(std::initializer_list<int> coords);
    explicit Site(const std::vector<int>& coords);

    static Site origin(int dim);
    static Site unit(int dim, int axis);

    int dim() const { return dim_; }
    int operator[](int i) const { return c_[i]; }
    int& operator[](int i) { return c_[i]; }

    Site operator+(const Site& o) const;
    Site operator-(const Site& o) const;

    int linf_norm() const;
    int l1_norm() const;
    std::vector<int> coords() const;
    std::string str() const;

    // lexicographic, first coordinate most significant
    friend std::strong_ordering operator<=>(const Site& a, const Site& b);
    friend bool operator==(const Site& a, const Site& b);

private:
    std::array<int, kMaxDim> c_{};
    int dim_ = 0;
};

int linf_distance(const Site& a, const Site& b);
int l1_distance(const Site& a, const Site& b);

struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept;
};

// Sorted, duplicate-free set of sites (lexicographic order).
class SiteSet {
public:
    using const_iterator = std::vector<Site>::const_iterator;

    SiteSet() = default;
    SiteSet(std::initializer_list<Site> sites);
    explicit SiteSet(std::vector<Site> sites);

    std::size_t size() const { return sites_.size(); }
    bool empty() const { return sites_.empty(); }
    const Site& operator[](std::size_t i) const { return sites_[i]; }
    const_iterator begin() const { return sites_.begin(); }
    const_iterator end() const { return sites_.end(); }
    const std::vector<Site>& sites() const { return sites_; }

    bool contains(const Site& s) const;
    bool is_subset_of(const SiteSet& o) const;
    bool intersects(const SiteSet& o) const;
    std::optional<std::size_t> position(const Site& s) const;

    SiteSet unite(const SiteSet& o) const;
    SiteSet minus(const SiteSet& o) const;
    SiteSet intersect(const SiteSet& o) const;
    SiteSet with(const Site& s) const;

    int diameter() const;  // l-infinity; 0 for |A| <= 1

    friend bool operator==(const SiteSet& a, const SiteSet& b) { return a.sites_ == b.sites_; }
    friend auto operator<=>(const SiteSet& a, const SiteSet& b) { return a.sites_ <=> b.sites_; }

private:
    std::vector<Site> sites_;
};

class Box {
public:
    Box() = default;
    Box(Site lower, Site upper);
    // Box [0, e_0-1] x ... x [0, e_{d-1}-1].
    static Box from_extents(const std::vector<int>& extents);
    // Box of side 2r+1 centred at c.
    static Box centered(const Site& c, int r);

    int dim() const { return lower_.dim(); }
    const Site& lower() const { return lower_; }
    const Site& upper() const { return upper_; }
    int extent(int axis) const { return upper_[axis] - lower_[axis] + 1; }
    std::size_t size() const;
    bool contains(const Site& s) const;
    // row-major rank, first coordinate most significant (matches SiteSet order)
    std::size_t index_of(const Site& s) const;
    Site site_at(std::size_t index) const;
    SiteSet sites() const;
    std::string str() const;

    friend bool operator==(const Box& a, const Box& b) {
        return a.lower_ == b.lower_ && a.upper_ == b.upper_;
    }

private:
    Site lower_;
    Site upper_;
};

// Indexed view of a finite site set; subsets encode as bitmasks (bit i = site i).
class Window {
public:
    Window() = default;
    explicit Window(SiteSet sites);
    explicit Window(const Box& box) : Window(box.sites()) {}

    std::size_t size() const { return sites_.size(); }
    const Site& site(std::size_t i) const { return sites_[i]; }
    const SiteSet& sites() const { return sites_; }
    std::optional<std::size_t> index(const Site& s) const { return sites_.position(s); }

    std::uint64_t mask_of(const SiteSet& a) const;  // DomainError if a is not inside
    SiteSet set_of(std::uint64_t mask) const;
    std::uint64_t full_mask() const;

private:
    SiteSet sites_;
};

inline constexpr std::size_t kDefaultSubsetCap = 24;

// All subsets of a window in increasing bitmask order.
class SubsetRange {
public:
    class iterator {
    public:
        using value_type = SiteSet;
        using difference_type = std::ptrdiff_t;
        iterator(const Window* w, std::uint64_t m) : w_(w), mask_(m) {}
        SiteSet operator*() const { return w_->set_of(mask_); }
        std::uint64_t mask() const { return mask_; }
        iterator& operator++() {
            ++mask_;
            return *this;
        }
        iterator operator++(int) {
            iterator t = *this;
            ++mask_;
            return t;
        }
        bool operator==(const iterator& o) const { return mask_ == o.mask_; }

    private:
        const Window* w_;
        std::uint64_t mask_;
    };

    SubsetRange(Window w, std::size_t cap);
    iterator begin() const { return {&window_, 0}; }
    iterator end() const { return {&window_, std::uint64_t{1} << window_.size()}; }
    std::uint64_t count() const { return std::uint64_t{1} << window_.size(); }
    const Window& window() const { return window_; }

private:
    Window window_;
};

SubsetRange enumerate_subsets(const SiteSet& window, std::size_t cap = kDefaultSubsetCap);

SiteSet r_neighborhood(const SiteSet& a, int r);
SiteSet boundary(const SiteSet& a, int r);
std::vector<SiteSet> connected_components(const SiteSet& a);
bool is_connected(const SiteSet& a);

// Total order on sites with an explicit rank map #.
class SiteOrder {
public:
    enum class Kind { lexicographic, spiral };

    static SiteOrder lexicographic();
    // sort by (l-infinity distance to center, lexicographic)
    static SiteOrder spiral(const Site& center);

    Kind kind() const { return kind_; }
    const Site& center() const { return center_; }
    bool less(const Site& a, const Site& b) const;
    std::vector<Site> sorted(const SiteSet& s) const;
    // 1-based rank of each site within s, in s's canonical order
    std::vector<std::size_t> ranks(const SiteSet& s) const;

private:
    Kind kind_ = Kind::lexicographic;
    Site center_;
};

}  // namespace wg
