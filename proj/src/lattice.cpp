#include "wg/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "wg/error.hpp"
#include "wg/union_find.hpp"

namespace wg {

Site::Site(std::initializer_list<int> coords) : Site(std::vector<int>(coords)) {}

Site::Site(const std::vector<int>& coords) {
    if (coords.empty() || coords.size() > static_cast<std::size_t>(kMaxDim))
        throw DomainError("site dimension must be in 1.." + std::to_string(kMaxDim));
    dim_ = static_cast<int>(coords.size());
    std::copy(coords.begin(), coords.end(), c_.begin());
}

Site Site::origin(int dim) {
    if (dim < 1 || dim > kMaxDim) throw DomainError("bad dimension " + std::to_string(dim));
    Site s;
    s.dim_ = dim;
    return s;
}

Site Site::unit(int dim, int axis) {
    Site s = origin(dim);
    s.c_[axis] = 1;
    return s;
}

Site Site::operator+(const Site& o) const {
    Site s = *this;
    for (int i = 0; i < dim_; ++i) s.c_[i] += o.c_[i];
    return s;
}

Site Site::operator-(const Site& o) const {
    Site s = *this;
    for (int i = 0; i < dim_; ++i) s.c_[i] -= o.c_[i];
    return s;
}

int Site::linf_norm() const {
    int m = 0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
}

int Site::l1_norm() const {
    int m = 0;
    for (int i = 0; i < dim_; ++i) m += std::abs(c_[i]);
    return m;
}

std::vector<int> Site::coords() const { return {c_.begin(), c_.begin() + dim_}; }

std::string Site::str() const {
    std::string s = "(";
    for (int i = 0; i < dim_; ++i) {
        if (i) s += ",";
        s += std::to_string(c_[i]);
    }
    return s + ")";
}

std::strong_ordering operator<=>(const Site& a, const Site& b) {
    if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
    for (int i = 0; i < a.dim_; ++i)
        if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
    return std::strong_ordering::equal;
}

bool operator==(const Site& a, const Site& b) { return (a <=> b) == 0; }

int linf_distance(const Site& a, const Site& b) { return (a - b).linf_norm(); }
int l1_distance(const Site& a, const Site& b) { return (a - b).l1_norm(); }

std::size_t SiteHash::operator()(const Site& s) const noexcept {
    std::size_t h = static_cast<std::size_t>(s.dim());
    for (int i = 0; i < s.dim(); ++i)
        h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::size_t>(static_cast<unsigned>(s[i]));
    return h;
}

// ---- SiteSet ----

SiteSet::SiteSet(std::initializer_list<Site> sites) : SiteSet(std::vector<Site>(sites)) {}

SiteSet::SiteSet(std::vector<Site> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    for (std::size_t i = 1; i < sites_.size(); ++i)
        if (sites_[i].dim() != sites_[0].dim()) throw DomainError("mixed dimensions in SiteSet");
}

bool SiteSet::contains(const Site& s) const {
    return std::binary_search(sites_.begin(), sites_.end(), s);
}

bool SiteSet::is_subset_of(const SiteSet& o) const {
    return std::includes(o.sites_.begin(), o.sites_.end(), sites_.begin(), sites_.end());
}

bool SiteSet::intersects(const SiteSet& o) const {
    auto a = sites_.begin();
    auto b = o.sites_.begin();
    while (a != sites_.end() && b != o.sites_.end()) {
        if (*a < *b)
            ++a;
        else if (*b < *a)
            ++b;
        else
            return true;
    }
    return false;
}

std::optional<std::size_t> SiteSet::position(const Site& s) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it == sites_.end() || !(*it == s)) return std::nullopt;
    return static_cast<std::size_t>(it - sites_.begin());
}

SiteSet SiteSet::unite(const SiteSet& o) const {
    std::vector<Site> out;
    std::set_union(sites_.begin(), sites_.end(), o.sites_.begin(), o.sites_.end(),
                   std::back_inserter(out));
    SiteSet r;
    r.sites_ = std::move(out);
    return r;
}

SiteSet SiteSet::minus(const SiteSet& o) const {
    std::vector<Site> out;
    std::set_difference(sites_.begin(), sites_.end(), o.sites_.begin(), o.sites_.end(),
                        std::back_inserter(out));
    SiteSet r;
    r.sites_ = std::move(out);
    return r;
}

SiteSet SiteSet::intersect(const SiteSet& o) const {
    std::vector<Site> out;
    std::set_intersection(sites_.begin(), sites_.end(), o.sites_.begin(), o.sites_.end(),
                          std::back_inserter(out));
    SiteSet r;
    r.sites_ = std::move(out);
    return r;
}

SiteSet SiteSet::with(const Site& s) const { return unite(SiteSet{s}); }

int SiteSet::diameter() const {
    int d = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i)
        for (std::size_t j = i + 1; j < sites_.size(); ++j)
            d = std::max(d, linf_distance(sites_[i], sites_[j]));
    return d;
}

// ---- Box ----

Box::Box(Site lower, Site upper) : lower_(lower), upper_(upper) {
    if (lower.dim() < 1 || lower.dim() != upper.dim()) throw DomainError("box corners differ in dimension");
    for (int i = 0; i < lower.dim(); ++i)
        if (upper[i] < lower[i]) throw DomainError("empty box " + lower.str() + ".." + upper.str());
}

Box Box::from_extents(const std::vector<int>& extents) {
    std::vector<int> up;
    for (int e : extents) {
        if (e < 1) throw DomainError("box extents must be positive");
        up.push_back(e - 1);
    }
    return Box(Site::origin(static_cast<int>(extents.size())), Site(up));
}

Box Box::centered(const Site& c, int r) {
    Site lo = c, hi = c;
    for (int i = 0; i < c.dim(); ++i) {
        lo[i] -= r;
        hi[i] += r;
    }
    return Box(lo, hi);
}

std::size_t Box::size() const {
    std::size_t n = 1;
    for (int i = 0; i < dim(); ++i) n *= static_cast<std::size_t>(extent(i));
    return n;
}

bool Box::contains(const Site& s) const {
    if (s.dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (s[i] < lower_[i] || s[i] > upper_[i]) return false;
    return true;
}

std::size_t Box::index_of(const Site& s) const {
    if (!contains(s)) throw DomainError("site " + s.str() + " outside box " + str());
    std::size_t idx = 0;
    for (int i = 0; i < dim(); ++i)
        idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(s[i] - lower_[i]);
    return idx;
}

Site Box::site_at(std::size_t index) const {
    Site s = lower_;
    for (int i = dim() - 1; i >= 0; --i) {
        const auto e = static_cast<std::size_t>(extent(i));
        s[i] = lower_[i] + static_cast<int>(index % e);
        index /= e;
    }
    return s;
}

SiteSet Box::sites() const {
    std::vector<Site> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(site_at(i));
    return SiteSet(std::move(out));
}

std::string Box::str() const { return "[" + lower_.str() + ".." + upper_.str() + "]"; }

// ---- Window ----

Window::Window(SiteSet sites) : sites_(std::move(sites)) {
    if (sites_.size() > 64) throw CapExceeded("window bitmask", sites_.size(), 64);
}

std::uint64_t Window::mask_of(const SiteSet& a) const {
    std::uint64_t m = 0;
    for (const Site& s : a) {
        auto i = sites_.position(s);
        if (!i) throw DomainError("site " + s.str() + " not in window");
        m |= std::uint64_t{1} << *i;
    }
    return m;
}

SiteSet Window::set_of(std::uint64_t mask) const {
    std::vector<Site> out;
    for (std::size_t i = 0; i < sites_.size(); ++i)
        if (mask >> i & 1U) out.push_back(sites_[i]);
    return SiteSet(std::move(out));
}

std::uint64_t Window::full_mask() const {
    return sites_.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << sites_.size()) - 1;
}

SubsetRange::SubsetRange(Window w, std::size_t cap) : window_(std::move(w)) {
    if (window_.size() > cap || window_.size() > 62)
        throw CapExceeded("subset enumeration", window_.size(), std::min<std::size_t>(cap, 62));
}

SubsetRange enumerate_subsets(const SiteSet& window, std::size_t cap) {
    return SubsetRange(Window(window), cap);
}

// ---- neighborhoods ----

SiteSet r_neighborhood(const SiteSet& a, int r) {
    if (r < 0) throw DomainError("negative radius");
    if (a.empty() || r == 0) return a;
    std::vector<Site> out;
    for (const Site& s : a) {
        Box ball = Box::centered(s, r);
        for (std::size_t i = 0; i < ball.size(); ++i) out.push_back(ball.site_at(i));
    }
    return SiteSet(std::move(out));
}

SiteSet boundary(const SiteSet& a, int r) { return r_neighborhood(a, r).minus(a); }

std::vector<SiteSet> connected_components(const SiteSet& a) {
    const std::size_t n = a.size();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Site& s = a[i];
        for (int ax = 0; ax < s.dim(); ++ax) {
            auto j = a.position(s + Site::unit(s.dim(), ax));
            if (j) uf.unite(i, *j);
        }
    }
    std::map<std::size_t, std::vector<Site>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(a[i]);
    std::vector<SiteSet> out;
    for (auto& [root, sites] : groups) out.emplace_back(std::move(sites));
    std::sort(out.begin(), out.end(),
              [](const SiteSet& x, const SiteSet& y) { return x[0] < y[0]; });
    return out;
}

bool is_connected(const SiteSet& a) { return connected_components(a).size() <= 1; }

// ---- SiteOrder ----

SiteOrder SiteOrder::lexicographic() { return {}; }

SiteOrder SiteOrder::spiral(const Site& center) {
    SiteOrder o;
    o.kind_ = Kind::spiral;
    o.center_ = center;
    return o;
}

bool SiteOrder::less(const Site& a, const Site& b) const {
    if (kind_ == Kind::spiral) {
        int na = linf_distance(a, center_), nb = linf_distance(b, center_);
        if (na != nb) return na < nb;
    }
    return a < b;
}

std::vector<Site> SiteOrder::sorted(const SiteSet& s) const {
    std::vector<Site> v = s.sites();
    std::sort(v.begin(), v.end(), [this](const Site& a, const Site& b) { return less(a, b); });
    return v;
}

std::vector<std::size_t> SiteOrder::ranks(const SiteSet& s) const {
    std::vector<Site> ord = sorted(s);
    std::vector<std::size_t> r(s.size());
    for (std::size_t k = 0; k < ord.size(); ++k) r[*s.position(ord[k])] = k + 1;
    return r;
}

}  // namespace wg
