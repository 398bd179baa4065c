#include "nlslab/state.hpp"

#include "nlslab/errors.hpp"

#include <string>

namespace nlslab {

ComplexField::ComplexField(GridPtr g, CVec v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) {
        throw NumericError("ComplexField: sample count does not match grid");
    }
}

ComplexField ComplexField::zero(const GridPtr& g) { return {g, CVec::Zero(g->size())}; }

ComplexField ComplexField::from_real(const GridPtr& g, const RVec& v) {
    return {g, v.cast<cplx>()};
}

StatePair::StatePair(GridPtr g, CVec first, CVec second)
    : grid(std::move(g)), u(std::move(first)), v(std::move(second)) {
    if (u.size() != grid->size() || v.size() != grid->size()) {
        throw NumericError("StatePair: sample count does not match grid");
    }
}

StatePair StatePair::zero(const GridPtr& g) {
    return {g, CVec::Zero(g->size()), CVec::Zero(g->size())};
}

StatePair StatePair::from_real(const GridPtr& g, const RVec& first, const RVec& second) {
    return {g, first.cast<cplx>(), second.cast<cplx>()};
}

bool StatePair::all_finite() const { return u.allFinite() && v.allFinite(); }

StatePair StatePair::conj() const { return {grid, u.conjugate(), v.conjugate()}; }

StatePair StatePair::real_part() const {
    return {grid, u.real().cast<cplx>(), v.real().cast<cplx>()};
}

StatePair StatePair::imag_part() const {
    return {grid, u.imag().cast<cplx>(), v.imag().cast<cplx>()};
}

StatePair& StatePair::operator+=(const StatePair& o) {
    u += o.u;
    v += o.v;
    return *this;
}

StatePair& StatePair::operator-=(const StatePair& o) {
    u -= o.u;
    v -= o.v;
    return *this;
}

StatePair& StatePair::operator*=(cplx c) {
    u *= c;
    v *= c;
    return *this;
}

StatePair operator+(StatePair a, const StatePair& b) { return a += b; }
StatePair operator-(StatePair a, const StatePair& b) { return a -= b; }
StatePair operator*(cplx c, StatePair a) { return a *= c; }
StatePair operator*(double c, StatePair a) { return a *= cplx(c, 0.0); }

void check_state(const StatePair& s, const char* where) {
    if (!s.grid) throw NumericError(std::string(where) + ": state has no grid");
    if (s.u.size() != s.grid->size() || s.v.size() != s.grid->size()) {
        throw NumericError(std::string(where) + ": state size does not match grid");
    }
    if (!s.all_finite()) throw NumericError(std::string(where) + ": non-finite state values");
}

void check_same_grid(const StatePair& a, const StatePair& b, const char* where) {
    if (a.grid.get() != b.grid.get() &&
        (a.grid->size() != b.grid->size() || a.grid->r_max() != b.grid->r_max())) {
        throw NumericError(std::string(where) + ": states live on different grids");
    }
}

}  // namespace nlslab
