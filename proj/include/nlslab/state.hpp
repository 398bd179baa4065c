// Complex fields and field pairs sampled on a RadialGrid.
#pragma once

#include "nlslab/grid.hpp"

namespace nlslab {

struct ComplexField {
    GridPtr grid;
    CVec values;

    ComplexField() = default;
    ComplexField(GridPtr g, CVec v);

    static ComplexField zero(const GridPtr& g);
    static ComplexField from_real(const GridPtr& g, const RVec& v);
};

// The system state (u, v); also used for perturbations (h, k) and
// eigenfunctions. Both components live on the same grid.
struct StatePair {
    GridPtr grid;
    CVec u;
    CVec v;

    StatePair() = default;
    StatePair(GridPtr g, CVec first, CVec second);

    static StatePair zero(const GridPtr& g);
    static StatePair from_real(const GridPtr& g, const RVec& first, const RVec& second);

    int size() const { return static_cast<int>(u.size()); }
    ComplexField first() const { return {grid, u}; }
    ComplexField second() const { return {grid, v}; }

    bool all_finite() const;
    StatePair conj() const;
    StatePair real_part() const;
    StatePair imag_part() const;  // returned as real-valued pair

    StatePair& operator+=(const StatePair& o);
    StatePair& operator-=(const StatePair& o);
    StatePair& operator*=(cplx c);
};

StatePair operator+(StatePair a, const StatePair& b);
StatePair operator-(StatePair a, const StatePair& b);
StatePair operator*(cplx c, StatePair a);
StatePair operator*(double c, StatePair a);

// Throws NumericError when a component is non-finite or grids differ.
void check_state(const StatePair& s, const char* where);
void check_same_grid(const StatePair& a, const StatePair& b, const char* where);

}  // namespace nlslab
