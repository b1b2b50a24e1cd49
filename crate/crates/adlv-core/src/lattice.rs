//! Finite-precision `O_L`-lattices in `N = L^h` over `F_{q^n}`, realizing the
//! strata parametrization explicitly.
//!
//! Vectors are written in the basis `e_i`, `i ∈ ℤ`, with `e_{i+h} = t e_i`;
//! the superbasic twist `bσ` maps `Σ α_i e_i` to `Σ σ(α_i) e_{i+m}`. A
//! lattice is kept as `h` echelonized generators whose leading indices `I(v)`
//! are pairwise incongruent modulo `h` (they form `B(M)`), have leading
//! coefficient 1, and vanish at every other index of `A(M)`; membership is
//! then back-substitution.
//!
//! `build_lattice` realizes the stratum parametrization: from an extended
//! semi-module and a point `x` on its pair set it solves the defining
//! relations layer by layer, the inner induction running over the residue
//! classes `y + i·m mod h`. `recover_point` inverts it on a lattice of the
//! stratum.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::extended::ExtendedSemiModule;
use crate::field::{FiniteField, Fq};
use crate::semimodule::{SemiModule, Slope};

/// Coordinates of a point of `𝔸^{𝒱(A,φ)}`: one field element per pair.
pub type Point = BTreeMap<(i64, i64), Fq>;

/// A truncated vector of `N`: coefficients are exact on `[lo, hi)` and
/// unknown beyond `hi`. Reading at or past `hi` raises a precision error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncVector {
    lo: i64,
    hi: i64,
    coeffs: Vec<Fq>,
}

impl TruncVector {
    pub fn zero(lo: i64, hi: i64) -> Self {
        TruncVector {
            lo,
            hi,
            coeffs: alloc::vec![Fq(0); (hi - lo).max(0) as usize],
        }
    }

    /// The basis vector `e_i`, known up to `hi`.
    pub fn basis(i: i64, hi: i64) -> Self {
        let mut v = TruncVector::zero(i, hi);
        v.coeffs[0] = Fq(1);
        v
    }

    pub fn from_coeffs(lo: i64, coeffs: Vec<Fq>) -> Self {
        let hi = lo + coeffs.len() as i64;
        TruncVector { lo, hi, coeffs }
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    /// Coefficient of `e_idx`; zero below the support, an error at or past
    /// the horizon.
    pub fn coeff(&self, idx: i64) -> Result<Fq, Error> {
        if idx >= self.hi {
            return Err(Error::InsufficientPrecision(format!(
                "coefficient at {idx} is beyond the window end {}",
                self.hi
            )));
        }
        if idx < self.lo {
            Ok(Fq(0))
        } else {
            Ok(self.coeffs[(idx - self.lo) as usize])
        }
    }

    /// Least index with a nonzero coefficient. A vector vanishing on its
    /// whole window signals insufficient precision.
    pub fn iv(&self) -> Result<i64, Error> {
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.0 != 0 {
                return Ok(self.lo + k as i64);
            }
        }
        Err(Error::InsufficientPrecision(String::from(
            "vector vanishes within its window",
        )))
    }

    /// `Σ α_i e_i ↦ Σ σ(α_i) e_{i+m}`.
    pub fn apply_bsigma(&self, field: &FiniteField, slope: Slope) -> TruncVector {
        TruncVector {
            lo: self.lo + slope.m(),
            hi: self.hi + slope.m(),
            coeffs: self.coeffs.iter().map(|&c| field.frobenius(c)).collect(),
        }
    }

    /// Multiplication by `t^k`, i.e. an index shift by `k·h`.
    pub fn mul_t_pow(&self, k: i64, slope: Slope) -> TruncVector {
        TruncVector {
            lo: self.lo + k * slope.h(),
            hi: self.hi + k * slope.h(),
            coeffs: self.coeffs.clone(),
        }
    }

    /// `self + s · (other shifted by `shift`)`, on the common window.
    fn add_scaled(&self, field: &FiniteField, other: &TruncVector, s: Fq, shift: i64) -> TruncVector {
        let lo = self.lo.min(other.lo + shift);
        let hi = self.hi.min(other.hi + shift);
        let mut coeffs = alloc::vec![Fq(0); (hi - lo).max(0) as usize];
        for (k, slot) in coeffs.iter_mut().enumerate() {
            let idx = lo + k as i64;
            let mut v = if idx >= self.lo && idx < self.hi {
                self.coeffs[(idx - self.lo) as usize]
            } else {
                Fq(0)
            };
            let j = idx - shift;
            if j >= other.lo && j < other.hi {
                v = field.add(v, field.mul(s, other.coeffs[(j - other.lo) as usize]));
            }
            *slot = v;
        }
        TruncVector { lo, hi, coeffs }
    }

    fn scale(&self, field: &FiniteField, s: Fq) -> TruncVector {
        TruncVector {
            lo: self.lo,
            hi: self.hi,
            coeffs: self.coeffs.iter().map(|&c| field.mul(s, c)).collect(),
        }
    }
}

/// An `O_L`-lattice at finite precision: echelonized generators indexed by
/// residue class of their leading index.
#[derive(Debug, Clone)]
pub struct Lattice {
    slope: Slope,
    precision: i64,
    /// sorted by leading index
    gens: Vec<TruncVector>,
    /// leading indices, sorted ascending (the set `B(M)`)
    ivs: Vec<i64>,
}

impl Lattice {
    /// Echelonizes `h` generators into the canonical reduced form. Fails
    /// when the leading indices cannot be separated modulo `h` within the
    /// window.
    pub fn from_generators(
        slope: Slope,
        field: &FiniteField,
        generators: Vec<TruncVector>,
        precision: i64,
    ) -> Result<Self, Error> {
        let h = slope.h();
        if generators.len() != h as usize {
            return Err(Error::LengthMismatch {
                expected: h as usize,
                got: generators.len(),
            });
        }
        let mut slots: BTreeMap<i64, TruncVector> = BTreeMap::new();
        for mut v in generators {
            loop {
                let iv = v.iv()?;
                let lead = v.coeff(iv)?;
                let r = iv.rem_euclid(h);
                match slots.get(&r) {
                    None => {
                        slots.insert(r, v.scale(field, field.inv(lead)));
                        break;
                    }
                    Some(g) => {
                        let giv = g.iv()?;
                        if giv <= iv {
                            // clear the leading term against the slot
                            let g = slots.get(&r).unwrap().clone();
                            v = v.add_scaled(field, &g, field.neg(lead), iv - giv);
                        } else {
                            let old = slots.insert(r, v.scale(field, field.inv(lead))).unwrap();
                            v = old;
                        }
                    }
                }
            }
        }
        let mut gens: Vec<TruncVector> = slots.into_values().collect();
        gens.sort_by_key(|g| g.iv().expect("slot vectors are nonzero"));
        let ivs: Vec<i64> = gens.iter().map(|g| g.iv().unwrap()).collect();
        // full reduction: zero out every coefficient sitting at an index of
        // A = union of the classes above their leading index
        let by_class: BTreeMap<i64, usize> = ivs
            .iter()
            .enumerate()
            .map(|(i, &b)| (b.rem_euclid(h), i))
            .collect();
        for i in 0..gens.len() {
            let mut p = ivs[i] + 1;
            while p < gens[i].window().1 {
                let c = gens[i].coeff(p)?;
                if c.0 != 0 {
                    let j = by_class[&p.rem_euclid(h)];
                    if p >= ivs[j] {
                        let g = gens[j].clone();
                        gens[i] = gens[i].add_scaled(field, &g, field.neg(c), p - ivs[j]);
                    }
                }
                p += 1;
            }
        }
        Ok(Lattice {
            slope,
            precision,
            gens,
            ivs,
        })
    }

    /// The standard lattice `M₀ = ⟨e_0, …, e_{h−1}⟩`.
    pub fn standard(slope: Slope, field: &FiniteField, precision: i64) -> Lattice {
        let gens = (0..slope.h())
            .map(|i| TruncVector::basis(i, i + precision))
            .collect();
        Lattice::from_generators(slope, field, gens, precision)
            .expect("standard basis echelonizes")
    }

    pub fn slope(&self) -> Slope {
        self.slope
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn generators(&self) -> &[TruncVector] {
        &self.gens
    }

    /// The echelon leading indices `B(M)`, sorted ascending.
    pub fn leading_indices(&self) -> &[i64] {
        &self.ivs
    }

    /// Reduces `v` against the generators; the residual is supported off the
    /// index set `A(M)` (within its window).
    pub fn reduce(&self, field: &FiniteField, v: &TruncVector) -> TruncVector {
        let h = self.slope.h();
        let by_class: BTreeMap<i64, usize> = self
            .ivs
            .iter()
            .enumerate()
            .map(|(i, &b)| (b.rem_euclid(h), i))
            .collect();
        let mut out = v.clone();
        let mut p = out.window().0;
        while p < out.window().1 {
            let c = out.coeff(p).expect("p below horizon");
            if c.0 != 0 {
                let i = by_class[&p.rem_euclid(h)];
                if p >= self.ivs[i] {
                    out = out.add_scaled(field, &self.gens[i], field.neg(c), p - self.ivs[i]);
                }
            }
            p += 1;
        }
        out
    }

    /// True when `v` reduces to zero within its window.
    pub fn contains_vector(&self, field: &FiniteField, v: &TruncVector) -> bool {
        let r = self.reduce(field, v);
        let (lo, hi) = r.window();
        (lo..hi).all(|p| r.coeff(p).map(|c| c.0 == 0).unwrap_or(false))
    }

    /// `A(M) = {I(v) | v ∈ M}` as a normalized semi-module. The leading
    /// indices must already be normalized (volume 0); translated lattices
    /// are rejected.
    pub fn a_of(&self) -> Result<SemiModule, Error> {
        let h = self.slope.h();
        let sum: i64 = self.ivs.iter().sum();
        let target = h * (h - 1) / 2;
        if sum != target {
            return Err(Error::SumMismatch {
                expected: target,
                got: sum,
            });
        }
        SemiModule::normalize(self.slope, &self.ivs)
    }

    /// `v_t(det)` relative to the standard lattice, computed from the
    /// leading indices: `Σ_r ⌊b_r / h⌋`.
    pub fn volume(&self) -> i64 {
        self.ivs.iter().map(|&b| b.div_euclid(self.slope.h())).sum()
    }

    /// `φ(M)(a) = max{n | ∃ v ∈ M, I(v) = a, t^{−n} bσ(v) ∈ M}` for every
    /// `a ∈ A(M) ∩ [lo, hi)`, by a descending search on `n`, each step one
    /// linear solvability question over the coefficient field.
    pub fn phi_of(&self, field: &FiniteField, lo: i64, hi: i64) -> Result<Vec<(i64, i64)>, Error> {
        let base = self.a_of()?;
        let mut out = Vec::new();
        for a in lo..hi {
            if let Some(nmax) = base.phi_max(a) {
                out.push((a, self.phi_of_at(field, &base, a, nmax)?));
            }
        }
        Ok(out)
    }

    fn phi_of_at(
        &self,
        field: &FiniteField,
        base: &SemiModule,
        a: i64,
        nmax: i64,
    ) -> Result<i64, Error> {
        let h = self.slope.h();
        let f = base.conductor();
        for n in (0..=nmax).rev() {
            // elements v with I(v) = a, leading coefficient 1:
            //   v = t^{k0} g_{r0} + sum c_{r,k} t^k g_r over iv > a.
            // atoms whose bsigma-image has I >= F reduce to zero and are
            // irrelevant either way.
            let atom_cap = f + n * h + h;
            let mut atoms: Vec<(usize, i64, i64)> = Vec::new(); // (gen, k, iv)
            for (gi, &b) in self.ivs.iter().enumerate() {
                let mut k = (a - b).div_euclid(h).max(0);
                while b + k * h < a {
                    k += 1;
                }
                while b + k * h < atom_cap {
                    atoms.push((gi, k, b + k * h));
                    k += 1;
                }
            }
            atoms.sort_by_key(|&(_, _, iv)| iv);
            if atoms.is_empty() || atoms[0].2 != a {
                return Err(Error::InsufficientPrecision(format!(
                    "no lattice element with leading index {a} in the window"
                )));
            }
            let residuals: Vec<TruncVector> = atoms
                .iter()
                .map(|&(gi, k, _)| {
                    let w = self.gens[gi]
                        .apply_bsigma(field, self.slope)
                        .mul_t_pow(k - n, self.slope);
                    self.reduce(field, &w)
                })
                .collect();
            let horizon = residuals
                .iter()
                .map(|r| r.window().1)
                .min()
                .unwrap_or(i64::MIN);
            if horizon < f {
                return Err(Error::InsufficientPrecision(format!(
                    "membership constraints for phi(M)({a}) are only visible up to {horizon}, below the conductor {f}"
                )));
            }
            let mut positions: Vec<i64> = Vec::new();
            for r in &residuals {
                let (rlo, _) = r.window();
                for p in rlo..horizon {
                    if r.coeff(p).map(|c| c.0 != 0).unwrap_or(false) && !positions.contains(&p) {
                        positions.push(p);
                    }
                }
            }
            positions.sort_unstable();
            // solve sum_{i>0} d_i res_i = -res_0 over the positions
            let ncols = residuals.len() - 1;
            let mut mat: Vec<Vec<Fq>> = positions
                .iter()
                .map(|&p| {
                    let mut row: Vec<Fq> = (1..residuals.len())
                        .map(|i| residuals[i].coeff(p).unwrap_or(Fq(0)))
                        .collect();
                    row.push(residuals[0].coeff(p).unwrap_or(Fq(0)));
                    row
                })
                .collect();
            if solvable(field, &mut mat, ncols) {
                return Ok(n);
            }
        }
        Err(Error::InsufficientPrecision(format!(
            "no admissible n found for phi(M)({a})"
        )))
    }

    /// Elementary divisor exponents of `bσ(M)` inside `M`: the coweight `μ`
    /// with `inv(M, bσ(M)) = t^μ`, sorted non-decreasing. Requires
    /// `bσ(M) ⊆ M`.
    pub fn relative_position(&self, field: &FiniteField) -> Result<crate::coweight::Coweight, Error> {
        let h = self.slope.h() as usize;
        // transition matrix: bsigma(g_r) = sum_s f[s][r](t) g_s
        let mut mat: Vec<Vec<BTreeMap<i64, Fq>>> =
            alloc::vec![alloc::vec![BTreeMap::new(); h]; h];
        let by_class: BTreeMap<i64, usize> = self
            .ivs
            .iter()
            .enumerate()
            .map(|(i, &b)| (b.rem_euclid(self.slope.h()), i))
            .collect();
        let mut trunc = i64::MAX;
        for (r, g) in self.gens.iter().enumerate() {
            let mut w = g.apply_bsigma(field, self.slope);
            let (_, whi) = w.window();
            for (s, &bs) in self.ivs.iter().enumerate() {
                trunc = trunc.min((whi - bs).div_euclid(self.slope.h()));
                let _ = s;
            }
            let mut p = w.window().0;
            while p < w.window().1 {
                let c = w.coeff(p).expect("below horizon");
                if c.0 != 0 {
                    let s = by_class[&p.rem_euclid(self.slope.h())];
                    if p < self.ivs[s] {
                        return Err(Error::BSigmaNotContained(p));
                    }
                    let k = (p - self.ivs[s]) / self.slope.h();
                    let cell = &mut mat[s][r];
                    let prev = cell.get(&k).copied().unwrap_or(Fq(0));
                    cell.insert(k, field.add(prev, c));
                    let gs = self.gens[s].clone();
                    w = w.add_scaled(field, &gs, field.neg(c), p - self.ivs[s]);
                }
                p += 1;
            }
        }
        let divisors = smith_divisors(field, mat, trunc)?;
        // guard: all divisors must sit safely inside the truncation
        if let Some(&max) = divisors.iter().max() {
            if max + 1 >= trunc {
                return Err(Error::InsufficientPrecision(format!(
                    "pivot valuation {max} within margin of the truncation {trunc}"
                )));
            }
        }
        let mut v = divisors;
        v.sort_unstable();
        Ok(crate::coweight::Coweight::new(v))
    }
}

/// Gaussian elimination over `F_q`; decides consistency of the augmented
/// system (`ncols` unknowns, last column the right-hand side).
fn solvable(field: &FiniteField, mat: &mut [Vec<Fq>], ncols: usize) -> bool {
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..mat.len()).find(|&r| mat[r][col].0 != 0);
        let Some(p) = pivot else { continue };
        mat.swap(rank, p);
        let inv = field.inv(mat[rank][col]);
        for v in mat[rank].iter_mut() {
            *v = field.mul(inv, *v);
        }
        for r in 0..mat.len() {
            if r != rank && mat[r][col].0 != 0 {
                let c = mat[r][col];
                let piv_row = mat[rank].clone();
                for (v, pv) in mat[r].iter_mut().zip(piv_row.iter()) {
                    *v = field.sub(*v, field.mul(c, *pv));
                }
            }
        }
        rank += 1;
    }
    mat.iter().all(|row| {
        row[..ncols].iter().any(|c| c.0 != 0) || row[ncols].0 == 0
    })
}

/// Smith-style reduction over the truncated power series ring: pivot on the
/// minimal `t`-valuation, normalize the pivot to `t^v`, clear its row and
/// column, recurse. Returns the valuations of the diagonal.
fn smith_divisors(
    field: &FiniteField,
    mut mat: Vec<Vec<BTreeMap<i64, Fq>>>,
    trunc: i64,
) -> Result<Vec<i64>, Error> {
    let val = |p: &BTreeMap<i64, Fq>| -> Option<i64> {
        p.iter().find(|(_, c)| c.0 != 0).map(|(&k, _)| k)
    };
    let mut divisors = Vec::new();
    let mut size = mat.len();
    while size > 0 {
        let mut best: Option<(usize, usize, i64)> = None;
        for i in 0..size {
            for j in 0..size {
                if let Some(v) = val(&mat[i][j]) {
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((i0, j0, v0)) = best else {
            return Err(Error::InsufficientPrecision(String::from(
                "zero block in the Smith reduction",
            )));
        };
        mat.swap(0, i0);
        for row in mat.iter_mut() {
            row.swap(0, j0);
        }
        // pivot = t^v0 * u with u a unit; multiply the pivot row by u^{-1}
        let pivot = mat[0][0].clone();
        let mut u = alloc::vec![Fq(0); trunc.max(1) as usize];
        for (k, slot) in u.iter_mut().enumerate() {
            *slot = pivot.get(&(v0 + k as i64)).copied().unwrap_or(Fq(0));
        }
        let mut uinv = alloc::vec![Fq(0); u.len()];
        uinv[0] = field.inv(u[0]);
        for k in 1..u.len() {
            let mut s = Fq(0);
            for i in 1..=k {
                s = field.add(s, field.mul(u[i], uinv[k - i]));
            }
            uinv[k] = field.mul(uinv[0], field.neg(s));
        }
        let unit_inv: BTreeMap<i64, Fq> = uinv
            .iter()
            .enumerate()
            .filter(|(_, c)| c.0 != 0)
            .map(|(k, &c)| (k as i64, c))
            .collect();
        for j in 0..size {
            mat[0][j] = poly_mul_trunc(field, &mat[0][j], &unit_inv, v0 + trunc);
        }
        // clear column 0 and row 0
        for i in 1..size {
            if val(&mat[i][0]).is_some() {
                let q: BTreeMap<i64, Fq> = mat[i][0]
                    .iter()
                    .filter(|(_, c)| c.0 != 0)
                    .map(|(&k, &c)| (k - v0, field.neg(c)))
                    .collect();
                for j in 0..size {
                    let add = poly_mul_trunc(field, &q, &mat[0][j], v0 + trunc);
                    mat[i][j] = poly_add(field, &mat[i][j], &add);
                }
            }
        }
        for j in 1..size {
            if val(&mat[0][j]).is_some() {
                let q: BTreeMap<i64, Fq> = mat[0][j]
                    .iter()
                    .filter(|(_, c)| c.0 != 0)
                    .map(|(&k, &c)| (k - v0, field.neg(c)))
                    .collect();
                for i in 0..size {
                    let add = poly_mul_trunc(field, &q, &mat[i][0], v0 + trunc);
                    mat[i][j] = poly_add(field, &mat[i][j], &add);
                }
            }
        }
        divisors.push(v0);
        mat = mat
            .into_iter()
            .skip(1)
            .map(|row| row.into_iter().skip(1).collect())
            .collect();
        size -= 1;
    }
    Ok(divisors)
}

fn poly_add(field: &FiniteField, a: &BTreeMap<i64, Fq>, b: &BTreeMap<i64, Fq>) -> BTreeMap<i64, Fq> {
    let mut out = a.clone();
    for (&k, &c) in b {
        let prev = out.get(&k).copied().unwrap_or(Fq(0));
        let v = field.add(prev, c);
        if v.0 == 0 {
            out.remove(&k);
        } else {
            out.insert(k, v);
        }
    }
    out
}

fn poly_mul_trunc(
    field: &FiniteField,
    a: &BTreeMap<i64, Fq>,
    b: &BTreeMap<i64, Fq>,
    trunc: i64,
) -> BTreeMap<i64, Fq> {
    let mut out: BTreeMap<i64, Fq> = BTreeMap::new();
    for (&ka, &ca) in a {
        if ca.0 == 0 {
            continue;
        }
        for (&kb, &cb) in b {
            if cb.0 == 0 || ka + kb >= trunc {
                continue;
            }
            let prev = out.get(&(ka + kb)).copied().unwrap_or(Fq(0));
            let v = field.add(prev, field.mul(ca, cb));
            if v.0 == 0 {
                out.remove(&(ka + kb));
            } else {
                out.insert(ka + kb, v);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// stratum parametrization

/// Processing order of the defining recursion: residue classes
/// `y, y+m, y+2m, … (mod h)`, ascending inside each class.
fn build_order(esm: &ExtendedSemiModule) -> Vec<i64> {
    let base = esm.base();
    let (m, h) = (base.slope().m(), base.slope().h());
    let y = base.max_gen();
    let (_, top) = esm.window();
    let mut order = Vec::new();
    for i in 0..h {
        let g = base.gen_for_class(y + i * m);
        let mut a = g;
        while a < top {
            order.push(a);
            a += h;
        }
    }
    order
}

/// For each `a ∈ B \ {y}`: the minimal `a' ∈ A` with `a' + m − φ(a')h = a`.
fn source_elements(esm: &ExtendedSemiModule) -> Result<BTreeMap<i64, i64>, Error> {
    let base = esm.base();
    let (m, h) = (base.slope().m(), base.slope().h());
    let y = base.max_gen();
    let (_, top) = esm.window();
    let mut out = BTreeMap::new();
    for &a in base.gens() {
        if a == y {
            continue;
        }
        let mut c = base.gen_for_class(a - m);
        let mut found = false;
        while c < top {
            if c + m - esm.phi(c).expect("c in A") * h == a {
                out.insert(a, c);
                found = true;
                break;
            }
            c += h;
        }
        if !found {
            return Err(Error::NoSourceElement(a));
        }
    }
    Ok(out)
}

/// Solves the defining relations of the stratum parametrization for the
/// point `x`, layer by layer, and returns the coefficient table
/// `a ↦ [α_{a,0}, …, α_{a,J−1}]` (coefficient of `e_{a+j}` in `v(a)`).
fn build_alpha(
    esm: &ExtendedSemiModule,
    x: &Point,
    field: &FiniteField,
    precision: i64,
) -> Result<BTreeMap<i64, Vec<Fq>>, Error> {
    for key in x.keys() {
        if !esm.v_set().contains(*key) {
            return Err(Error::PointDomainMismatch(*key));
        }
    }
    let base = esm.base();
    let h = base.slope().h();
    let y = base.max_gen();
    let order = build_order(esm);
    let sources = source_elements(esm)?;
    let j_max = precision as usize;
    let mut alpha: BTreeMap<i64, Vec<Fq>> = order
        .iter()
        .map(|&a| {
            let mut v = alloc::vec![Fq(0); j_max];
            v[0] = Fq(1);
            (a, v)
        })
        .collect();
    let mut pairs_by_a: BTreeMap<i64, Vec<(i64, Fq)>> = BTreeMap::new();
    for (&(a, b), &c) in x {
        pairs_by_a.entry(a).or_default().push((b, c));
    }
    for j in 1..j_max {
        for &a in &order {
            let mut acc = if alpha.contains_key(&(a - h)) && base.contains(a - h) {
                // v(a) = t v(a−h) + Σ x v(b)
                alpha[&(a - h)][j]
            } else if a == y {
                // v(y) = e_y + Σ x v(b)
                Fq(0)
            } else {
                // v(a) = t^{−φ(a')} bσ(v(a')) + Σ x v(b)
                field.frobenius(alpha[&sources[&a]][j])
            };
            if let Some(pairs) = pairs_by_a.get(&a) {
                for &(b, c) in pairs {
                    let jj = j as i64 - (b - a);
                    if jj >= 0 {
                        acc = field.add(acc, field.mul(c, alpha[&b][jj as usize]));
                    }
                }
            }
            alpha.get_mut(&a).unwrap()[j] = acc;
        }
    }
    Ok(alpha)
}

/// Constructs the lattice `M(x)` of the stratum parametrized by `esm` at the
/// point `x: 𝒱 → F_q`, at `precision` coefficient layers per generator.
pub fn build_lattice(
    esm: &ExtendedSemiModule,
    x: &Point,
    field: &FiniteField,
    precision: i64,
) -> Result<Lattice, Error> {
    let alpha = build_alpha(esm, x, field, precision)?;
    let gens = esm
        .base()
        .gens()
        .iter()
        .map(|&b| TruncVector::from_coeffs(b, alpha[&b].clone()))
        .collect();
    Lattice::from_generators(esm.slope(), field, gens, precision)
}

/// The 0/1 point of Theorem-style special position: `x_{a+h, succ(a)} = 1`
/// for every `a` with `φ(a+h) > φ(a)+1`, all other coordinates zero. It is
/// guaranteed to realize `φ(M) = φ`.
pub fn special_point(esm: &ExtendedSemiModule, field: &FiniteField) -> Point {
    let mut x: Point = esm.v_set().pairs().iter().map(|&p| (p, field.zero())).collect();
    let h = esm.slope().h();
    for (&a, &succ) in esm.decomposition().jumps() {
        let pair = (a + h, succ);
        debug_assert!(esm.v_set().contains(pair));
        x.insert(pair, field.one());
    }
    x
}

/// Inverts [`build_lattice`] on a lattice of the stratum: recovers the unique
/// point `x` whose build spans `lat`, pinning one coordinate per layer from
/// the membership conditions `t^{−φ(a)} bσ(v(a)) ∈ M`.
pub fn recover_point(
    lat: &Lattice,
    esm: &ExtendedSemiModule,
    field: &FiniteField,
) -> Result<Point, Error> {
    if lat.leading_indices() != esm.base().gens() {
        return Err(Error::NotInStratum(format!(
            "leading indices {:?} differ from the semi-module generators {:?}",
            lat.leading_indices(),
            esm.base().gens()
        )));
    }
    let slope = esm.slope();
    let order = build_order(esm);
    let pos_of: BTreeMap<i64, usize> = order.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut pairs: Vec<(i64, i64)> = esm.v_set().pairs().to_vec();
    pairs.sort_by_key(|&(a, b)| (b - a, pos_of[&a]));
    let mut x: Point = esm
        .v_set()
        .pairs()
        .iter()
        .map(|&p| (p, field.zero()))
        .collect();
    for &(a, b) in &pairs {
        let fa = esm.phi(a).expect("first coordinates lie in A");
        let pstar = b + slope.m() - fa * slope.h();
        let mut probes = [Fq(0), Fq(0)];
        for (trial, slot) in probes.iter_mut().enumerate() {
            x.insert((a, b), field.element(trial as u32));
            let alpha = build_alpha(esm, &x, field, lat.precision())?;
            let va = TruncVector::from_coeffs(a, alpha[&a].clone());
            let w = va.apply_bsigma(field, slope).mul_t_pow(-fa, slope);
            let res = lat.reduce(field, &w);
            *slot = res.coeff(pstar)?;
        }
        let diff = field.sub(probes[1], probes[0]);
        if diff.0 == 0 {
            return Err(Error::InsufficientPrecision(format!(
                "coordinate x[{a},{b}] cannot be isolated at index {pstar}"
            )));
        }
        // residual is affine in sigma(u): probes[0] + sigma(u) * diff = 0
        let su = field.div(field.neg(probes[0]), diff);
        x.insert((a, b), field.frobenius_inv(su));
    }
    // the recovered point must rebuild the lattice
    let rebuilt = build_lattice(esm, &x, field, lat.precision())?;
    if rebuilt.leading_indices() != lat.leading_indices() {
        return Err(Error::NotInStratum(String::from(
            "recovered point rebuilds a different index set",
        )));
    }
    for (g1, g2) in rebuilt.generators().iter().zip(lat.generators()) {
        let hi = g1.window().1.min(g2.window().1);
        let lo = g1.window().0;
        for p in lo..hi {
            if g1.coeff(p)? != g2.coeff(p)? {
                return Err(Error::NotInStratum(format!(
                    "recovered point rebuilds a different lattice (index {p})"
                )));
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coweight::Coweight;
    use crate::extended::{EsmCandidate, ExtendedSemiModule};

    fn sl(m: i64, h: i64) -> Slope {
        Slope::new(m, h).unwrap()
    }

    fn cw(v: &[i64]) -> Coweight {
        Coweight::new(v.to_vec())
    }

    fn f16() -> FiniteField {
        FiniteField::new(2, 4).unwrap()
    }

    fn paper_base() -> SemiModule {
        SemiModule::from_type(sl(4, 5), &cw(&[0, 0, 1, 2, 1])).unwrap()
    }

    fn example_3_4() -> ExtendedSemiModule {
        EsmCandidate {
            base: paper_base(),
            mu: cw(&[0, 0, 0, 2, 2]),
            phi_overrides: [(-1, 0)].into_iter().collect(),
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn iv_examples() {
        let f = f16();
        let e3 = TruncVector::basis(3, 33);
        assert_eq!(e3.iv().unwrap(), 3);
        let v = e3.add_scaled(&f, &TruncVector::basis(7, 37), f.element(5), 0);
        assert_eq!(v.iv().unwrap(), 3);
        let t_e2 = TruncVector::basis(2, 32).mul_t_pow(1, sl(4, 5));
        assert_eq!(t_e2.iv().unwrap(), 7);
        assert!(TruncVector::zero(0, 10).iv().is_err());
    }

    #[test]
    fn bsigma_examples() {
        let f = f16();
        let slope = sl(4, 5);
        let e0 = TruncVector::basis(0, 30);
        assert_eq!(e0.apply_bsigma(&f, slope).iv().unwrap(), 4);
        // coefficients in the prime field are fixed
        let v = e0.scale(&f, f.one());
        assert_eq!(v.apply_bsigma(&f, slope).coeff(4).unwrap(), f.one());
        // a proper extension element moves
        let f22 = FiniteField::new(2, 2).unwrap();
        let c = f22.element(2);
        assert_ne!(f22.frobenius(c), c);
        let w = TruncVector::basis(1, 31).scale(&f22, c);
        assert_eq!(
            w.apply_bsigma(&f22, slope).coeff(5).unwrap(),
            f22.frobenius(c)
        );
        // I(bsigma(v)) = I(v) + m
        for i in -3..4 {
            let v = TruncVector::basis(i, i + 30);
            assert_eq!(v.apply_bsigma(&f, slope).iv().unwrap(), i + 4);
        }
    }

    #[test]
    fn standard_lattice_fixtures() {
        let f = f16();
        let m0 = Lattice::standard(sl(4, 5), &f, 30);
        assert_eq!(m0.leading_indices(), &[0, 1, 2, 3, 4]);
        assert_eq!(m0.a_of().unwrap().gens(), &[0, 1, 2, 3, 4]);
        assert_eq!(m0.volume(), 0);
        // hand Smith reduction: e0 -> e4, e_i -> t e_{i-1}
        assert_eq!(
            m0.relative_position(&f).unwrap(),
            cw(&[0, 1, 1, 1, 1])
        );
        // t M0 has volume h
        let gens = (0..5)
            .map(|i| TruncVector::basis(i, i + 30).mul_t_pow(1, sl(4, 5)))
            .collect();
        let tm0 = Lattice::from_generators(sl(4, 5), &f, gens, 30).unwrap();
        assert_eq!(tm0.volume(), 5);
        assert!(tm0.a_of().is_err());
    }

    #[test]
    fn zero_point_build_on_cyclic() {
        let f = f16();
        let esm = ExtendedSemiModule::cyclic_of(paper_base());
        let x: Point = esm.v_set().pairs().iter().map(|&p| (p, f.zero())).collect();
        let lat = build_lattice(&esm, &x, &f, 30).unwrap();
        assert_eq!(lat.leading_indices(), esm.base().gens());
        assert_eq!(lat.a_of().unwrap(), *esm.base());
        assert_eq!(lat.volume(), 0);
    }

    #[test]
    fn special_point_fixture_example_3_4() {
        let f = f16();
        let esm = example_3_4();
        let x = special_point(&esm, &f);
        // the single jump -1 -> 6 gives x_{4,6} = 1, everything else 0
        assert_eq!(x[&(4, 6)], f.one());
        for (&pair, &v) in &x {
            if pair != (4, 6) {
                assert_eq!(v, f.zero(), "{pair:?}");
            }
        }
        let lat = build_lattice(&esm, &x, &f, 30).unwrap();
        assert_eq!(lat.a_of().unwrap().gens(), &[-2, -1, 2, 5, 6]);
        assert_eq!(lat.volume(), 0);
        // phi(M) = phi, including the non-forced phi(-1) = 0
        let (lo, _) = esm.window();
        let f_cond = esm.base().conductor();
        let phis = lat.phi_of(&f, lo, f_cond + 5).unwrap();
        for (a, v) in phis {
            assert_eq!(Some(v), esm.phi(a), "phi(M)({a})");
        }
        assert_eq!(lat.relative_position(&f).unwrap(), cw(&[0, 0, 0, 2, 2]));
    }

    #[test]
    fn cyclic_special_point_is_zero() {
        let f = f16();
        let esm = ExtendedSemiModule::cyclic_of(paper_base());
        let x = special_point(&esm, &f);
        assert!(x.values().all(|&v| v == f.zero()));
    }

    #[test]
    fn random_points_on_cyclic_stratum() {
        let f = f16();
        let esm = ExtendedSemiModule::cyclic_of(paper_base());
        let pairs = esm.v_set().pairs().to_vec();
        // a small deterministic sample of points
        let mut seed = 0x12345u32;
        for _ in 0..10 {
            let mut x: Point = Point::new();
            for &p in &pairs {
                seed = seed.wrapping_mul(1664525).wrapping_add(1013904223);
                x.insert(p, f.element(seed % 16));
            }
            let lat = build_lattice(&esm, &x, &f, 30).unwrap();
            assert_eq!(lat.a_of().unwrap(), *esm.base());
            assert_eq!(lat.volume(), 0);
            assert_eq!(lat.relative_position(&f).unwrap(), cw(&[0, 0, 1, 1, 2]));
            let (lo, _) = esm.window();
            let phis = lat.phi_of(&f, lo, esm.base().conductor() + 5).unwrap();
            for (a, v) in phis {
                assert_eq!(Some(v), esm.phi(a), "phi(M)({a})");
            }
            // Claim 4 round trip
            let rec = recover_point(&lat, &esm, &f).unwrap();
            assert_eq!(rec, x);
        }
    }

    #[test]
    fn recover_special_point_example_3_4() {
        let f = f16();
        let esm = example_3_4();
        let x = special_point(&esm, &f);
        let lat = build_lattice(&esm, &x, &f, 30).unwrap();
        let rec = recover_point(&lat, &esm, &f).unwrap();
        assert_eq!(rec, x);
    }

    #[test]
    fn phi_of_dominates_phi_on_nonspecial_points() {
        // Claim 2: phi(M) >= phi pointwise for every point of the chart
        let f = f16();
        let esm = example_3_4();
        let mut x = special_point(&esm, &f);
        x.insert((5, 7), f.element(3));
        let lat = build_lattice(&esm, &x, &f, 30).unwrap();
        assert_eq!(lat.a_of().unwrap(), *esm.base());
        let (lo, _) = esm.window();
        for (a, v) in lat.phi_of(&f, lo, esm.base().conductor() + 5).unwrap() {
            assert!(Some(v) >= esm.phi(a), "phi(M)({a}) = {v}");
        }
    }

    #[test]
    fn precision_stability_j_vs_2j() {
        let f = f16();
        for esm in [ExtendedSemiModule::cyclic_of(paper_base()), example_3_4()] {
            let x = special_point(&esm, &f);
            let lat30 = build_lattice(&esm, &x, &f, 30).unwrap();
            let lat60 = build_lattice(&esm, &x, &f, 60).unwrap();
            assert_eq!(lat30.leading_indices(), lat60.leading_indices());
            assert_eq!(
                lat30.relative_position(&f).unwrap(),
                lat60.relative_position(&f).unwrap()
            );
            let (lo, _) = esm.window();
            let hi = esm.base().conductor() + 5;
            assert_eq!(
                lat30.phi_of(&f, lo, hi).unwrap(),
                lat60.phi_of(&f, lo, hi).unwrap()
            );
        }
    }
}
