//! Extended semi-modules `(A, φ)` and their pair sets `𝒱(A, φ)`.
//!
//! An extended semi-module for a dominant `μ` is a normalized semi-module `A`
//! together with `φ: ℤ → ℕ ∪ {−∞}` such that
//!
//! 1. `φ(a) = −∞` exactly off `A`,
//! 2. `φ(a + h) ≥ φ(a) + 1`,
//! 3. `φ(a) ≤ max{n | a + m − nh ∈ A}`, with equality once `[a, ∞) ⊆ A`,
//! 4. `A` decomposes into `h` chains along which `φ` increases by exactly 1,
//!    a chain jumping past `a + h` whenever `φ(a + h) > φ(a) + 1`, and the
//!    chain start values form a permutation of `μ`.
//!
//! `φ` equals its pointwise maximum everywhere iff the extended semi-module
//! is *cyclic*; then the chains are simply the residue classes.
//!
//! The pair set `𝒱(A, φ) = {(a, b) | b > a, φ(a) > φ(b) > φ(a − h)}` is
//! finite and its cardinality is the dimension of the stratum attached to
//! `(A, φ)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::coweight::Coweight;
use crate::error::Error;
use crate::semimodule::{all_types, enumerate_types, SemiModule, Slope};

/// The finite pair set `𝒱(A, φ)`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VSet {
    pairs: Vec<(i64, i64)>,
}

impl VSet {
    pub fn pairs(&self) -> &[(i64, i64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: (i64, i64)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }
}

/// A decomposition witness for condition (4): the non-forced successor
/// assignments plus the chain starts `(a, φ(a))`.
///
/// The successor of every other `a ∈ A` is the forced `a + h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    matched: BTreeMap<i64, i64>,
    starts: Vec<(i64, i64)>,
    h_step: i64,
}

impl Decomposition {
    /// Successor of `a` in its chain.
    pub fn successor(&self, a: i64) -> i64 {
        self.matched.get(&a).copied().unwrap_or(a + self.h_step)
    }

    /// The non-forced successor edges `a ↦ succ(a)` with `succ(a) > a + h`.
    pub fn jumps(&self) -> &BTreeMap<i64, i64> {
        &self.matched
    }

    /// Chain starts as `(a, φ(a))` pairs, sorted by `a`.
    pub fn starts(&self) -> &[(i64, i64)] {
        &self.starts
    }

    /// The multiset of start values, sorted ascending; equals `μ` for a
    /// valid extended semi-module.
    pub fn start_values(&self) -> Coweight {
        let mut v: Vec<i64> = self.starts.iter().map(|&(_, f)| f).collect();
        v.sort_unstable();
        Coweight::new(v)
    }
}

/// An unvalidated candidate `(A, μ, φ)`.
///
/// `phi_overrides` gives `φ` at selected integers; everywhere else `φ`
/// defaults to the pointwise maximum on `A` and to `−∞` off `A`. A candidate
/// can therefore express any violation of conditions (1)–(4).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EsmCandidate {
    pub base: SemiModule,
    pub mu: Coweight,
    pub phi_overrides: BTreeMap<i64, i64>,
}

impl EsmCandidate {
    /// Effective `φ(a)`: override if present, else `phi_max` on `A`, else
    /// `None` (`−∞`).
    pub fn phi(&self, a: i64) -> Option<i64> {
        if let Some(&v) = self.phi_overrides.get(&a) {
            if self.base.contains(a) {
                return Some(v);
            }
            // an override off A is still reported by check_axioms; treat the
            // point as off-support for the other conditions
            return None;
        }
        self.base.phi_max(a)
    }

    /// Validates all four conditions; on success returns the assembled
    /// extended semi-module (with recomputed witness data).
    pub fn validate(&self) -> Result<ExtendedSemiModule, AxiomReport> {
        let report = check_axioms(self);
        if !report.is_valid() {
            return Err(report);
        }
        let scratch = Scratch::new(&self.base);
        let vals: Vec<i64> = scratch
            .free
            .iter()
            .map(|&a| self.phi(a).expect("free positions lie in A"))
            .collect();
        let target = self.mu.dominant();
        let (mu, dec) = scratch
            .finish(&vals, Some(&target))
            .expect("validated candidate must decompose");
        Ok(assemble(&self.base, &scratch, &vals, mu, dec))
    }
}

/// A violation of one of the four defining conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomViolation {
    /// override assigns a finite value off `A`
    ValueOffSupport { a: i64 },
    /// override assigns a negative value (not in `ℕ`)
    NegativeValue { a: i64, value: i64 },
    /// `φ(a + h) < φ(a) + 1`
    StepTooSmall { a: i64 },
    /// `φ(a) > max{n | a + m − nh ∈ A}`
    ExceedsMax { a: i64, max: i64 },
    /// `φ(a) < phi_max(a)` although `[a, ∞) ⊆ A`
    NotForcedBeyondConductor { a: i64 },
    /// no chain decomposition with start values `μ` exists
    NoDecomposition,
}

impl AxiomViolation {
    /// The number of the violated condition in the definition.
    pub fn condition(&self) -> u8 {
        match self {
            AxiomViolation::ValueOffSupport { .. } | AxiomViolation::NegativeValue { .. } => 1,
            AxiomViolation::StepTooSmall { .. } => 2,
            AxiomViolation::ExceedsMax { .. } | AxiomViolation::NotForcedBeyondConductor { .. } => {
                3
            }
            AxiomViolation::NoDecomposition => 4,
        }
    }
}

/// Result of [`check_axioms`]: empty iff the candidate is a valid extended
/// semi-module for its `μ`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated_conditions(&self) -> Vec<u8> {
        let mut v: Vec<u8> = self.violations.iter().map(|x| x.condition()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Checks conditions (1)–(4) for a candidate, reporting every violation.
/// Condition (4) is decided through [`find_decomposition`].
pub fn check_axioms(cand: &EsmCandidate) -> AxiomReport {
    let mut report = AxiomReport::default();
    let base = &cand.base;
    let f = base.conductor();
    for (&a, &v) in &cand.phi_overrides {
        if !base.contains(a) {
            report.violations.push(AxiomViolation::ValueOffSupport { a });
            continue;
        }
        if v < 0 {
            report.violations.push(AxiomViolation::NegativeValue { a, value: v });
            continue;
        }
        let max = base.phi_max(a).unwrap();
        if v > max {
            report.violations.push(AxiomViolation::ExceedsMax { a, max });
        } else if a >= f && v != max {
            report
                .violations
                .push(AxiomViolation::NotForcedBeyondConductor { a });
        }
    }
    // condition (2) can only fail at a or a+h touched by an override
    let mut step_sites: Vec<i64> = Vec::new();
    for &a in cand.phi_overrides.keys() {
        step_sites.push(a);
        step_sites.push(a - base.slope().h());
    }
    step_sites.sort_unstable();
    step_sites.dedup();
    for &a in &step_sites {
        if let (Some(fa), Some(fah)) = (cand.phi(a), cand.phi(a + base.slope().h())) {
            if fah < fa + 1 {
                report.violations.push(AxiomViolation::StepTooSmall { a });
            }
        }
    }
    if report.is_valid() && find_decomposition(cand).is_none() {
        report.violations.push(AxiomViolation::NoDecomposition);
    }
    report
}

/// Searches for a decomposition witness for condition (4) against the
/// candidate's `μ`, assuming conditions (1)–(3) hold.
///
/// Every `a` with `φ(a + h) = φ(a) + 1` is forced onto `a + h`, so freedom
/// exists only at the finite set `D = {a | φ(a+h) > φ(a)+1}`, whose members
/// need a successor among the slots `C = B ∪ (D + h)` of the next `φ`-level.
/// Because chain edges join consecutive levels, the matching splits into one
/// bipartite problem per level with the edge rule `slot > a + h`, and the
/// unmatched slots of level `n` (the chain starts) are forced to number
/// `#{a | φ(a) = n} − #{a | φ(a) = n−1}`; comparing that signed count with
/// the multiplicities of `μ` decides condition (4c) before any matching runs.
pub fn find_decomposition(cand: &EsmCandidate) -> Option<Decomposition> {
    let scratch = Scratch::new(&cand.base);
    let vals = scratch
        .free
        .iter()
        .map(|&a| cand.phi(a))
        .collect::<Option<Vec<i64>>>()?;
    let (mu, dec) = scratch.finish(&vals, None)?;
    if mu != cand.mu.dominant() {
        return None;
    }
    Some(dec)
}

/// A validated extended semi-module, carrying its pair set and a
/// decomposition witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedSemiModule {
    base: SemiModule,
    mu: Coweight,
    window_lo: i64,
    window_hi: i64,
    phi: Vec<Option<i64>>,
    vset: VSet,
    decomposition: Decomposition,
    cyclic: bool,
}

impl ExtendedSemiModule {
    /// The cyclic extended semi-module associated to `A`: `φ` equals its
    /// pointwise maximum, the chains are the residue classes, and
    /// `μ = dominant(type(A))`.
    pub fn cyclic_of(base: SemiModule) -> ExtendedSemiModule {
        let scratch = Scratch::new(&base);
        let vals = scratch.pmax.clone();
        let (mu, dec) = scratch
            .finish(&vals, None)
            .expect("cyclic phi always decomposes along residue classes");
        debug_assert_eq!(mu, base.type_of().dominant());
        assemble(&base, &scratch, &vals, mu, dec)
    }

    pub fn base(&self) -> &SemiModule {
        &self.base
    }

    pub fn slope(&self) -> Slope {
        self.base.slope()
    }

    /// The dominant coweight this extended semi-module certifies.
    pub fn mu(&self) -> &Coweight {
        &self.mu
    }

    /// `φ(a)`, with `None` standing for `−∞`. Valid for every integer: the
    /// stored window covers everything below the forced region.
    pub fn phi(&self, a: i64) -> Option<i64> {
        if a < self.window_lo {
            None
        } else if a < self.window_hi {
            self.phi[(a - self.window_lo) as usize]
        } else {
            self.base.phi_max(a)
        }
    }

    /// Window `[lo, hi)` on which `φ` is materialized; beyond `hi` the value
    /// is forced.
    pub fn window(&self) -> (i64, i64) {
        (self.window_lo, self.window_hi)
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn v_set(&self) -> &VSet {
        &self.vset
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    /// `φ` restricted to `A ∩ [window_lo, window_hi)` as sorted pairs; the
    /// canonical serialization of the function.
    pub fn phi_pairs(&self) -> Vec<(i64, i64)> {
        (self.window_lo..self.window_hi)
            .filter_map(|a| self.phi(a).map(|v| (a, v)))
            .collect()
    }

    /// Re-validates this extended semi-module through [`check_axioms`].
    pub fn check(&self) -> AxiomReport {
        let cand = self.to_candidate();
        check_axioms(&cand)
    }

    /// The candidate with the below-conductor values of `φ` as overrides.
    pub fn to_candidate(&self) -> EsmCandidate {
        let f = self.base.conductor();
        let mut overrides = BTreeMap::new();
        for a in self.window_lo..f {
            if let Some(v) = self.phi(a) {
                overrides.insert(a, v);
            }
        }
        EsmCandidate {
            base: self.base.clone(),
            mu: self.mu.clone(),
            phi_overrides: overrides,
        }
    }

    /// The reduction of a non-cyclic extended semi-module to the cyclic one,
    /// one step per element of `{a | φ(a+h) > φ(a)+1}` taken in descending
    /// order. Entry `i = n` is `self`, entry `i = 0` is cyclic.
    pub fn reduce_to_cyclic(&self) -> Result<ReductionChain, Error> {
        reduce_to_cyclic_impl(self)
    }
}

impl core::fmt::Display for ExtendedSemiModule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let free: Vec<(i64, i64)> = {
            let cutoff = self.base.conductor();
            self.phi_pairs()
                .into_iter()
                .filter(|&(a, _)| a < cutoff)
                .collect()
        };
        write!(
            f,
            "(m={}, h={}, mu={}, B={:?}, phi<F={:?}, |V|={})",
            self.slope().m(),
            self.slope().h(),
            self.mu,
            self.base.gens(),
            free,
            self.vset.len()
        )
    }
}

/// One step of the cyclic reduction: `φ_{i−1}` arises from `φ_i` by adding
/// `alpha` at `x, x−h, …, x−n·h`, and `μ^{i−1}` by the entry replacement rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMove {
    pub x: i64,
    pub alpha: i64,
    pub n: i64,
    /// `μ^{i−1}` as predicted by the entry replacement (dominant order);
    /// must agree with the decomposition-derived `mu()` of the next step.
    pub replaced_mu: Coweight,
}

/// The chain `(A, φ_n = φ), …, (A, φ_0 = cyclic)` with the moves between
/// consecutive entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionChain {
    pub steps: Vec<ExtendedSemiModule>,
    pub moves: Vec<ReductionMove>,
}

fn reduce_to_cyclic_impl(esm: &ExtendedSemiModule) -> Result<ReductionChain, Error> {
    let base = esm.base().clone();
    let h = base.slope().h();
    let scratch = Scratch::new(&base);
    let mut vals: Vec<i64> = scratch
        .free
        .iter()
        .map(|&a| esm.phi(a).expect("free positions lie in A"))
        .collect();
    let mut steps = alloc::vec![esm.clone()];
    let mut moves = Vec::new();
    // the jump set {x_1 > … > x_n}; the step phi_i -> phi_{i-1} adds alpha_i
    // along the x_i-chain, so walking i = n down to 1 consumes the x_i in
    // ascending order
    let mut xs: Vec<i64> = Vec::new();
    for (i, &a) in scratch.free.iter().enumerate() {
        let next = scratch
            .next_val(&vals, i)
            .expect("phi is defined on all of A above a free position");
        if next > vals[i] + 1 {
            xs.push(a);
        }
    }
    xs.sort_unstable();
    let index_of: BTreeMap<i64, usize> = scratch
        .free
        .iter()
        .enumerate()
        .map(|(i, &a)| (a, i))
        .collect();
    for (step_no, &x) in xs.iter().enumerate() {
        let i = index_of[&x];
        let next = scratch.next_val(&vals, i).unwrap();
        let alpha = next - 1 - vals[i];
        debug_assert!(alpha > 0);
        let phi_x = vals[i];
        let n = (x - base.gen_for_class(x)) / h;
        // phi_{i-1}: add alpha along x, x-h, ..., x-nh
        for j in 0..=n {
            let idx = index_of[&(x - j * h)];
            vals[idx] += alpha;
        }
        // entry replacement: mu^{i-1} = mu^i - {phi(x)-n, phi(x)+alpha+1}
        //                              + {phi(x)+alpha-n, phi(x)+1}
        let prev_mu = steps.last().unwrap().mu().clone();
        let mut ms: Vec<i64> = prev_mu.entries().to_vec();
        for rem in [phi_x - n, phi_x + alpha + 1] {
            match ms.iter().position(|&v| v == rem) {
                Some(p) => {
                    ms.remove(p);
                }
                None => {
                    return Err(Error::ReductionMismatch {
                        step: step_no,
                        expected: format!("multiset containing {rem}"),
                        got: prev_mu.to_string(),
                    })
                }
            }
        }
        ms.push(phi_x + alpha - n);
        ms.push(phi_x + 1);
        ms.sort_unstable();
        let replaced_mu = Coweight::new(ms);
        let (mu, dec) = scratch.finish(&vals, None).ok_or(Error::ReductionMismatch {
            step: step_no,
            expected: replaced_mu.to_string(),
            got: String::from("no decomposition"),
        })?;
        if mu != replaced_mu {
            return Err(Error::ReductionMismatch {
                step: step_no,
                expected: replaced_mu.to_string(),
                got: mu.to_string(),
            });
        }
        steps.push(assemble(&base, &scratch, &vals, mu, dec));
        moves.push(ReductionMove {
            x,
            alpha,
            n,
            replaced_mu,
        });
    }
    debug_assert!(steps.last().unwrap().is_cyclic());
    Ok(ReductionChain { steps, moves })
}

/// The explicit bijection behind `|𝒱| = d(b, μ)` for the cyclic extended
/// semi-module on a semi-module of dominant type: `(b_i, b) ↦ b − b_i + b_0`,
/// whose image is exactly `{a ∉ A | a > b_0}`.
pub fn propdim_bijection(base: &SemiModule) -> Result<Vec<((i64, i64), i64)>, Error> {
    let ty = base.type_of();
    if !ty.is_dominant() {
        return Err(Error::NotDominant(ty.to_string()));
    }
    let esm = ExtendedSemiModule::cyclic_of(base.clone());
    let b0 = base.min_gen();
    Ok(esm
        .v_set()
        .pairs()
        .iter()
        .map(|&(a, b)| ((a, b), b - a + b0))
        .collect())
}

/// All extended semi-modules for `μ`, ordered by type (lexicographic), then
/// by `φ` (lexicographic on the window).
pub fn enumerate_esm(slope: Slope, mu: &Coweight) -> Result<Vec<ExtendedSemiModule>, Error> {
    slope.check_dominant_coweight(mu)?;
    let mut caps = alloc::vec![0i64; (mu.entries().last().copied().unwrap_or(0) + 2) as usize];
    for n in 0..caps.len() {
        caps[n] = mu.entries().iter().filter(|&&e| e <= n as i64).count() as i64;
    }
    let mut out = Vec::new();
    for ty in enumerate_types(slope, mu)? {
        let base = SemiModule::from_type(slope, &ty).expect("enumerated types are valid");
        let scratch = Scratch::new(&base);
        scratch.for_each_phi(Some(&caps), &mut |vals| {
            if let Some((derived, dec)) = scratch.finish(vals, Some(mu)) {
                out.push(assemble(&base, &scratch, vals, derived, dec));
            }
        });
    }
    Ok(out)
}

/// All extended semi-modules of the slope for every `μ` at once, in the same
/// canonical order; each entry carries its derived `μ`.
pub fn enumerate_all_esm(slope: Slope) -> Vec<ExtendedSemiModule> {
    let mut out = Vec::new();
    for ty in all_types(slope) {
        let base = SemiModule::from_type(slope, &ty).expect("enumerated types are valid");
        let scratch = Scratch::new(&base);
        scratch.for_each_phi(None, &mut |vals| {
            if let Some((derived, dec)) = scratch.finish(vals, None) {
                out.push(assemble(&base, &scratch, vals, derived, dec));
            }
        });
    }
    out
}

// ---------------------------------------------------------------------------
// internals

/// Per-semi-module scratch data for enumerating and validating `φ`.
///
/// `φ` is free exactly on `A ∩ [min B, F)`; beyond the conductor `F` it is
/// forced to the pointwise maximum, which rises by exactly 1 along each
/// residue class.
struct Scratch<'a> {
    base: &'a SemiModule,
    /// free positions, ascending
    free: Vec<i64>,
    /// index of the same-class previous free position
    prev: Vec<Option<usize>>,
    /// pointwise maximum at each free position
    pmax: Vec<i64>,
    /// index of the same-class next free position (None: next is forced)
    next: Vec<Option<usize>>,
    /// per residue class: forced value at the first position `≥ F`
    tails: Vec<i64>,
}

impl<'a> Scratch<'a> {
    fn new(base: &'a SemiModule) -> Self {
        let h = base.slope().h();
        let f = base.conductor();
        let mut free = Vec::new();
        for &g in base.gens() {
            let mut a = g;
            while a < f {
                free.push(a);
                a += h;
            }
        }
        free.sort_unstable();
        let idx: BTreeMap<i64, usize> = free.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let prev: Vec<Option<usize>> = free.iter().map(|&a| idx.get(&(a - h)).copied()).collect();
        let next: Vec<Option<usize>> = free.iter().map(|&a| idx.get(&(a + h)).copied()).collect();
        let pmax: Vec<i64> = free.iter().map(|&a| base.phi_max(a).unwrap()).collect();
        let tails: Vec<i64> = base
            .gens()
            .iter()
            .map(|&g| {
                let mut a = g;
                while a < f {
                    a += h;
                }
                base.phi_max(a).unwrap()
            })
            .collect();
        Scratch {
            base,
            free,
            prev,
            pmax,
            next,
            tails,
        }
    }

    /// `φ(free[i] + h)` under the assignment `vals`.
    fn next_val(&self, vals: &[i64], i: usize) -> Option<i64> {
        match self.next[i] {
            Some(j) => Some(vals[j]),
            None => self.base.phi_max(self.free[i] + self.base.slope().h()),
        }
    }

    /// Enumerates every assignment satisfying (1)–(3), ascending positions
    /// and values, so the visit order is lexicographic in `φ`.
    ///
    /// `caps[n]`, when given, bounds the count of `φ`-values `≤ n` (the level
    /// count of the target `μ`); the count never exceeding `h` is always
    /// enforced.
    fn for_each_phi(&self, caps: Option<&[i64]>, visit: &mut dyn FnMut(&[i64])) {
        let h = self.base.slope().h();
        let tails_le = |n: i64| -> i64 { self.tails.iter().filter(|&&t| t <= n).count() as i64 };
        let mut vals = alloc::vec![0i64; self.free.len()];
        let mut cnt: Vec<i64> = alloc::vec![0i64; 1];
        fn rec(
            s: &Scratch,
            i: usize,
            vals: &mut Vec<i64>,
            cnt: &mut Vec<i64>,
            caps: Option<&[i64]>,
            h: i64,
            tails_le: &dyn Fn(i64) -> i64,
            visit: &mut dyn FnMut(&[i64]),
        ) {
            if i == s.free.len() {
                visit(vals);
                return;
            }
            let lo = match s.prev[i] {
                Some(j) => vals[j] + 1,
                None => 0,
            };
            for v in lo..=s.pmax[i] {
                // level count at v: assigned values + forced tails
                if cnt.len() <= v as usize {
                    cnt.resize(v as usize + 1, 0);
                }
                let level = cnt[v as usize] + 1 + tails_le(v);
                let cap = match caps {
                    Some(c) => {
                        if (v as usize) < c.len() {
                            c[v as usize]
                        } else {
                            h
                        }
                    }
                    None => h,
                };
                if level > cap {
                    continue;
                }
                cnt[v as usize] += 1;
                vals[i] = v;
                rec(s, i + 1, vals, cnt, caps, h, tails_le, visit);
                cnt[v as usize] -= 1;
            }
        }
        rec(self, 0, &mut vals, &mut cnt, caps, h, &tails_le, visit);
    }

    /// Level counts, feasibility, and the per-level matchings. Returns the
    /// derived `μ` (= sorted start values) and the witness, or `None` when
    /// either the signed level counts go negative, the counts disagree with
    /// `target`, or some level matching is infeasible.
    fn finish(&self, vals: &[i64], target: Option<&Coweight>) -> Option<(Coweight, Decomposition)> {
        let h = self.base.slope().h();
        let top_level = vals
            .iter()
            .chain(self.tails.iter())
            .copied()
            .max()
            .unwrap_or(0);
        let mut counts = alloc::vec![0i64; top_level as usize + 1];
        for &v in vals {
            counts[v as usize] += 1;
        }
        for &t in &self.tails {
            for n in t..=top_level {
                counts[n as usize] += 1;
            }
        }
        // derived mu from the signed differences
        let mut mu_entries = Vec::with_capacity(h as usize);
        let mut prev = 0i64;
        for (n, &c) in counts.iter().enumerate() {
            let q = c - prev;
            if q < 0 {
                return None;
            }
            for _ in 0..q {
                mu_entries.push(n as i64);
            }
            prev = c;
        }
        if prev != h || mu_entries.len() != h as usize {
            return None;
        }
        let mu = Coweight::new(mu_entries);
        if let Some(t) = target {
            if &mu != t {
                return None;
            }
        }
        // D: free positions with a jump; grouped by the level they need
        let mut need_by_level: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for (i, &a) in self.free.iter().enumerate() {
            let nv = self.next_val(vals, i)?;
            if nv > vals[i] + 1 {
                need_by_level.entry(vals[i] + 1).or_default().push(a);
            }
        }
        // slots: B plus the successors-of-jumps positions D + h
        let phi_of = |a: i64| -> Option<i64> {
            match self.free.binary_search(&a) {
                Ok(i) => Some(vals[i]),
                Err(_) => self.base.phi_max(a),
            }
        };
        let mut slots_by_level: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        let mut slot_set: Vec<i64> = self.base.gens().to_vec();
        for lv in need_by_level.values() {
            for &a in lv {
                slot_set.push(a + h);
            }
        }
        slot_set.sort_unstable();
        slot_set.dedup();
        for &c in &slot_set {
            slots_by_level.entry(phi_of(c)?).or_default().push(c);
        }
        let mut matched = BTreeMap::new();
        let mut start_list: Vec<(i64, i64)> = Vec::new();
        let mut levels: Vec<i64> = slots_by_level.keys().copied().collect();
        levels.extend(need_by_level.keys().copied());
        levels.sort_unstable();
        levels.dedup();
        for n in levels {
            let empty = Vec::new();
            let need = need_by_level.get(&n).unwrap_or(&empty);
            let slots = slots_by_level.get(&n).unwrap_or(&empty);
            // Kuhn's augmenting path matching: need -> slots, slot > a + h
            let mut slot_owner: Vec<Option<usize>> = alloc::vec![None; slots.len()];
            fn augment(
                ai: usize,
                need: &[i64],
                slots: &[i64],
                h: i64,
                slot_owner: &mut [Option<usize>],
                seen: &mut [bool],
            ) -> bool {
                for (si, &s) in slots.iter().enumerate() {
                    if s > need[ai] + h && !seen[si] {
                        seen[si] = true;
                        let free_slot = match slot_owner[si] {
                            None => true,
                            Some(prev) => augment(prev, need, slots, h, slot_owner, seen),
                        };
                        if free_slot {
                            slot_owner[si] = Some(ai);
                            return true;
                        }
                    }
                }
                false
            }
            for ai in 0..need.len() {
                let mut seen = alloc::vec![false; slots.len()];
                if !augment(ai, need, slots, h, &mut slot_owner, &mut seen) {
                    return None;
                }
            }
            for (si, owner) in slot_owner.iter().enumerate() {
                match owner {
                    Some(ai) => {
                        matched.insert(need[*ai], slots[si]);
                    }
                    None => start_list.push((slots[si], n)),
                }
            }
        }
        start_list.sort_unstable();
        debug_assert_eq!(start_list.len(), h as usize);
        let dec = Decomposition {
            matched,
            starts: start_list,
            h_step: h,
        };
        debug_assert_eq!(dec.start_values(), mu);
        Some((mu, dec))
    }
}

/// Materializes the validated data into an [`ExtendedSemiModule`]:
/// window `[min B, F + h(Φ+2))`, pair set bounded by `max B + h(Φ+1)`.
fn assemble(
    base: &SemiModule,
    scratch: &Scratch,
    vals: &[i64],
    mu: Coweight,
    decomposition: Decomposition,
) -> ExtendedSemiModule {
    let h = base.slope().h();
    let f = base.conductor();
    let lo = base.min_gen();
    // Phi = max phi on [min B, F + h)
    let mut big_phi = 0i64;
    for &v in vals.iter().chain(scratch.tails.iter()) {
        big_phi = big_phi.max(v);
    }
    let hi = f + h * (big_phi + 2);
    let mut phi: Vec<Option<i64>> = alloc::vec![None; (hi - lo) as usize];
    for (i, &a) in scratch.free.iter().enumerate() {
        phi[(a - lo) as usize] = Some(vals[i]);
    }
    for a in f.max(lo)..hi {
        if base.contains(a) {
            phi[(a - lo) as usize] = base.phi_max(a);
        }
    }
    let at = |a: i64| -> Option<i64> {
        if a < lo || a >= hi {
            None
        } else {
            phi[(a - lo) as usize]
        }
    };
    let cyclic = scratch
        .free
        .iter()
        .enumerate()
        .all(|(i, _)| vals[i] == scratch.pmax[i]);
    // V = {(a, b) | b > a, phi(a) > phi(b) > phi(a-h)}; the first coordinate
    // needs headroom between phi(a-h) and phi(a), so a is a generator or
    // sits just above a jump.
    let bound = base.max_gen() + h * (big_phi + 1);
    let mut pairs = Vec::new();
    for a in lo..hi {
        let fa = match at(a) {
            Some(v) => v,
            None => continue,
        };
        let below = if a - h >= lo { at(a - h) } else { None };
        match below {
            Some(fb) if fa <= fb + 1 => continue,
            _ => {}
        }
        for b in a + 1..bound.min(hi) {
            if let Some(fb) = at(b) {
                if fb < fa && below.is_none_or(|fl| fb > fl) {
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs.sort_unstable();
    ExtendedSemiModule {
        base: base.clone(),
        mu,
        window_lo: lo,
        window_hi: hi,
        phi,
        vset: VSet { pairs },
        decomposition,
        cyclic,
    }
}
