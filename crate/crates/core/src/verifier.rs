//! Matches oracle graded characters against catalog entries.
//!
//! A graded character over `S^{p^r}` is written uniquely as a signed sum of
//! cells `chi(l) (x) S^{p^r}(-s)` (Weyl character times a shifted free module).
//! Every candidate summand has a finite cell expansion: a tilt-free summand is
//! the cells of `T(l)`, and `K_jk^Fr` is the alternating sum of its
//! resolution. Reconciling a target with a catalog is then a nonnegative
//! integer feasibility problem in the candidates' multiplicities per twist,
//! solved by a depth-first search over twists in increasing order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::koszul_catalog::{
    bottom_piece, predict_cohomology, resolution_spec, weight_interval, KCharacters, KoszulError,
};
use crate::polynomial_oracle::{
    b1_cohomology_oracle, build_equivariant_resolution, c_jk_complex, gr_invariants_s, graded_invariants_of_tensor,
    kernel_invariants, realize_tilting, OracleError,
};
use crate::sl2_characters::{
    binomial, char_tilting, char_weyl, invariant_multiplicity, polynomial_ring_characters, weyl_expand,
    CharacterError, WeightCharacter,
};
use crate::summand_catalog::{
    catalog_s_gr_unchecked, check_hypotheses, decompose_kjk_g1_unchecked, decompose_tjs_g1_unchecked, CatalogError,
    Params, SummandInstance, SummandKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Koszul(#[from] KoszulError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error("{0} has no graded character")]
    NoCharacter(SummandKind),
    #[error("missing parameter {0}")]
    MissingParameter(&'static str),
    #[error("solution does not reproduce the target in degree {0}")]
    Reconstruction(u64),
}

/// Degree-indexed characters, truncated at `len() - 1`.
pub type GradedCharacter = Vec<WeightCharacter>;

/// Signed multiplicities of `chi(l) (x) S^{p^r}(-s)`, keyed by `(s, l)`.
pub type CellVector = BTreeMap<(u64, u64), i64>;

/// Failure to write a target in cells: the degree and weight where it breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Failure {
    pub degree: u64,
    pub weight: i64,
}

/// Truncated graded character of a catalog entry in its own grading.
///
/// `K(j, k)` keeps the grading of `K_jk`, so its bottom sits at `p^r` times
/// the bottom degree of `K_jk`.
pub fn summand_graded_character(
    kind: SummandKind,
    r: u32,
    n: u64,
    p: u64,
    max_degree: u64,
) -> Result<GradedCharacter, VerifyError> {
    let q = p.pow(r);
    let len = max_degree as usize + 1;
    let mut out = vec![WeightCharacter::zero(); len];
    match kind {
        SummandKind::TiltFree(l) => {
            let t = char_tilting(l, p)?;
            let poly = polynomial_ring_characters(n as usize, (max_degree / q) as usize);
            for (e, c) in poly.iter().enumerate() {
                out[e * q as usize] = t.tensor(c);
            }
        }
        SummandKind::K(j, k) => {
            let table = KCharacters::new(n, (max_degree / q) as usize);
            for e in 0..=max_degree / q {
                out[(e * q) as usize] = table.char_kjk(j, k, e as i64)?;
            }
        }
        SummandKind::Cov(l) => {
            let poly = polynomial_ring_characters(n as usize, max_degree as usize);
            let sl = char_weyl(l as i64)?;
            for (d, c) in poly.iter().enumerate() {
                let m = invariant_multiplicity(&sl.tensor(c))?;
                if m > 0 {
                    out[d] = WeightCharacter::from_pairs([(0, m)]);
                }
            }
        }
        SummandKind::CovK(j, k) => {
            let table = KCharacters::new(n, max_degree as usize);
            for (d, slot) in out.iter_mut().enumerate() {
                let m = invariant_multiplicity(&table.char_kjk(j, k, d as i64)?)?;
                if m > 0 {
                    *slot = WeightCharacter::from_pairs([(0, m)]);
                }
            }
        }
        SummandKind::SheafSymQ(_) | SummandKind::SheafK(..) => return Err(VerifyError::NoCharacter(kind)),
    }
    Ok(out)
}

/// Unique signed cell decomposition of a target over `S^q`, `q = p^r`.
pub fn cell_decomposition(target: &[WeightCharacter], n: u64, q: u64) -> Result<CellVector, Failure> {
    let max = target.len().saturating_sub(1);
    let poly = polynomial_ring_characters(n as usize, max / q as usize);
    let mut rest: Vec<BTreeMap<u64, i64>> = Vec::with_capacity(target.len());
    for (d, c) in target.iter().enumerate() {
        let expanded = weyl_expand(c).map_err(|_| Failure { degree: d as u64, weight: c.highest_weight().unwrap_or(0) })?;
        rest.push(expanded);
    }
    let mut cells = CellVector::new();
    for d in 0..=max {
        let here: Vec<(u64, i64)> = rest[d].iter().filter(|e| *e.1 != 0).map(|(&l, &c)| (l, c)).collect();
        for (l, c) in here {
            cells.insert((d as u64, l), c);
            let weyl = char_weyl(l as i64).expect("nonnegative highest weight");
            for (e, pc) in poly.iter().enumerate() {
                let at = d + e * q as usize;
                if at > max {
                    break;
                }
                for (m, v) in weyl_expand(&weyl.tensor(pc)).expect("symmetric product") {
                    *rest[at].entry(m).or_insert(0) -= c * v;
                }
            }
        }
    }
    Ok(cells)
}

/// A catalog entry prepared for the solver: its cells in its own grading.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub kind: SummandKind,
    pub frobenius_level: u32,
    /// `(shift, l, coefficient)`, shifts relative to the bottom.
    pub cells: Vec<(u64, u64, i64)>,
    /// Degree of the bottom in the entry's own grading.
    pub natural_bottom: u64,
}

impl Candidate {
    pub fn new(kind: SummandKind, r: u32, n: u64, p: u64) -> Result<Candidate, VerifyError> {
        let q = p.pow(r);
        let mut raw: Vec<(u64, u64, i64)> = Vec::new();
        match kind {
            SummandKind::TiltFree(l) => {
                for (m, c) in weyl_expand(&char_tilting(l, p)?)? {
                    raw.push((0, m, c));
                }
            }
            SummandKind::K(j, k) => {
                for term in resolution_spec(n, j)? {
                    let pos = -term.position;
                    if pos <= k as i64 {
                        continue;
                    }
                    let sign = if (pos - k as i64 - 1) % 2 == 0 { 1 } else { -1 };
                    let mult = binomial(n, term.wedge) as i64;
                    for (m, c) in weyl_expand(&char_tilting(term.tilting, p)?)? {
                        raw.push((q * (-term.twist) as u64, m, sign * mult * c));
                    }
                }
            }
            _ => return Err(VerifyError::NoCharacter(kind)),
        }
        let natural_bottom = raw.iter().map(|c| c.0).min().unwrap_or(0);
        let cells = raw.into_iter().filter(|c| c.2 != 0).map(|(s, l, c)| (s - natural_bottom, l, c)).collect();
        Ok(Candidate { kind, frobenius_level: r, cells, natural_bottom })
    }

    fn is_tilt_free(&self) -> bool {
        matches!(self.kind, SummandKind::TiltFree(_))
    }

    /// Highest Weyl index of a tilt-free candidate (its expansion is unitriangular).
    fn top(&self) -> u64 {
        self.cells.iter().map(|c| c.1).max().unwrap_or(0)
    }
}

/// One placed summand: candidate index, absolute degree of its bottom, multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub candidate: usize,
    pub bottom: u64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Feasible(Vec<Placement>),
    Infeasible(Failure),
    /// The search budget ran out before an answer was found.
    Inconclusive,
}

/// Search over candidate multiplicities per twist so that the placed
/// summands reproduce `target` cell by cell up to `max_degree`.
/// Candidates listed in `disabled` may not be used.
pub fn solve_multiplicities(
    target: &CellVector,
    candidates: &[Candidate],
    disabled: &BTreeSet<usize>,
    max_degree: u64,
    budget: u64,
) -> SolveOutcome {
    let mut search = Search {
        candidates,
        disabled,
        max_degree,
        budget,
        nodes: 0,
        failed: BTreeSet::new(),
        deepest: None,
        placements: Vec::new(),
    };
    let pending = CellVector::new();
    match search.visit(target, 0, &pending) {
        Some(true) => SolveOutcome::Feasible(search.placements),
        Some(false) => SolveOutcome::Infeasible(search.deepest.unwrap_or(Failure { degree: 0, weight: 0 })),
        None => SolveOutcome::Inconclusive,
    }
}

/// A shift together with the sorted cells still to be explained.
type SearchState = (u64, Vec<((u64, u64), i64)>);

struct Search<'a> {
    candidates: &'a [Candidate],
    disabled: &'a BTreeSet<usize>,
    max_degree: u64,
    budget: u64,
    nodes: u64,
    failed: BTreeSet<SearchState>,
    deepest: Option<Failure>,
    placements: Vec<Placement>,
}

impl Search<'_> {
    fn fail(&mut self, degree: u64, weight: u64) {
        if self.deepest.is_none_or(|f| f.degree < degree) {
            self.deepest = Some(Failure { degree, weight: weight as i64 });
        }
    }

    /// `Some(true)` when a completion exists, `Some(false)` when none does,
    /// `None` when the node budget is exhausted.
    fn visit(&mut self, target: &CellVector, s: u64, pending: &CellVector) -> Option<bool> {
        if s > self.max_degree {
            return Some(true);
        }
        let key = (s, pending.iter().map(|(&k, &v)| (k, v)).collect::<Vec<_>>());
        if self.failed.contains(&key) {
            return Some(false);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let mut residual: BTreeMap<u64, i64> = BTreeMap::new();
        for (&(_, l), &c) in target.range((s, 0)..(s + 1, 0)) {
            *residual.entry(l).or_insert(0) += c;
        }
        for (&(_, l), &c) in pending.range((s, 0)..(s + 1, 0)) {
            *residual.entry(l).or_insert(0) -= c;
        }
        let k_here: Vec<usize> = (0..self.candidates.len())
            .filter(|i| !self.disabled.contains(i) && !self.candidates[*i].is_tilt_free())
            .collect();
        let mut choice = vec![0u64; k_here.len()];
        let result = self.branch(target, s, pending, &residual, &k_here, 0, &mut choice);
        if result == Some(false) {
            self.failed.insert(key);
        }
        result
    }

    #[allow(clippy::too_many_arguments)]
    fn branch(
        &mut self,
        target: &CellVector,
        s: u64,
        pending: &CellVector,
        residual: &BTreeMap<u64, i64>,
        k_here: &[usize],
        idx: usize,
        choice: &mut Vec<u64>,
    ) -> Option<bool> {
        if idx == k_here.len() {
            return self.settle(target, s, pending, residual, k_here, choice);
        }
        let cand = &self.candidates[k_here[idx]];
        if s < cand.natural_bottom {
            // Catalog twists of K-summands are nonnegative.
            choice[idx] = 0;
            return self.branch(target, s, pending, residual, k_here, idx + 1, choice);
        }
        let mut bound = u64::MAX;
        for &(off, l, c) in &cand.cells {
            if off == 0 && c > 0 {
                bound = bound.min((residual.get(&l).copied().unwrap_or(0).max(0) / c) as u64);
            }
        }
        if bound == u64::MAX {
            bound = 0;
        }
        for a in 0..=bound {
            let mut next = residual.clone();
            for &(off, l, c) in &cand.cells {
                if off == 0 {
                    *next.entry(l).or_insert(0) -= a as i64 * c;
                }
            }
            choice[idx] = a;
            match self.branch(target, s, pending, &next, k_here, idx + 1, choice) {
                Some(false) => continue,
                other => return other,
            }
        }
        choice[idx] = 0;
        Some(false)
    }

    fn settle(
        &mut self,
        target: &CellVector,
        s: u64,
        pending: &CellVector,
        residual: &BTreeMap<u64, i64>,
        k_here: &[usize],
        choice: &[u64],
    ) -> Option<bool> {
        let mut rest = residual.clone();
        let mut tilt: Vec<(usize, u64)> = Vec::new();
        while let Some((&l, &c)) = rest.iter().rev().find(|e| *e.1 != 0) {
            if c < 0 {
                self.fail(s, l);
                return Some(false);
            }
            let found = (0..self.candidates.len()).find(|i| {
                !self.disabled.contains(i) && self.candidates[*i].is_tilt_free() && self.candidates[*i].top() == l
            });
            let Some(i) = found else {
                self.fail(s, l);
                return Some(false);
            };
            for &(_, m, v) in &self.candidates[i].cells {
                *rest.entry(m).or_insert(0) -= c * v;
            }
            tilt.push((i, c as u64));
        }
        let mut next = CellVector::new();
        for (&(t, l), &c) in pending.range((s + 1, 0)..) {
            next.insert((t, l), c);
        }
        for (&i, &a) in k_here.iter().zip(choice) {
            if a == 0 {
                continue;
            }
            for &(off, l, c) in &self.candidates[i].cells {
                if off > 0 && s + off <= self.max_degree {
                    *next.entry((s + off, l)).or_insert(0) += a as i64 * c;
                }
            }
        }
        next.retain(|_, v| *v != 0);
        let mark = self.placements.len();
        for (i, m) in tilt {
            self.placements.push(Placement { candidate: i, bottom: s, multiplicity: m });
        }
        for (&i, &a) in k_here.iter().zip(choice) {
            if a > 0 {
                self.placements.push(Placement { candidate: i, bottom: s, multiplicity: a });
            }
        }
        let result = self.visit(target, s + 1, &next);
        if result != Some(true) {
            self.placements.truncate(mark);
        }
        result
    }
}

/// Check that the placed summands add up to the target degree by degree.
pub fn reconstruct(
    target: &[WeightCharacter],
    candidates: &[Candidate],
    placements: &[Placement],
    n: u64,
    p: u64,
) -> Result<(), VerifyError> {
    let max = target.len() as u64 - 1;
    let mut sum = vec![WeightCharacter::zero(); target.len()];
    let mut cache: BTreeMap<usize, GradedCharacter> = BTreeMap::new();
    for pl in placements {
        let cand = &candidates[pl.candidate];
        if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(pl.candidate) {
            let full = summand_graded_character(cand.kind, cand.frobenius_level, n, p, max + cand.natural_bottom)?;
            e.insert(full);
        }
        let full = &cache[&pl.candidate];
        for d in pl.bottom..=max {
            let own = (d - pl.bottom + cand.natural_bottom) as usize;
            sum[d as usize] = sum[d as usize].add(&full[own].scale(pl.multiplicity));
        }
    }
    for (d, (a, b)) in sum.iter().zip(target).enumerate() {
        if a != b {
            return Err(VerifyError::Reconstruction(d as u64));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    /// `S^{G_r}` against the S-level catalog.
    SGr,
    /// `(T(j) (x) S)^{G_1}` against its catalog.
    TjsG1,
    /// `K_jk^{G_1}` against its catalog.
    KjkG1,
    /// Closed-form B_1-cohomology against the bicomplex oracle.
    B1Predictor,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::SGr => "s-invariants",
            Scenario::TjsG1 => "tjs",
            Scenario::KjkG1 => "kjk",
            Scenario::B1Predictor => "b1-predictor",
        }
    }
}

/// Verification status of one entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    /// Every solution within the truncation uses the entry; `at` is the
    /// smallest truncation degree at which that is the case.
    Confirmed { at: u64 },
    /// Not forced within the truncation; explicitly not falsified.
    Unreached,
    /// The search budget ran out.
    Inconclusive,
    /// Observed data contradicts the entry (predictor scenario).
    Falsified,
}

impl EntryStatus {
    pub fn flag(&self) -> &'static str {
        match self {
            EntryStatus::Confirmed { .. } => "confirmed",
            EntryStatus::Unreached => "unreached",
            EntryStatus::Inconclusive => "inconclusive",
            EntryStatus::Falsified => "falsified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedEntry {
    pub kind: String,
    pub indices: Vec<u64>,
    pub frobenius_level: u32,
    /// Smallest twist used by the solution found, relative to the entry's own grading.
    pub twist: Option<i64>,
    /// Total multiplicity in the solution found.
    pub multiplicity: Option<u64>,
    pub status: EntryStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub scenario: Scenario,
    pub params: Params,
    pub max_degree: u64,
    pub consistent: bool,
    pub entries: Vec<VerifiedEntry>,
    pub failure: Option<Failure>,
    /// Degrees in which the target is not explained.
    pub residual_degrees: Vec<u64>,
}

impl VerificationReport {
    pub fn entry(&self, kind: SummandKind) -> Option<&VerifiedEntry> {
        self.entries.iter().find(|e| e.kind == kind.name() && e.indices == kind.indices())
    }
}

/// Node budget for each feasibility search.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Target graded character of a scenario, degrees `0..=max_degree`.
pub fn scenario_target(scenario: Scenario, params: &Params, max_degree: u64) -> Result<GradedCharacter, VerifyError> {
    let (n, p, r) = (params.n as usize, params.p, params.r);
    let d = max_degree as u32;
    match scenario {
        Scenario::SGr => (0..=d).map(|e| Ok(gr_invariants_s(n, p, r, e)?)).collect(),
        Scenario::TjsG1 => {
            let j = params.j.ok_or(VerifyError::MissingParameter("j"))?;
            let module = realize_tilting(j, p, 1)?;
            (0..=d).map(|e| Ok(graded_invariants_of_tensor(&module, n, 1, e)?)).collect()
        }
        Scenario::KjkG1 => {
            let j = params.j.ok_or(VerifyError::MissingParameter("j"))?;
            let k = params.k.ok_or(VerifyError::MissingParameter("k"))?;
            let res = build_equivariant_resolution(n, j, p, d)?;
            Ok(kernel_invariants(&res, k as usize, 1, d)?)
        }
        Scenario::B1Predictor => Err(VerifyError::NoCharacter(SummandKind::TiltFree(0))),
    }
}

/// Catalog entries a scenario is checked against.
pub fn scenario_catalog(scenario: Scenario, params: &Params) -> Result<Vec<SummandInstance>, VerifyError> {
    let (n, p) = (params.n, params.p);
    Ok(match scenario {
        Scenario::SGr => catalog_s_gr_unchecked(n, p, params.r, params.allow_small_p)?,
        Scenario::TjsG1 => {
            let j = params.j.ok_or(VerifyError::MissingParameter("j"))?;
            decompose_tjs_g1_unchecked(n, p, j, params.allow_small_p)?.catalog
        }
        Scenario::KjkG1 => {
            let j = params.j.ok_or(VerifyError::MissingParameter("j"))?;
            let k = params.k.ok_or(VerifyError::MissingParameter("k"))?;
            decompose_kjk_g1_unchecked(n, p, j, k, params.allow_small_p)?.catalog
        }
        Scenario::B1Predictor => Vec::new(),
    })
}

/// Reconcile an explicit target with catalog entries.
pub fn verify_target(
    scenario: Scenario,
    params: &Params,
    target: &[WeightCharacter],
    catalog: &[SummandInstance],
    budget: u64,
) -> Result<VerificationReport, VerifyError> {
    let (n, p) = (params.n, params.p);
    let max_degree = target.len() as u64 - 1;
    let candidates: Vec<Candidate> =
        catalog.iter().map(|s| Candidate::new(s.kind, s.frobenius_level, n, p)).collect::<Result<_, _>>()?;
    let q = p.pow(catalog.first().map_or(params.r, |s| s.frobenius_level));
    let blank = |status: EntryStatus| -> Vec<VerifiedEntry> {
        candidates
            .iter()
            .map(|c| VerifiedEntry {
                kind: c.kind.name().into(),
                indices: c.kind.indices(),
                frobenius_level: c.frobenius_level,
                twist: None,
                multiplicity: None,
                status,
            })
            .collect()
    };
    let inconsistent = |failure: Failure, entries: Vec<VerifiedEntry>| VerificationReport {
        scenario,
        params: params.clone(),
        max_degree,
        consistent: false,
        entries,
        failure: Some(failure),
        residual_degrees: (failure.degree..=max_degree).collect(),
    };
    let cells = match cell_decomposition(target, n, q) {
        Ok(c) => c,
        Err(f) => return Ok(inconsistent(f, blank(EntryStatus::Unreached))),
    };
    let none = BTreeSet::new();
    let placements = match solve_multiplicities(&cells, &candidates, &none, max_degree, budget) {
        SolveOutcome::Feasible(pl) => pl,
        SolveOutcome::Infeasible(f) => return Ok(inconsistent(f, blank(EntryStatus::Unreached))),
        SolveOutcome::Inconclusive => {
            let mut rep = inconsistent(Failure { degree: max_degree, weight: 0 }, blank(EntryStatus::Inconclusive));
            rep.failure = None;
            rep.residual_degrees = Vec::new();
            return Ok(rep);
        }
    };
    reconstruct(target, &candidates, &placements, n, p)?;

    let mut entries = blank(EntryStatus::Unreached);
    for pl in &placements {
        let e = &mut entries[pl.candidate];
        let twist = pl.bottom as i64 - candidates[pl.candidate].natural_bottom as i64;
        e.twist = Some(e.twist.map_or(twist, |t: i64| t.min(twist)));
        e.multiplicity = Some(e.multiplicity.unwrap_or(0) + pl.multiplicity);
    }
    let statuses: Vec<EntryStatus> = crate::par_map(&(0..candidates.len()).collect::<Vec<_>>(), |&i| {
        forced_status(&cells, &candidates, i, max_degree, budget)
    });
    for (e, s) in entries.iter_mut().zip(statuses) {
        e.status = s;
    }
    Ok(VerificationReport {
        scenario,
        params: params.clone(),
        max_degree,
        consistent: true,
        entries,
        failure: None,
        residual_degrees: Vec::new(),
    })
}

/// Whether candidate `i` is needed by every solution, and from which truncation on.
fn forced_status(cells: &CellVector, candidates: &[Candidate], i: usize, max_degree: u64, budget: u64) -> EntryStatus {
    let without: BTreeSet<usize> = [i].into_iter().collect();
    let forced_at = |d: u64| -> Option<bool> {
        let truncated: CellVector = cells.range(..(d + 1, 0)).map(|(&k, &v)| (k, v)).collect();
        match solve_multiplicities(&truncated, candidates, &without, d, budget) {
            SolveOutcome::Infeasible(_) => Some(true),
            SolveOutcome::Feasible(_) => Some(false),
            SolveOutcome::Inconclusive => None,
        }
    };
    match forced_at(max_degree) {
        None => EntryStatus::Inconclusive,
        Some(false) => EntryStatus::Unreached,
        Some(true) => {
            // Forcedness is monotone in the truncation; find the first degree.
            let (mut lo, mut hi) = (0u64, max_degree);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if forced_at(mid) == Some(true) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            EntryStatus::Confirmed { at: hi }
        }
    }
}

/// Compute the oracle target for a scenario and reconcile it with the catalog.
pub fn verify_decomposition(
    scenario: Scenario,
    params: &Params,
    max_degree: u64,
    budget: u64,
) -> Result<VerificationReport, VerifyError> {
    if scenario == Scenario::B1Predictor {
        return verify_b1_predictor(params);
    }
    if !params.allow_small_p {
        check_hypotheses(params.n, params.p)?;
    }
    let target = scenario_target(scenario, params, max_degree)?;
    let catalog = scenario_catalog(scenario, params)?;
    verify_target(scenario, params, &target, &catalog, budget)
}

/// Outcome of the predictor check for one `(j, k, l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictorCheck {
    pub j: u64,
    pub k: u64,
    pub l: u64,
    /// Tuples `t` whose oracle cohomology off the R1 weight line differs from the prediction.
    pub mismatches: Vec<Vec<u64>>,
    /// Weights (Frobenius units) seen over all `t`, with the number of tuples showing each.
    pub observed: BTreeMap<i64, u64>,
    /// The interval of weights predicted for the union over `t`.
    pub interval: Option<(i64, i64)>,
}

impl PredictorCheck {
    pub fn union_matches_interval(&self) -> bool {
        let predicted: BTreeSet<i64> = self.interval.map_or(BTreeSet::new(), |(a, b)| (a..=b).collect());
        predicted == self.observed.keys().copied().collect()
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.union_matches_interval()
    }
}

/// Compare the closed-form B_1-cohomology of `C_jk^(t)` with the oracle for every `t`.
pub fn check_b1_predictor(n: u64, p: u64, j: u64, k: u64, l: u64) -> Result<PredictorCheck, VerifyError> {
    let tuples: Vec<Vec<u64>> = (0..p.pow(n as u32)).map(|code| (0..n).map(|i| code / p.pow(i as u32) % p).collect()).collect();
    let results = crate::par_map(&tuples, |t| -> Result<(WeightCharacter, bool), VerifyError> {
        let complex = c_jk_complex(p, j, k, t)?;
        let h = b1_cohomology_oracle(&complex, l as i64, false)?;
        let pred = predict_cohomology(p, j, k, l, t.iter().sum());
        let r1 = pred.r1_weight / p as i64;
        let r2 = pred.r2_weight.map(|w| w / p as i64);
        let off_line: Vec<(i64, u64)> = h.iter().filter(|(w, _)| *w != r1).collect();
        let ok = match r2 {
            Some(w) if w != r1 => off_line == [(w, 1)],
            Some(_) => off_line.is_empty() && h.multiplicity(r1) >= 1,
            None => off_line.is_empty(),
        };
        Ok((h, ok))
    });
    let mut check = PredictorCheck {
        j,
        k,
        l,
        mismatches: Vec::new(),
        observed: BTreeMap::new(),
        interval: weight_interval(n, p, j, l, k, true),
    };
    for (t, res) in tuples.into_iter().zip(results) {
        let (h, ok) = res?;
        for (w, _) in h.iter() {
            *check.observed.entry(w).or_insert(0) += 1;
        }
        if !ok {
            check.mismatches.push(t);
        }
    }
    Ok(check)
}

/// Predictor scenario over all `1 <= j, k <= n - 3` and `1 + [k > j] <= l <= n - 1`.
pub fn verify_b1_predictor(params: &Params) -> Result<VerificationReport, VerifyError> {
    let (n, p) = (params.n, params.p);
    if !params.allow_small_p {
        check_hypotheses(n, p)?;
    }
    let mut entries = Vec::new();
    let mut failure = None;
    let mut consistent = true;
    for j in params.j.map_or(1..=n - 3, |j| j..=j) {
        for k in params.k.map_or(1..=n - 3, |k| k..=k) {
            for l in 1 + u64::from(k > j)..=n - 1 {
                let check = check_b1_predictor(n, p, j, k, l)?;
                let predicted: BTreeSet<i64> = check.interval.map_or(BTreeSet::new(), |(a, b)| (a..=b).collect());
                let weights: BTreeSet<i64> = predicted.iter().chain(check.observed.keys()).copied().collect();
                for w in weights {
                    let seen = check.observed.get(&w).copied();
                    let ok = predicted.contains(&w) && seen.is_some() && check.mismatches.is_empty();
                    entries.push(VerifiedEntry {
                        kind: "B1Weight".into(),
                        indices: vec![j, k, l, w as u64],
                        frobenius_level: 1,
                        twist: None,
                        multiplicity: seen,
                        status: if ok { EntryStatus::Confirmed { at: 0 } } else { EntryStatus::Falsified },
                    });
                }
                if !check.passed() {
                    consistent = false;
                    if failure.is_none() {
                        let t_sum = check.mismatches.first().map_or(0, |t| t.iter().sum());
                        failure = Some(Failure { degree: t_sum, weight: l as i64 });
                    }
                }
            }
        }
    }
    Ok(VerificationReport {
        scenario: Scenario::B1Predictor,
        params: params.clone(),
        max_degree: 0,
        consistent,
        entries,
        failure,
        residual_degrees: Vec::new(),
    })
}

/// Bottom degree of `K(j, k)` at Frobenius level `r` in its own grading.
pub fn k_bottom_degree(j: u64, k: u64, p: u64, r: u32) -> u64 {
    bottom_piece(j, k).0 as u64 * p.pow(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64, p: u64, r: u32) -> Params {
        Params { n, p, r, ..Params::default() }
    }

    #[test]
    fn summand_characters() {
        let t0 = summand_graded_character(SummandKind::TiltFree(0), 1, 4, 3, 6).unwrap();
        assert_eq!(t0[6].dim(), 36);
        let k11 = summand_graded_character(SummandKind::K(1, 1), 1, 4, 3, 12).unwrap();
        assert!(k11[..9].iter().all(WeightCharacter::is_zero));
        assert_eq!(k11[9], WeightCharacter::from_pairs([(0, 4)]));
        let cov = summand_graded_character(SummandKind::Cov(1), 1, 4, 3, 1).unwrap();
        assert_eq!(cov[1], WeightCharacter::from_pairs([(0, 4)]));
        assert_eq!(k_bottom_degree(1, 1, 3, 1), 9);
    }

    #[test]
    fn free_module_is_one_cell() {
        let target = summand_graded_character(SummandKind::TiltFree(0), 1, 4, 3, 10).unwrap();
        let cells = cell_decomposition(&target, 4, 3).unwrap();
        assert_eq!(cells.into_iter().collect::<Vec<_>>(), vec![((0, 0), 1)]);
        let report = verify_target(Scenario::SGr, &params(4, 3, 1), &target, &crate::summand_catalog::catalog_s_gr(4, 3, 1).unwrap(), DEFAULT_BUDGET)
            .unwrap();
        assert!(report.consistent);
        let t0 = report.entry(SummandKind::TiltFree(0)).unwrap();
        assert_eq!((t0.twist, t0.multiplicity), (Some(0), Some(1)));
    }

    #[test]
    fn k_candidate_cells() {
        let c = Candidate::new(SummandKind::K(1, 1), 1, 4, 3).unwrap();
        assert_eq!(c.natural_bottom, 9);
        assert_eq!(c.cells, vec![(0, 0, 4), (3, 1, -1)]);
    }

    #[test]
    fn spurious_weight_is_inconsistent() {
        let mut target = summand_graded_character(SummandKind::TiltFree(0), 1, 4, 3, 8).unwrap();
        target[4] = target[4].add(&char_weyl(5).unwrap());
        let report =
            verify_target(Scenario::SGr, &params(4, 3, 1), &target, &crate::summand_catalog::catalog_s_gr(4, 3, 1).unwrap(), DEFAULT_BUDGET).unwrap();
        assert!(!report.consistent);
        assert_eq!(report.failure, Some(Failure { degree: 4, weight: 5 }));
    }

    #[test]
    fn forced_k_summand_with_twist() {
        // Two copies of K(1,1) at twist 1 plus a free module are only explained with K.
        let free = summand_graded_character(SummandKind::TiltFree(0), 1, 4, 3, 14).unwrap();
        let k = summand_graded_character(SummandKind::K(1, 1), 1, 4, 3, 14).unwrap();
        let target: Vec<_> =
            (0..=14).map(|d| if d >= 10 { free[d].add(&k[d - 1].scale(2)) } else { free[d].clone() }).collect();
        let report =
            verify_target(Scenario::SGr, &params(4, 3, 1), &target, &crate::summand_catalog::catalog_s_gr(4, 3, 1).unwrap(), DEFAULT_BUDGET).unwrap();
        assert!(report.consistent);
        let e = report.entry(SummandKind::K(1, 1)).unwrap();
        assert_eq!(e.status, EntryStatus::Confirmed { at: 13 });
    }
}
