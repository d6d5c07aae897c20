//! Transition cocycles of torus bundles over a combinatorial cover.
//!
//! A base is described only by the nerve of a good cover: chart names, the
//! overlapping pairs and the triple overlaps. A [`Cocycle`] assigns an integer
//! affine map `x ↦ Lx + t` (with `L ∈ GL(m, ℤ)`) to each ordered overlap. The
//! three constructions used on such bundles live here as well:
//! [`lattice_cover`], [`stabilize_odd`] and [`orientation_double_cover`].

mod matrix;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::charclass::PontryaginData;
use crate::rational::{self, Rational, RationalText};

pub use matrix::{IntMatrix, MatrixError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CocycleError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("linear part has determinant {0}, expected ±1")]
    NotUnimodular(i64),
    #[error("translation has {got} entries, expected {expected}")]
    TranslationLength { expected: usize, got: usize },
    #[error("matrix side {0} is odd; no standard symplectic form")]
    OddSide(usize),
    #[error("unknown chart {0:?}")]
    UnknownChart(String),
    #[error("chart {0:?} listed twice")]
    DuplicateChart(String),
    #[error("chart index {0} out of range")]
    ChartIndex(usize),
    #[error("overlap of chart {0:?} with itself")]
    SelfOverlap(String),
    #[error("triple {0:?} has a pair that is not an overlap")]
    TripleWithoutOverlap([String; 3]),
    #[error("no transition map for overlap {0}|{1}")]
    MissingTransition(String, String),
    #[error("transition given for {0}|{1}, which is not an overlap of the nerve")]
    NotAnOverlap(String, String),
    #[error("transition {pair} has rank {got}, expected {expected}")]
    RankMismatch { pair: String, expected: usize, got: usize },
    #[error("transition key {0:?} is not of the form \"A|B\"")]
    BadPairKey(String),
    #[error("lattice scale must be at least 1")]
    BadScale,
    #[error("lattice covers are only built for linear cocycles; {0} has a translation part")]
    TranslationsUnsupported(String),
    #[error("cocycle fails validation: {0}")]
    Invalid(String),
    #[error("fiber rank {0} is even; odd-rank stabilization does not apply")]
    EvenRank(usize),
    #[error("transition {pair} is not of the form S ⊕ (±1) with S symplectic: {reason}")]
    BlockStructure { pair: String, reason: String },
    #[error("covering degree overflows")]
    DegreeOverflow,
    #[error(transparent)]
    Rational(#[from] rational::ParseRationalError),
}

pub type Result<T> = std::result::Result<T, CocycleError>;

/// `x ↦ linear·x + translation` on `ℝ^m`, with `det(linear) = ±1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntAffineMap {
    linear: IntMatrix,
    translation: Vec<Rational>,
}

impl IntAffineMap {
    pub fn new(linear: IntMatrix, translation: Vec<Rational>) -> Result<Self> {
        let det = linear.det()?;
        if det.abs() != 1 {
            return Err(CocycleError::NotUnimodular(det));
        }
        if translation.len() != linear.size() {
            return Err(CocycleError::TranslationLength {
                expected: linear.size(),
                got: translation.len(),
            });
        }
        Ok(IntAffineMap {
            linear,
            translation,
        })
    }

    pub fn linear(linear: IntMatrix) -> Result<Self> {
        let n = linear.size();
        Self::new(linear, vec![Rational::zero(); n])
    }

    pub fn identity(m: usize) -> Self {
        IntAffineMap {
            linear: IntMatrix::identity(m),
            translation: vec![Rational::zero(); m],
        }
    }

    pub fn rank(&self) -> usize {
        self.linear.size()
    }

    pub fn linear_part(&self) -> &IntMatrix {
        &self.linear
    }

    pub fn translation(&self) -> &[Rational] {
        &self.translation
    }

    pub fn has_translation(&self) -> bool {
        self.translation.iter().any(|t| !t.is_zero())
    }

    pub fn det(&self) -> i64 {
        self.linear.det().expect("unimodular by construction")
    }

    fn apply_linear(m: &IntMatrix, v: &[Rational]) -> Vec<Rational> {
        (0..m.size())
            .map(|i| {
                (0..m.size())
                    .map(|j| rational::int(m.get(i, j)) * &v[j])
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        let linear = self.linear.mul(&first.linear)?;
        let translation = Self::apply_linear(&self.linear, &first.translation)
            .into_iter()
            .zip(&self.translation)
            .map(|(a, b)| a + b)
            .collect();
        Ok(IntAffineMap {
            linear,
            translation,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        let linear = self.linear.inverse_unimodular()?;
        let translation = Self::apply_linear(&linear, &self.translation)
            .into_iter()
            .map(|t| -t)
            .collect();
        Ok(IntAffineMap {
            linear,
            translation,
        })
    }

    /// Equality of linear parts, and of translations modulo `modulus·ℤ^m`
    /// (exactly when `modulus` is `None`). Returns `(linear_ok, translation_ok)`.
    fn compare(&self, other: &Self, modulus: Option<&BigInt>) -> (bool, bool) {
        let linear_ok = self.linear == other.linear;
        let translation_ok = self
            .translation
            .iter()
            .zip(&other.translation)
            .all(|(a, b)| match modulus {
                None => a == b,
                Some(m) => rational::is_multiple_of(&(a - b), m),
            });
        (linear_ok, translation_ok)
    }
}

/// `MᵀJM = J` for the standard alternating form on paired coordinates.
pub fn is_symplectic(m: &IntMatrix) -> Result<bool> {
    if !m.size().is_multiple_of(2) {
        return Err(CocycleError::OddSide(m.size()));
    }
    let j = IntMatrix::standard_j(m.size() / 2);
    Ok(m.transpose().mul(&j)?.mul(m)? == j)
}

/// Combinatorial nerve of a cover: charts, overlapping pairs (stored in both
/// orders) and triple overlaps (stored with ascending chart indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverNerve {
    charts: Vec<String>,
    pairs: BTreeSet<(usize, usize)>,
    triples: BTreeSet<[usize; 3]>,
}

impl CoverNerve {
    pub fn new(
        charts: Vec<String>,
        overlaps: impl IntoIterator<Item = (usize, usize)>,
        triples: impl IntoIterator<Item = [usize; 3]>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &charts {
            if !seen.insert(c.as_str()) {
                return Err(CocycleError::DuplicateChart(c.clone()));
            }
        }
        let n = charts.len();
        let mut pairs = BTreeSet::new();
        for (a, b) in overlaps {
            if a >= n || b >= n {
                return Err(CocycleError::ChartIndex(a.max(b)));
            }
            if a == b {
                return Err(CocycleError::SelfOverlap(charts[a].clone()));
            }
            pairs.insert((a, b));
            pairs.insert((b, a));
        }
        let mut triple_set = BTreeSet::new();
        for t in triples {
            let mut t = t;
            t.sort_unstable();
            if t[2] >= n {
                return Err(CocycleError::ChartIndex(t[2]));
            }
            let named = || t.map(|i| charts[i].clone());
            if t[0] == t[1] || t[1] == t[2] {
                return Err(CocycleError::TripleWithoutOverlap(named()));
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                if !pairs.contains(&(a, b)) {
                    return Err(CocycleError::TripleWithoutOverlap(named()));
                }
            }
            triple_set.insert(t);
        }
        Ok(CoverNerve {
            charts,
            pairs,
            triples: triple_set,
        })
    }

    /// Nerve whose triples are all triangles of the overlap graph.
    pub fn with_all_triangles(charts: Vec<String>, overlaps: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let base = Self::new(charts, overlaps, [])?;
        let n = base.charts.len();
        let mut triples = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if base.overlaps(a, b) && base.overlaps(b, c) && base.overlaps(a, c) {
                        triples.push([a, b, c]);
                    }
                }
            }
        }
        let pairs: Vec<_> = base.pairs.iter().copied().collect();
        Self::new(base.charts, pairs, triples)
    }

    pub fn single(chart: impl Into<String>) -> Self {
        CoverNerve {
            charts: vec![chart.into()],
            pairs: BTreeSet::new(),
            triples: BTreeSet::new(),
        }
    }

    pub fn charts(&self) -> &[String] {
        &self.charts
    }

    pub fn chart_index(&self, name: &str) -> Result<usize> {
        self.charts
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CocycleError::UnknownChart(name.to_owned()))
    }

    pub fn overlaps(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a, b))
    }

    /// Ordered overlapping pairs, both orders present.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn triples(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.triples.iter().copied()
    }

    fn pair_name(&self, a: usize, b: usize) -> String {
        format!("{}|{}", self.charts[a], self.charts[b])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    nerve: CoverNerve,
    rank: usize,
    maps: BTreeMap<(usize, usize), IntAffineMap>,
    lattice_scale: u64,
}

impl Cocycle {
    /// Builds a cocycle from transition maps on ordered overlaps. When only
    /// one direction of an overlap is given, the other is its inverse.
    pub fn new(
        nerve: CoverNerve,
        rank: usize,
        maps: BTreeMap<(usize, usize), IntAffineMap>,
        lattice_scale: u64,
    ) -> Result<Self> {
        if lattice_scale == 0 {
            return Err(CocycleError::BadScale);
        }
        let mut full = BTreeMap::new();
        for ((a, b), g) in maps {
            if !nerve.overlaps(a, b) {
                if a < nerve.charts.len() && b < nerve.charts.len() {
                    return Err(CocycleError::NotAnOverlap(
                        nerve.charts[a].clone(),
                        nerve.charts[b].clone(),
                    ));
                }
                return Err(CocycleError::ChartIndex(a.max(b)));
            }
            if g.rank() != rank {
                return Err(CocycleError::RankMismatch {
                    pair: nerve.pair_name(a, b),
                    expected: rank,
                    got: g.rank(),
                });
            }
            full.insert((a, b), g);
        }
        for (a, b) in nerve.pairs() {
            if full.contains_key(&(a, b)) {
                continue;
            }
            let reverse = full.get(&(b, a)).ok_or_else(|| {
                CocycleError::MissingTransition(nerve.charts[a].clone(), nerve.charts[b].clone())
            })?;
            let inv = reverse.inverse()?;
            full.insert((a, b), inv);
        }
        Ok(Cocycle {
            nerve,
            rank,
            maps: full,
            lattice_scale,
        })
    }

    /// The coboundary `g_αβ = h_β ∘ h_α⁻¹` of chart maps `h`.
    pub fn coboundary(nerve: CoverNerve, chart_maps: &[IntAffineMap]) -> Result<Self> {
        if chart_maps.len() != nerve.charts.len() {
            return Err(CocycleError::ChartIndex(chart_maps.len()));
        }
        let rank = chart_maps.first().map_or(0, IntAffineMap::rank);
        let inverses = chart_maps
            .iter()
            .map(IntAffineMap::inverse)
            .collect::<Result<Vec<_>>>()?;
        let mut maps = BTreeMap::new();
        for (a, b) in nerve.pairs() {
            maps.insert((a, b), chart_maps[b].after(&inverses[a])?);
        }
        Self::new(nerve, rank, maps, 1)
    }

    /// Cocycle with every transition equal to the identity.
    pub fn trivial(nerve: CoverNerve, rank: usize) -> Self {
        let maps = nerve
            .pairs()
            .map(|p| (p, IntAffineMap::identity(rank)))
            .collect();
        Cocycle {
            nerve,
            rank,
            maps,
            lattice_scale: 1,
        }
    }

    pub fn nerve(&self) -> &CoverNerve {
        &self.nerve
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn lattice_scale(&self) -> u64 {
        self.lattice_scale
    }

    pub fn transition(&self, a: usize, b: usize) -> Option<&IntAffineMap> {
        self.maps.get(&(a, b))
    }

    pub fn transition_by_name(&self, a: &str, b: &str) -> Result<&IntAffineMap> {
        let (ia, ib) = (self.nerve.chart_index(a)?, self.nerve.chart_index(b)?);
        self.maps
            .get(&(ia, ib))
            .ok_or_else(|| CocycleError::MissingTransition(a.to_owned(), b.to_owned()))
    }

    pub fn transitions(&self) -> impl Iterator<Item = ((usize, usize), &IntAffineMap)> {
        self.maps.iter().map(|(k, v)| (*k, v))
    }

    /// Replaces `g_ab` by `map` and `g_ba` by its inverse.
    pub fn set_transition(&mut self, a: usize, b: usize, map: IntAffineMap) -> Result<()> {
        if !self.nerve.overlaps(a, b) {
            return Err(CocycleError::ChartIndex(a.max(b)));
        }
        if map.rank() != self.rank {
            return Err(CocycleError::RankMismatch {
                pair: self.nerve.pair_name(a, b),
                expected: self.rank,
                got: map.rank(),
            });
        }
        let inv = map.inverse()?;
        self.maps.insert((a, b), map);
        self.maps.insert((b, a), inv);
        Ok(())
    }

    pub fn has_translations(&self) -> bool {
        self.maps.values().any(IntAffineMap::has_translation)
    }

    pub fn all_linear_parts(&self) -> impl Iterator<Item = &IntMatrix> {
        self.maps.values().map(IntAffineMap::linear_part)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleFailure {
    pub charts: [String; 3],
    pub linear_fails: bool,
    pub translation_fails: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub modulo_lattice: bool,
    pub lattice_scale: u64,
    pub triples_checked: usize,
    pub failing_triples: Vec<TripleFailure>,
    /// Overlaps whose two directions are not mutually inverse.
    pub inverse_failures: Vec<[String; 2]>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failing_triples.is_empty() && self.inverse_failures.is_empty()
    }

    /// Failing triples as sorted name triples, for order-free comparison.
    pub fn failing_sets(&self) -> BTreeSet<[String; 3]> {
        self.failing_triples
            .iter()
            .map(|f| {
                let mut c = f.charts.clone();
                c.sort();
                c
            })
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid ({} triples checked)", self.triples_checked);
        }
        let mut parts: Vec<String> = self
            .failing_triples
            .iter()
            .map(|t| format!("triple {}", t.charts.join(",")))
            .collect();
        parts.extend(self.inverse_failures.iter().map(|p| format!("inverse {}|{}", p[0], p[1])));
        write!(f, "invalid: {}", parts.join("; "))
    }
}

/// Checks `g_βγ ∘ g_αβ = g_αγ` on every triple and `g_βα = g_αβ⁻¹` on every
/// overlap. Linear parts always compose exactly; translations compose exactly
/// unless `modulo_lattice`, in which case they are compared modulo the fiber
/// period lattice `lattice_scale·ℤ^m`.
pub fn validate_cocycle(c: &Cocycle, modulo_lattice: bool) -> Result<ValidationReport> {
    let modulus = BigInt::from(c.lattice_scale);
    let modulus = modulo_lattice.then_some(&modulus);
    let names = &c.nerve.charts;
    let get = |a: usize, b: usize| {
        c.maps
            .get(&(a, b))
            .ok_or_else(|| CocycleError::MissingTransition(names[a].clone(), names[b].clone()))
    };

    let mut inverse_failures = Vec::new();
    for (a, b) in c.nerve.pairs().filter(|(a, b)| a < b) {
        let round_trip = get(b, a)?.after(get(a, b)?)?;
        let (lin, tr) = round_trip.compare(&IntAffineMap::identity(c.rank), modulus);
        if !(lin && tr) {
            inverse_failures.push([names[a].clone(), names[b].clone()]);
        }
    }

    let mut failing_triples = Vec::new();
    let mut checked = 0;
    for [a, b, g] in c.nerve.triples() {
        checked += 1;
        let composed = get(b, g)?.after(get(a, b)?)?;
        let (lin, tr) = composed.compare(get(a, g)?, modulus);
        if !(lin && tr) {
            failing_triples.push(TripleFailure {
                charts: [names[a].clone(), names[b].clone(), names[g].clone()],
                linear_fails: !lin,
                translation_fails: !tr,
            });
        }
    }
    Ok(ValidationReport {
        modulo_lattice,
        lattice_scale: c.lattice_scale,
        triples_checked: checked,
        failing_triples,
        inverse_failures,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeCover {
    pub cocycle: Cocycle,
    /// Degree `n^m` of the cover over the input bundle.
    pub degree: u128,
}

/// Replaces the fiber lattice `Λ` by `nΛ`. The transition maps are unchanged:
/// a linear map fixing `0` lifts uniquely to the cover, so the cocycle
/// identity continues to hold on the nose.
pub fn lattice_cover(c: &Cocycle, n: u64) -> Result<LatticeCover> {
    if n == 0 {
        return Err(CocycleError::BadScale);
    }
    if let Some(((a, b), _)) = c.maps.iter().find(|(_, g)| g.has_translation()) {
        return Err(CocycleError::TranslationsUnsupported(c.nerve.pair_name(*a, *b)));
    }
    let report = validate_cocycle(c, false)?;
    if !report.is_valid() {
        return Err(CocycleError::Invalid(report.to_string()));
    }
    let degree = u128::from(n)
        .checked_pow(u32::try_from(c.rank).map_err(|_| CocycleError::DegreeOverflow)?)
        .ok_or(CocycleError::DegreeOverflow)?;
    let lattice_scale = c.lattice_scale.checked_mul(n).ok_or(CocycleError::DegreeOverflow)?;
    let cover = Cocycle {
        lattice_scale,
        ..c.clone()
    };
    let post = validate_cocycle(&cover, false)?;
    if !post.is_valid() {
        return Err(CocycleError::Invalid(format!("lifted cocycle: {post}")));
    }
    Ok(LatticeCover {
        cocycle: cover,
        degree,
    })
}

/// Splits a rank-`m` linear part as `S ⊕ (ε)` with `S` in the leading block.
fn split_last(g: &IntMatrix) -> std::result::Result<(IntMatrix, i64), String> {
    let m = g.size();
    let last = m - 1;
    for i in 0..last {
        if g.get(i, last) != 0 || g.get(last, i) != 0 {
            return Err("last coordinate is coupled to the others".into());
        }
    }
    let eps = g.get(last, last);
    if eps.abs() != 1 {
        return Err(format!("last diagonal entry {eps} is not ±1"));
    }
    let s = g.leading_block(last);
    match is_symplectic(&s) {
        Ok(true) => Ok((s, eps)),
        Ok(false) => Err("leading block is not symplectic".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Odd rank `m` with transitions `S ⊕ (ε)`, `S ∈ Sp(m−1, ℤ)`, becomes rank
/// `m + 1` with transitions `S ⊕ diag(ε, ε)` by adding a circle factor that
/// copies the sign of the last one.
pub fn stabilize_odd(c: &Cocycle) -> Result<Cocycle> {
    if c.rank.is_multiple_of(2) {
        return Err(CocycleError::EvenRank(c.rank));
    }
    let mut maps = BTreeMap::new();
    for (&(a, b), g) in &c.maps {
        let (s, eps) = split_last(g.linear_part()).map_err(|reason| CocycleError::BlockStructure {
            pair: c.nerve.pair_name(a, b),
            reason,
        })?;
        let linear = s.direct_sum(&IntMatrix::diagonal(&[eps, eps]));
        let mut translation = g.translation.clone();
        translation.push(Rational::zero());
        maps.insert(
            (a, b),
            IntAffineMap {
                linear,
                translation,
            },
        );
    }
    Ok(Cocycle {
        nerve: c.nerve.clone(),
        rank: c.rank + 1,
        maps,
        lattice_scale: c.lattice_scale,
    })
}

/// Pulls the bundle back to the double cover of the base on which the fiber
/// orientation character `det(g_αβ)` becomes trivial, and re-trivializes the
/// charts of the second sheet by a reflection so that every transition has
/// determinant `+1`.
///
/// Charts of the cover are `(α, s)` for `s = ±1`, named `α+` and `α-`; the
/// overlap `α|β` lifts to `(α,s)|(β, s·det g_αβ)`. The base characteristic
/// numbers double. Already-oriented cocycles are returned unchanged.
pub fn orientation_double_cover(c: &Cocycle, base: &PontryaginData) -> Result<(Cocycle, PontryaginData)> {
    let report = validate_cocycle(c, true)?;
    if !report.is_valid() {
        return Err(CocycleError::Invalid(report.to_string()));
    }
    if c.maps.values().all(|g| g.det() == 1) {
        return Ok((c.clone(), base.clone()));
    }
    let n = c.nerve.charts.len();
    let det = |a: usize, b: usize| c.maps[&(a, b)].det();
    // sheet index: chart α, sign s ↦ 2α + (s == -1)
    let lift = |a: usize, s: i64| 2 * a + usize::from(s < 0);
    let charts: Vec<String> = c
        .nerve
        .charts
        .iter()
        .flat_map(|name| [format!("{name}+"), format!("{name}-")])
        .collect();
    let mut overlaps = Vec::new();
    for (a, b) in c.nerve.pairs() {
        for s in [1, -1] {
            overlaps.push((lift(a, s), lift(b, s * det(a, b))));
        }
    }
    let mut triples = Vec::new();
    for [a, b, g] in c.nerve.triples() {
        for s in [1, -1] {
            triples.push([lift(a, s), lift(b, s * det(a, b)), lift(g, s * det(a, g))]);
        }
    }
    let nerve = CoverNerve::new(charts, overlaps, triples)?;

    let mut reflection = IntMatrix::identity(c.rank);
    if c.rank > 0 {
        reflection.set(0, 0, -1);
    }
    let reflect = IntAffineMap::linear(reflection)?;
    let gauge = |s: i64| if s < 0 { reflect.clone() } else { IntAffineMap::identity(c.rank) };
    let mut maps = BTreeMap::new();
    for (a, b) in c.nerve.pairs() {
        for s in [1, -1] {
            let t = s * det(a, b);
            // R^t ∘ g ∘ R^s, with R = R⁻¹
            let g = gauge(t).after(&c.maps[&(a, b)].after(&gauge(s))?)?;
            debug_assert_eq!(g.det(), 1);
            maps.insert((lift(a, s), lift(b, t)), g);
        }
    }
    debug_assert_eq!(nerve.charts.len(), 2 * n);
    let cover = Cocycle::new(nerve, c.rank, maps, c.lattice_scale)?;
    Ok((cover, base.scaled(2)))
}

/// File form of a cocycle: chart list, transitions keyed `"A|B"`, optional
/// explicit triples (all triangles of the overlap graph otherwise) and an
/// optional lattice scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleFile {
    pub charts: Vec<String>,
    pub transitions: BTreeMap<String, TransitionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triples: Option<Vec<[String; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_scale: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionFile {
    pub linear: IntMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<RationalText>>,
}

impl CocycleFile {
    /// Converts to a cocycle of the given fiber rank.
    pub fn to_cocycle(&self, rank: usize) -> Result<Cocycle> {
        let index = |name: &str| {
            self.charts
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| CocycleError::UnknownChart(name.to_owned()))
        };
        let mut overlaps = Vec::new();
        let mut maps = BTreeMap::new();
        for (key, t) in &self.transitions {
            let (a, b) = key
                .split_once('|')
                .ok_or_else(|| CocycleError::BadPairKey(key.clone()))?;
            let (a, b) = (index(a.trim())?, index(b.trim())?);
            if a == b {
                return Err(CocycleError::SelfOverlap(self.charts[a].clone()));
            }
            if t.linear.size() != rank {
                return Err(CocycleError::RankMismatch {
                    pair: key.clone(),
                    expected: rank,
                    got: t.linear.size(),
                });
            }
            let translation = match &t.translation {
                Some(v) => v.iter().map(|q| q.0.clone()).collect(),
                None => vec![Rational::zero(); rank],
            };
            overlaps.push((a, b));
            maps.insert((a, b), IntAffineMap::new(t.linear.clone(), translation)?);
        }
        let nerve = match &self.triples {
            None => CoverNerve::with_all_triangles(self.charts.clone(), overlaps)?,
            Some(ts) => {
                let mut idx = Vec::with_capacity(ts.len());
                for t in ts {
                    idx.push([index(&t[0])?, index(&t[1])?, index(&t[2])?]);
                }
                CoverNerve::new(self.charts.clone(), overlaps, idx)?
            }
        };
        Cocycle::new(nerve, rank, maps, self.lattice_scale.unwrap_or(1))
    }

    /// One transition per overlap (lower chart index first), explicit triples.
    pub fn from_cocycle(c: &Cocycle) -> Self {
        let names = &c.nerve.charts;
        let transitions = c
            .maps
            .iter()
            .filter(|((a, b), _)| a < b)
            .map(|(&(a, b), g)| {
                let translation = g
                    .has_translation()
                    .then(|| g.translation.iter().cloned().map(RationalText).collect());
                (
                    c.nerve.pair_name(a, b),
                    TransitionFile {
                        linear: g.linear.clone(),
                        translation,
                    },
                )
            })
            .collect();
        let triples = c
            .nerve
            .triples()
            .map(|t| t.map(|i| names[i].clone()))
            .collect();
        CocycleFile {
            charts: names.clone(),
            transitions,
            triples: Some(triples),
            lattice_scale: (c.lattice_scale != 1).then_some(c.lattice_scale),
        }
    }
}

/// Translations reduced to `[0, lattice_scale)`, for display.
pub fn reduced_translation(g: &IntAffineMap, lattice_scale: u64) -> Vec<Rational> {
    let m = BigInt::from(lattice_scale);
    g.translation
        .iter()
        .map(|t| rational::reduce_mod(t, &m))
        .collect()
}

impl Cocycle {
    /// Whether every linear part is the identity.
    pub fn is_trivial_linear(&self) -> bool {
        self.maps.values().all(|g| g.linear.is_identity())
    }

    /// Whether every transition has determinant `+1`.
    pub fn is_orientable(&self) -> bool {
        self.maps.values().all(|g| g.det() == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("U{i}")).collect()
    }

    fn complete(n: usize) -> CoverNerve {
        let pairs: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        CoverNerve::with_all_triangles(names(n), pairs).unwrap()
    }

    fn lin(rows: &[&[i64]]) -> IntAffineMap {
        IntAffineMap::linear(m(rows)).unwrap()
    }

    #[test]
    fn symplectic_examples() {
        assert!(is_symplectic(&IntMatrix::identity(4)).unwrap());
        assert!(is_symplectic(&IntMatrix::standard_j(2)).unwrap());
        assert!(!is_symplectic(&m(&[&[2, 0], &[0, 1]])).unwrap());
        assert!(is_symplectic(&m(&[&[1, 1], &[0, 1]])).unwrap());
        assert!(matches!(
            is_symplectic(&IntMatrix::identity(3)),
            Err(CocycleError::OddSide(3))
        ));
    }

    #[test]
    fn affine_map_requires_unimodular() {
        assert!(matches!(
            IntAffineMap::linear(m(&[&[2, 0], &[0, 1]])),
            Err(CocycleError::NotUnimodular(2))
        ));
        assert!(matches!(
            IntAffineMap::new(IntMatrix::identity(2), vec![int(0)]),
            Err(CocycleError::TranslationLength { .. })
        ));
    }

    #[test]
    fn affine_inverse_and_composition() {
        let g = IntAffineMap::new(m(&[&[1, 1], &[0, 1]]), vec![ratio(1, 2), ratio(1, 3)]).unwrap();
        let id = g.inverse().unwrap().after(&g).unwrap();
        assert_eq!(id, IntAffineMap::identity(2));
    }

    #[test]
    fn single_chart_is_valid() {
        let c = Cocycle::trivial(CoverNerve::single("U"), 2);
        let r = validate_cocycle(&c, false).unwrap();
        assert!(r.is_valid());
        assert_eq!(r.triples_checked, 0);
    }

    #[test]
    fn perturbation_names_triples_of_the_edge() {
        let nerve = complete(4);
        let h: Vec<IntAffineMap> = vec![
            lin(&[&[1, 0], &[0, 1]]),
            lin(&[&[1, 1], &[0, 1]]),
            lin(&[&[0, 1], &[-1, 0]]),
            lin(&[&[2, 1], &[1, 1]]),
        ];
        let mut c = Cocycle::coboundary(nerve, &h).unwrap();
        assert!(validate_cocycle(&c, false).unwrap().is_valid());
        let g = c.transition(1, 2).unwrap().clone();
        c.set_transition(1, 2, g.after(&lin(&[&[1, 1], &[0, 1]])).unwrap()).unwrap();
        let r = validate_cocycle(&c, false).unwrap();
        let expected: BTreeSet<[String; 3]> = [
            ["U0".to_string(), "U1".into(), "U2".into()],
            ["U1".to_string(), "U2".into(), "U3".into()],
        ]
        .into();
        assert_eq!(r.failing_sets(), expected);
        assert!(r.inverse_failures.is_empty());
        assert!(r.failing_triples.iter().all(|t| t.linear_fails));
    }

    #[test]
    fn inconsistent_directions_are_reported() {
        let nerve = complete(2);
        let maps = [
            ((0, 1), lin(&[&[1, 1], &[0, 1]])),
            ((1, 0), lin(&[&[1, 1], &[0, 1]])),
        ]
        .into();
        let c = Cocycle::new(nerve, 2, maps, 1).unwrap();
        let r = validate_cocycle(&c, false).unwrap();
        assert_eq!(r.inverse_failures, vec![["U0".to_string(), "U1".to_string()]]);
    }

    #[test]
    fn missing_transition_is_an_input_error() {
        let nerve = complete(3);
        let maps = [((0, 1), IntAffineMap::identity(2)), ((1, 2), IntAffineMap::identity(2))].into();
        assert!(matches!(
            Cocycle::new(nerve, 2, maps, 1),
            Err(CocycleError::MissingTransition(..))
        ));
    }

    #[test]
    fn translations_modulo_lattice() {
        // g_12 ∘ g_01 translates by 1 while g_02 translates by 0: equal mod ℤ
        // only, and not modulo the period lattice 2ℤ of a scale-2 cover
        let nerve = complete(3);
        let t = |x: Rational| IntAffineMap::new(IntMatrix::identity(1), vec![x]).unwrap();
        let maps = [((0, 1), t(int(1))), ((1, 2), t(int(0))), ((0, 2), t(int(0)))].into();
        let c = Cocycle::new(nerve, 1, maps, 1).unwrap();
        assert!(!validate_cocycle(&c, false).unwrap().is_valid());
        let r = validate_cocycle(&c, true).unwrap();
        assert!(r.is_valid(), "{r}");

        let c2 = Cocycle { lattice_scale: 2, ..c };
        let r2 = validate_cocycle(&c2, true).unwrap();
        assert!(!r2.is_valid());
        assert!(r2.failing_triples[0].translation_fails);
        assert!(!r2.failing_triples[0].linear_fails);
    }

    #[test]
    fn lattice_cover_scales() {
        let nerve = complete(3);
        let h = vec![lin(&[&[1, 0], &[0, 1]]), lin(&[&[1, 2], &[0, 1]]), lin(&[&[0, -1], &[1, 0]])];
        let c = Cocycle::coboundary(nerve, &h).unwrap();
        let one = lattice_cover(&c, 1).unwrap();
        assert_eq!(one.cocycle, c);
        assert_eq!(one.degree, 1);
        let three = lattice_cover(&c, 3).unwrap();
        assert_eq!(three.degree, 9);
        assert_eq!(three.cocycle.lattice_scale(), 3);
        assert_eq!(three.cocycle.maps, c.maps);
        let composed = lattice_cover(&lattice_cover(&c, 2).unwrap().cocycle, 5).unwrap();
        assert_eq!(composed.cocycle, lattice_cover(&c, 10).unwrap().cocycle);
        assert!(matches!(lattice_cover(&c, 0), Err(CocycleError::BadScale)));
    }

    #[test]
    fn lattice_cover_refuses_translations_and_invalid() {
        let nerve = complete(2);
        let maps = [((0, 1), IntAffineMap::new(IntMatrix::identity(2), vec![ratio(1, 2), int(0)]).unwrap())].into();
        let c = Cocycle::new(nerve, 2, maps, 1).unwrap();
        assert!(matches!(lattice_cover(&c, 2), Err(CocycleError::TranslationsUnsupported(_))));

        let mut bad = Cocycle::trivial(complete(3), 2);
        bad.set_transition(0, 1, lin(&[&[1, 1], &[0, 1]])).unwrap();
        assert!(matches!(lattice_cover(&bad, 2), Err(CocycleError::Invalid(_))));
    }

    #[test]
    fn stabilize_rank_one() {
        let nerve = complete(2);
        let trivial = Cocycle::trivial(nerve.clone(), 1);
        let s = stabilize_odd(&trivial).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(s.is_trivial_linear());

        let flip = Cocycle::new(nerve, 1, [((0, 1), lin(&[&[-1]]))].into(), 1).unwrap();
        let s = stabilize_odd(&flip).unwrap();
        let g = s.transition(0, 1).unwrap().linear_part();
        assert_eq!(*g, IntMatrix::diagonal(&[-1, -1]));
        assert!(is_symplectic(g).unwrap());
    }

    #[test]
    fn stabilize_rank_three() {
        let nerve = complete(2);
        let g = m(&[&[1, 1], &[0, 1]]).direct_sum(&IntMatrix::diagonal(&[-1]));
        let c = Cocycle::new(nerve, 3, [((0, 1), IntAffineMap::linear(g).unwrap())].into(), 1).unwrap();
        let s = stabilize_odd(&c).unwrap();
        let out = s.transition(0, 1).unwrap().linear_part();
        assert_eq!(*out, m(&[&[1, 1], &[0, 1]]).direct_sum(&IntMatrix::diagonal(&[-1, -1])));
        assert!(s.all_linear_parts().all(|g| is_symplectic(g).unwrap()));
    }

    #[test]
    fn stabilize_rejects_bad_blocks() {
        let nerve = complete(2);
        let coupled = m(&[&[1, 0, 1], &[0, 1, 0], &[0, 0, 1]]);
        let c = Cocycle::new(nerve.clone(), 3, [((0, 1), IntAffineMap::linear(coupled).unwrap())].into(), 1).unwrap();
        assert!(matches!(stabilize_odd(&c), Err(CocycleError::BlockStructure { .. })));
        let swap = m(&[&[0, 1], &[1, 0]]).direct_sum(&IntMatrix::identity(1));
        let c = Cocycle::new(nerve, 3, [((0, 1), IntAffineMap::linear(swap).unwrap())].into(), 1).unwrap();
        assert!(matches!(stabilize_odd(&c), Err(CocycleError::BlockStructure { .. })));
        assert!(matches!(
            stabilize_odd(&Cocycle::trivial(complete(2), 2)),
            Err(CocycleError::EvenRank(2))
        ));
    }

    fn k3() -> PontryaginData {
        "4:spin:p1=-48".parse().unwrap()
    }

    #[test]
    fn double_cover_of_oriented_is_identity() {
        let c = Cocycle::trivial(complete(3), 2);
        let (cover, base) = orientation_double_cover(&c, &k3()).unwrap();
        assert_eq!(cover, c);
        assert_eq!(base, k3());
    }

    #[test]
    fn double_cover_two_charts() {
        let c = Cocycle::new(complete(2), 2, [((0, 1), lin(&[&[0, 1], &[1, 0]]))].into(), 1).unwrap();
        let (cover, base) = orientation_double_cover(&c, &k3()).unwrap();
        assert_eq!(cover.nerve().charts().len(), 4);
        assert!(cover.is_orientable());
        assert!(validate_cocycle(&cover, false).unwrap().is_valid());
        assert_eq!(
            crate::charclass::ahat_genus(&base).unwrap().value,
            int(4)
        );
        let i = |n: &str| cover.nerve().chart_index(n).unwrap();
        assert!(cover.nerve().overlaps(i("U0+"), i("U1-")));
        assert!(cover.nerve().overlaps(i("U0-"), i("U1+")));
        assert!(!cover.nerve().overlaps(i("U0+"), i("U1+")));
        // idempotent
        let (again, base2) = orientation_double_cover(&cover, &base).unwrap();
        assert_eq!(again, cover);
        assert_eq!(base2, base);
    }

    #[test]
    fn double_cover_with_triples() {
        // three charts, reflection on two edges: det cocycle is consistent
        let r = lin(&[&[-1, 0], &[0, 1]]);
        let mut c = Cocycle::trivial(complete(3), 2);
        c.set_transition(0, 1, r.clone()).unwrap();
        c.set_transition(0, 2, r.after(&lin(&[&[1, 1], &[0, 1]])).unwrap()).unwrap();
        c.set_transition(1, 2, lin(&[&[1, -1], &[0, 1]])).unwrap();
        // make it a cocycle: g_12 = g_02 ∘ g_01⁻¹
        let g12 = c.transition(0, 2).unwrap().after(&c.transition(1, 0).unwrap().clone()).unwrap();
        c.set_transition(1, 2, g12).unwrap();
        assert!(validate_cocycle(&c, false).unwrap().is_valid());
        let (cover, _) = orientation_double_cover(&c, &k3()).unwrap();
        assert!(cover.is_orientable());
        assert_eq!(cover.nerve().triples().count(), 2);
        assert!(validate_cocycle(&cover, false).unwrap().is_valid());
    }

    #[test]
    fn double_cover_rejects_invalid() {
        let mut c = Cocycle::trivial(complete(3), 2);
        c.set_transition(0, 1, lin(&[&[0, 1], &[1, 0]])).unwrap();
        assert!(matches!(
            orientation_double_cover(&c, &k3()),
            Err(CocycleError::Invalid(_))
        ));
    }

    #[test]
    fn file_roundtrip() {
        let json = r#"{
            "charts": ["A", "B", "C"],
            "transitions": {
                "A|B": {"linear": [[1,1],[0,1]]},
                "B|C": {"linear": [[1,0],[0,1]], "translation": ["1/2", 0]},
                "A|C": {"linear": [[1,1],[0,1]], "translation": ["1/2", "0"]}
            }
        }"#;
        let f: CocycleFile = serde_json::from_str(json).unwrap();
        let c = f.to_cocycle(2).unwrap();
        assert_eq!(c.nerve().triples().count(), 1);
        assert!(validate_cocycle(&c, false).unwrap().is_valid());
        let back = CocycleFile::from_cocycle(&c).to_cocycle(2).unwrap();
        assert_eq!(back, c);
        assert_eq!(reduced_translation(c.transition_by_name("C", "B").unwrap(), 1), vec![ratio(1, 2), int(0)]);
    }

    #[test]
    fn file_errors() {
        let bad_key: CocycleFile =
            serde_json::from_str(r#"{"charts":["A","B"],"transitions":{"AB":{"linear":[[1]]}}}"#).unwrap();
        assert!(matches!(bad_key.to_cocycle(1), Err(CocycleError::BadPairKey(_))));
        let unknown: CocycleFile =
            serde_json::from_str(r#"{"charts":["A"],"transitions":{"A|Z":{"linear":[[1]]}}}"#).unwrap();
        assert!(matches!(unknown.to_cocycle(1), Err(CocycleError::UnknownChart(_))));
        let rank: CocycleFile =
            serde_json::from_str(r#"{"charts":["A","B"],"transitions":{"A|B":{"linear":[[1]]}}}"#).unwrap();
        assert!(matches!(rank.to_cocycle(2), Err(CocycleError::RankMismatch { .. })));
    }
}
