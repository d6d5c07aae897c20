//! Free graded-commutative algebras over ℚ, truncated above a degree cap.
//!
//! A [`RingContext`] fixes a finite list of generators (each with a positive
//! degree) and a mandatory `degree_cap`. Generators are kept in canonical
//! order, sorted by `(degree, name)`; a [`Monomial`] is the exponent vector in
//! that order. Odd generators anticommute and square to zero, so their
//! exponents are always 0 or 1, and a monomial stands for the product of its
//! generators taken in canonical order.
//!
//! Elements of the same ring can only be combined when they share a context;
//! mixing contexts is a [`AlgebraError::ContextMismatch`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational, RationalText};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("elements belong to different ring contexts")]
    ContextMismatch,
    #[error("generator {name:?} has degree 0; degrees must be at least 1")]
    ZeroDegree { name: String },
    #[error("generator name {name:?} is used twice")]
    DuplicateGenerator { name: String },
    #[error("unknown generator {name:?}")]
    UnknownGenerator { name: String },
    #[error("fiber generator {name:?} listed twice")]
    DuplicateFiberGenerator { name: String },
    #[error("fiber generator {name:?} has degree {degree}, expected 1")]
    FiberGeneratorDegree { name: String, degree: u32 },
    #[error("generator {name:?} has odd degree {degree}; an even generator is required")]
    OddGenerator { name: String, degree: u32 },
    #[error("degree-{degree} part is not a multiple of the volume monomial")]
    NotVolumeMultiple { degree: u32 },
    #[error("exponential needs an element without constant term")]
    NonNilpotent,
    #[error("bad coefficient: {0}")]
    Coefficient(#[from] rational::ParseRationalError),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Generator {
            name: name.into(),
            degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingContext {
    generators: Vec<Generator>,
    degree_cap: u32,
}

impl RingContext {
    pub fn new(
        generators: impl IntoIterator<Item = Generator>,
        degree_cap: u32,
    ) -> Result<Arc<Self>> {
        let mut generators: Vec<Generator> = generators.into_iter().collect();
        for g in &generators {
            if g.degree == 0 {
                return Err(AlgebraError::ZeroDegree {
                    name: g.name.clone(),
                });
            }
        }
        generators.sort_by(|a, b| (a.degree, &a.name).cmp(&(b.degree, &b.name)));
        for pair in generators.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(AlgebraError::DuplicateGenerator {
                    name: pair[0].name.clone(),
                });
            }
        }
        // Same name with different degrees lands in different sort positions.
        let mut names: Vec<&str> = generators.iter().map(|g| g.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(AlgebraError::DuplicateGenerator {
                name: w[0].to_owned(),
            });
        }
        Ok(Arc::new(RingContext {
            generators,
            degree_cap,
        }))
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| AlgebraError::UnknownGenerator {
                name: name.to_owned(),
            })
    }

    pub fn generator(&self, name: &str) -> Result<&Generator> {
        Ok(&self.generators[self.index_of(name)?])
    }

    fn monomial_degree(&self, m: &Monomial) -> u32 {
        m.0.iter()
            .zip(&self.generators)
            .map(|(e, g)| e * g.degree)
            .sum()
    }
}

/// Exponent vector over the canonical generator order of a context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn unit(len: usize) -> Self {
        Monomial(vec![0; len])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Builds a monomial from `(generator, exponent)` factors written in the
    /// given order, returning the sign picked up by moving odd factors into
    /// canonical order. `None` means the product vanishes (repeated odd factor).
    pub fn from_factors(ctx: &RingContext, factors: &[(&str, u32)]) -> Result<Option<(Self, i32)>> {
        let mut exps = vec![0u32; ctx.generators.len()];
        let mut odd_sequence = Vec::new();
        for &(name, e) in factors {
            let idx = ctx.index_of(name)?;
            if e == 0 {
                continue;
            }
            if ctx.generators[idx].is_odd() {
                if e > 1 || exps[idx] > 0 {
                    return Ok(None);
                }
                odd_sequence.push(idx);
            }
            exps[idx] += e;
        }
        let sign = if inversions(&odd_sequence).is_multiple_of(2) { 1 } else { -1 };
        Ok(Some((Monomial(exps), sign)))
    }
}

/// Number of pairs `i < j` with `seq[i] > seq[j]`.
fn inversions(seq: &[usize]) -> usize {
    let mut count = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone)]
pub struct GradedElement {
    ctx: Arc<RingContext>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for GradedElement {
    fn eq(&self, other: &Self) -> bool {
        same_context(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for GradedElement {}

fn same_context(a: &Arc<RingContext>, b: &Arc<RingContext>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl GradedElement {
    pub fn zero(ctx: &Arc<RingContext>) -> Self {
        GradedElement {
            ctx: Arc::clone(ctx),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(ctx: &Arc<RingContext>, q: Rational) -> Self {
        let mut e = Self::zero(ctx);
        e.insert(Monomial::unit(ctx.generators.len()), q);
        e
    }

    pub fn one(ctx: &Arc<RingContext>) -> Self {
        Self::scalar(ctx, Rational::one())
    }

    pub fn generator(ctx: &Arc<RingContext>, name: &str) -> Result<Self> {
        Self::monomial(ctx, &[(name, 1)], Rational::one())
    }

    /// `coeff · f₁^e₁ · f₂^e₂ · …` with factors multiplied in the order given.
    pub fn monomial(ctx: &Arc<RingContext>, factors: &[(&str, u32)], coeff: Rational) -> Result<Self> {
        let mut e = Self::zero(ctx);
        if let Some((m, sign)) = Monomial::from_factors(ctx, factors)? {
            e.insert(m, coeff * Rational::from_integer(sign.into()));
        }
        Ok(e)
    }

    pub fn context(&self) -> &Arc<RingContext> {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::unit(self.ctx.generators.len()))
    }

    pub fn degree_of(&self, m: &Monomial) -> u32 {
        self.ctx.monomial_degree(m)
    }

    /// `Some(d)` when every term has degree `d`; the zero element is
    /// homogeneous of degree 0.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|m| self.ctx.monomial_degree(m));
        match degrees.next() {
            None => Some(0),
            Some(d) => degrees.all(|x| x == d).then_some(d),
        }
    }

    pub fn homogeneous_part(&self, degree: u32) -> Self {
        GradedElement {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| self.ctx.monomial_degree(m) == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    fn insert(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || self.ctx.monomial_degree(&m) > self.ctx.degree_cap {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_context(&self, other: &Self) -> Result<()> {
        if same_context(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            out.insert(m.clone(), c * q);
        }
        out
    }

    /// Graded-commutative product, truncated above the context's degree cap.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let gens = &self.ctx.generators;
        let cap = self.ctx.degree_cap;
        let mut out = Self::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            let da = self.ctx.monomial_degree(ma);
            for (mb, cb) in &other.terms {
                if da + self.ctx.monomial_degree(mb) > cap {
                    continue;
                }
                if let Some((m, sign)) = multiply_monomials(gens, ma, mb) {
                    let c = ca * cb;
                    out.insert(m, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// `self^k` under [`mul`](Self::mul); `self^0 = 1`.
    pub fn power_truncated(&self, k: u32) -> Self {
        let mut result = Self::one(&self.ctx);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base).expect("same context");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same context");
            }
        }
        result
    }

    /// `Σ_j self^j / j!` through the degree cap. The element must have zero
    /// constant term, which makes it nilpotent below the cap.
    pub fn exp_truncated(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(AlgebraError::NonNilpotent);
        }
        let mut total = Self::one(&self.ctx);
        let mut term = Self::one(&self.ctx);
        let mut j = 1i64;
        loop {
            term = term.mul(self)?.scale(&rational::ratio(1, j));
            if term.is_zero() {
                break;
            }
            total = total.add(&term)?;
            j += 1;
        }
        Ok(total)
    }

    /// Ring homomorphism sending the even generator `name` to `replacement`
    /// and fixing every other generator.
    pub fn substitute(&self, name: &str, replacement: &Self) -> Result<Self> {
        self.check_context(replacement)?;
        let idx = self.ctx.index_of(name)?;
        let g = &self.ctx.generators[idx];
        if g.is_odd() {
            return Err(AlgebraError::OddGenerator {
                name: g.name.clone(),
                degree: g.degree,
            });
        }
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = std::mem::replace(&mut rest.0[idx], 0);
            let mut piece = Self::zero(&self.ctx);
            piece.insert(rest, c.clone());
            // even generators commute with everything, so the power can be
            // multiplied on either side
            out = out.add(&piece.mul(&replacement.power_truncated(e))?)?;
        }
        Ok(out)
    }

    /// Integration over a torus fiber: the coefficient of `f₁∧…∧f_m` (in the
    /// order given), after moving the fiber generators to the right.
    pub fn fiber_integrate(&self, fiber_gens: &[&str]) -> Result<Self> {
        let mut fiber_idx = Vec::with_capacity(fiber_gens.len());
        for &name in fiber_gens {
            let idx = self.ctx.index_of(name)?;
            let g = &self.ctx.generators[idx];
            if g.degree != 1 {
                return Err(AlgebraError::FiberGeneratorDegree {
                    name: name.to_owned(),
                    degree: g.degree,
                });
            }
            if fiber_idx.contains(&idx) {
                return Err(AlgebraError::DuplicateFiberGenerator {
                    name: name.to_owned(),
                });
            }
            fiber_idx.push(idx);
        }
        let gens = &self.ctx.generators;
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            if fiber_idx.iter().any(|&i| m.0[i] == 0) {
                continue;
            }
            // target order: remaining odd generators canonically, then fiber
            let mut target: Vec<usize> = (0..gens.len())
                .filter(|&i| gens[i].is_odd() && m.0[i] == 1 && !fiber_idx.contains(&i))
                .collect();
            target.extend_from_slice(&fiber_idx);
            let mut rest = m.clone();
            for &i in &fiber_idx {
                rest.0[i] = 0;
            }
            let coeff = if inversions(&target).is_multiple_of(2) {
                c.clone()
            } else {
                -c.clone()
            };
            out.insert(rest, coeff);
        }
        Ok(out)
    }

    /// The rational multiple of `volume` forming the degree-`top_degree` part.
    pub fn top_coefficient(&self, top_degree: u32, volume: &Monomial) -> Result<Rational> {
        let mut found = Rational::zero();
        for (m, c) in &self.terms {
            if self.ctx.monomial_degree(m) != top_degree {
                continue;
            }
            if m != volume {
                return Err(AlgebraError::NotVolumeMultiple { degree: top_degree });
            }
            found = c.clone();
        }
        Ok(found)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, c)| TermRecord {
                monomial: m
                    .0
                    .iter()
                    .zip(&self.ctx.generators)
                    .filter(|(e, _)| **e > 0)
                    .map(|(e, g)| (g.name.clone(), *e))
                    .collect(),
                coeff: RationalText(c.clone()),
            })
            .collect()
    }

    /// Inverse of [`to_records`](Self::to_records). Factors may be listed in
    /// any order; the sign from reordering odd generators is applied.
    pub fn from_records(ctx: &Arc<RingContext>, records: &[TermRecord]) -> Result<Self> {
        let mut out = Self::zero(ctx);
        for r in records {
            let factors: Vec<(&str, u32)> =
                r.monomial.iter().map(|(n, e)| (n.as_str(), *e)).collect();
            out = out.add(&Self::monomial(ctx, &factors, r.coeff.0.clone())?)?;
        }
        Ok(out)
    }
}

/// Product of two canonical monomials; `None` when an odd generator repeats.
fn multiply_monomials(gens: &[Generator], a: &Monomial, b: &Monomial) -> Option<(Monomial, i32)> {
    let mut exps = a.0.clone();
    let mut swaps = 0usize;
    // odd generators of a that come later in canonical order than an odd generator of b
    let mut odd_in_a_after = 0usize;
    for i in (0..gens.len()).rev() {
        if gens[i].is_odd() {
            if b.0[i] == 1 {
                if a.0[i] == 1 {
                    return None;
                }
                swaps += odd_in_a_after;
            }
            if a.0[i] == 1 {
                odd_in_a_after += 1;
            }
        }
        exps[i] += b.0[i];
    }
    Some((Monomial(exps), if swaps.is_multiple_of(2) { 1 } else { -1 }))
}

/// One term of the structured-text form of a [`GradedElement`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub monomial: Vec<(String, u32)>,
    pub coeff: RationalText,
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // lowest degree first
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| self.ctx.monomial_degree(m));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let factors: Vec<String> = m
                .0
                .iter()
                .zip(&self.ctx.generators)
                .filter(|(e, _)| **e > 0)
                .map(|(e, g)| {
                    if *e == 1 {
                        g.name.clone()
                    } else {
                        format!("{}^{}", g.name, e)
                    }
                })
                .collect();
            let negative = c < &Rational::zero();
            let abs = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if factors.is_empty() {
                write!(f, "{}", rational::format_short(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}·", rational::format_short(&abs))?;
                }
                f.write_str(&factors.join("·"))?;
            }
        }
        Ok(())
    }
}
