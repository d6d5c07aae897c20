//! Multiplicative sequences in Pontryagin classes.
//!
//! The Â-polynomials are obtained from the formal-root expansion of
//! `∏ (xᵢ/2)/sinh(xᵢ/2)`: writing `f(z)` for the even power series with
//! `f(x²) = (x/2)/sinh(x/2)`, the logarithm `log f(z) = Σ c_j z^j` turns the
//! product into `exp(Σ c_j P_j)` where `P_j` is the j-th power sum of the
//! squared roots. Newton's identities rewrite each `P_j` in the elementary
//! symmetric functions of the squared roots, which are the Pontryagin classes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, GradedElement, Generator, Monomial, RingContext};
use crate::rational::{self, Rational};

/// Degree bound of the shared Â table; covers bases up to dimension 24.
pub const DEFAULT_AHAT_BOUND: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharClassError {
    #[error("dimension {0} is not divisible by 4")]
    DimensionNotMultipleOf4(u32),
    #[error("partition {key} does not partition {expected}")]
    PartitionMismatch { key: String, expected: u32 },
    #[error("cannot parse partition key {0:?}")]
    BadPartitionKey(String),
    #[error("missing Pontryagin number {0}[B]")]
    MissingNumber(String),
    #[error("Â table computed to degree {bound}, base needs degree {needed}")]
    BeyondBound { bound: u32, needed: u32 },
    #[error("generator {0:?} must have even degree for a line-bundle Chern character")]
    OddChernClass(String),
    #[error("class has non-integer coefficient {0}; no mod-2 reduction")]
    NonIntegerClass(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, CharClassError>;

/// A partition of `d`, written as a product of Pontryagin classes
/// (`[2,1,1]` is `p1^2p2`). Parts are kept in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// All partitions of `n`, in reverse lexicographic order of parts.
    pub fn all_of(n: u32) -> Vec<Partition> {
        fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition(prefix.clone()));
                return;
            }
            for p in (1..=n.min(max)).rev() {
                prefix.push(p);
                rec(n - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }

    /// Multiplicity of each part, keyed by part.
    fn multiplicities(&self) -> BTreeMap<u32, u32> {
        let mut m = BTreeMap::new();
        for &p in &self.0 {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (part, mult) in self.multiplicities() {
            if mult == 1 {
                write!(f, "p{part}")?;
            } else {
                write!(f, "p{part}^{mult}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = CharClassError;

    /// Accepts keys such as `p1^2`, `p2`, `p1p2`, `p1^2*p2` and `1` (the empty
    /// partition).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CharClassError::BadPartitionKey(s.to_owned());
        let compact: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*' && *c != '·')
            .collect();
        if compact == "1" {
            return Ok(Partition(Vec::new()));
        }
        let mut parts = Vec::new();
        let bytes = compact.as_bytes();
        let mut i = 0;
        let read_int = |i: &mut usize| -> Option<u32> {
            let start = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            compact[start..*i].parse().ok()
        };
        if bytes.is_empty() {
            return Err(bad());
        }
        while i < bytes.len() {
            if bytes[i] != b'p' {
                return Err(bad());
            }
            i += 1;
            let part = read_int(&mut i).filter(|&p| p > 0).ok_or_else(bad)?;
            let mut exp = 1;
            if i < bytes.len() && bytes[i] == b'^' {
                i += 1;
                exp = read_int(&mut i).filter(|&e| e > 0).ok_or_else(bad)?;
            }
            parts.extend(std::iter::repeat_n(part, exp as usize));
        }
        Ok(Partition::new(parts))
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Characteristic data of a closed base manifold: its dimension, its
/// Pontryagin numbers `p_I[B]` keyed by partitions of `dimension/4`, and
/// whether it is spin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PontryaginData {
    pub dimension: u32,
    pub spin: bool,
    #[serde(rename = "pontryagin_numbers", default)]
    pub numbers: BTreeMap<Partition, i64>,
}

impl PontryaginData {
    pub fn new(dimension: u32, spin: bool, numbers: BTreeMap<Partition, i64>) -> Result<Self> {
        let data = PontryaginData {
            dimension,
            spin,
            numbers,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dimension.is_multiple_of(4) {
            return Err(CharClassError::DimensionNotMultipleOf4(self.dimension));
        }
        let d = self.quaternionic_degree();
        for key in self.numbers.keys() {
            if key.weight() != d {
                return Err(CharClassError::PartitionMismatch {
                    key: key.to_string(),
                    expected: d,
                });
            }
        }
        Ok(())
    }

    /// `d` with `dimension = 4d`.
    pub fn quaternionic_degree(&self) -> u32 {
        self.dimension / 4
    }

    pub fn number(&self, p: &Partition) -> Option<i64> {
        self.numbers.get(p).copied()
    }

    /// Pairs a degree-`4d` polynomial in the Pontryagin classes with `[B]`.
    /// Only partitions carrying a nonzero coefficient need a number.
    pub fn pair<'a>(&self, coefficients: impl IntoIterator<Item = (&'a Partition, &'a Rational)>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (p, c) in coefficients {
            if c.is_zero() {
                continue;
            }
            let n = match self.numbers.get(p) {
                Some(n) => *n,
                // the empty partition pairs with the point count of a 0-dimensional base
                None if p.weight() == 0 => 1,
                None => return Err(CharClassError::MissingNumber(p.to_string())),
            };
            total += c * rational::int(n);
        }
        Ok(total)
    }

    /// Every characteristic number multiplied by `factor`, as for a finite
    /// cover of degree `factor`.
    pub fn scaled(&self, factor: i64) -> Self {
        PontryaginData {
            dimension: self.dimension,
            spin: self.spin,
            numbers: self
                .numbers
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }
}

/// The Â-polynomials `Â_j` for `j ≤ max_degree`, as coefficients of
/// Pontryagin monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicativeSeries {
    max_degree: u32,
    coefficients: BTreeMap<Partition, Rational>,
}

impl MultiplicativeSeries {
    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn coefficient(&self, p: &Partition) -> Rational {
        self.coefficients.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms of `Â_j`, i.e. partitions of weight `j`.
    pub fn component(&self, j: u32) -> impl Iterator<Item = (&Partition, &Rational)> {
        self.coefficients.iter().filter(move |(p, _)| p.weight() == j)
    }

    /// The table restricted to `Â_0..Â_d`.
    pub fn truncated(&self, d: u32) -> Self {
        MultiplicativeSeries {
            max_degree: d.min(self.max_degree),
            coefficients: self
                .coefficients
                .iter()
                .filter(|(p, _)| p.weight() <= d)
                .map(|(p, c)| (p.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn coefficients(&self) -> &BTreeMap<Partition, Rational> {
        &self.coefficients
    }

    /// `Σ_j Â_j` as an element of `ctx`, where `class_name(i)` names the
    /// generator standing for `p_i` (degree `4i`).
    pub fn to_element(&self, ctx: &Arc<RingContext>, class_name: impl Fn(u32) -> String) -> Result<GradedElement> {
        let mut out = GradedElement::zero(ctx);
        for (p, c) in &self.coefficients {
            let names: Vec<(String, u32)> = p
                .multiplicities()
                .into_iter()
                .map(|(part, mult)| (class_name(part), mult))
                .collect();
            let factors: Vec<(&str, u32)> = names.iter().map(|(n, e)| (n.as_str(), *e)).collect();
            out = out.add(&GradedElement::monomial(ctx, &factors, c.clone())?)?;
        }
        Ok(out)
    }
}

/// Power series of `f` with `f(x²) = (x/2)/sinh(x/2)`, through `z^d`.
fn half_x_over_sinh_series(d: u32) -> Vec<Rational> {
    // sinh(x/2)/(x/2) = Σ z^j / (4^j (2j+1)!)
    let mut g = Vec::with_capacity(d as usize + 1);
    let mut factorial = BigInt::one();
    let mut four_pow = BigInt::one();
    for j in 0..=d {
        if j > 0 {
            factorial *= BigInt::from(2 * j) * BigInt::from(2 * j + 1);
            four_pow *= 4;
        }
        g.push(Rational::new(BigInt::one(), &four_pow * &factorial));
    }
    // reciprocal of a series with constant term 1
    let mut f = vec![Rational::zero(); d as usize + 1];
    f[0] = Rational::one();
    for n in 1..=d as usize {
        let mut acc = Rational::zero();
        for k in 1..=n {
            acc += &g[k] * &f[n - k];
        }
        f[n] = -acc;
    }
    f
}

/// `log f` for a series with `f(0) = 1`.
fn series_log(f: &[Rational]) -> Vec<Rational> {
    let mut l = vec![Rational::zero(); f.len()];
    for n in 1..f.len() {
        let mut acc = Rational::zero();
        for k in 1..n {
            acc += Rational::from_integer(BigInt::from(k)) * &l[k] * &f[n - k];
        }
        l[n] = &f[n] - acc / Rational::from_integer(BigInt::from(n));
    }
    l
}

fn pontryagin_context(d: u32) -> Result<Arc<RingContext>> {
    Ok(RingContext::new(
        (1..=d).map(|i| Generator::new(format!("p{i}"), 4 * i)),
        4 * d,
    )?)
}

/// Exact Â-polynomials through degree `d` (Pontryagin weight).
pub fn ahat_polynomials(d: u32) -> MultiplicativeSeries {
    let ctx = pontryagin_context(d).expect("valid generator list");
    let e = |i: u32| GradedElement::generator(&ctx, &format!("p{i}")).expect("generator exists");

    // Newton: P_j = Σ_{i=1}^{j-1} (-1)^{i-1} e_i P_{j-i} + (-1)^{j-1} j e_j
    let mut power_sums: Vec<GradedElement> = vec![GradedElement::zero(&ctx)];
    for j in 1..=d {
        let mut pj = e(j).scale(&rational::int(if j % 2 == 1 { j as i64 } else { -(j as i64) }));
        for i in 1..j {
            let term = e(i).mul(&power_sums[(j - i) as usize]).expect("same context");
            pj = if i % 2 == 1 { pj.add(&term) } else { pj.sub(&term) }.expect("same context");
        }
        power_sums.push(pj);
    }

    let log_coeffs = series_log(&half_x_over_sinh_series(d));
    let mut exponent = GradedElement::zero(&ctx);
    for j in 1..=d as usize {
        exponent = exponent
            .add(&power_sums[j].scale(&log_coeffs[j]))
            .expect("same context");
    }
    let total = exponent.exp_truncated().expect("no constant term");

    let gens = ctx.generators();
    let coefficients = total
        .terms()
        .map(|(m, c)| (partition_of(m, gens), c.clone()))
        .collect();
    MultiplicativeSeries {
        max_degree: d,
        coefficients,
    }
}

/// Reads a monomial in generators named `p<i>` as a partition.
pub(crate) fn partition_of(m: &Monomial, gens: &[Generator]) -> Partition {
    let mut parts = Vec::new();
    for (e, g) in m.exponents().iter().zip(gens) {
        if *e == 0 {
            continue;
        }
        let i: u32 = g.name[1..].parse().expect("pontryagin generator name");
        parts.extend(std::iter::repeat_n(i, *e as usize));
    }
    Partition::new(parts)
}

/// The shared Â table through [`DEFAULT_AHAT_BOUND`], computed once.
pub fn default_ahat_series() -> &'static MultiplicativeSeries {
    static TABLE: OnceLock<MultiplicativeSeries> = OnceLock::new();
    TABLE.get_or_init(|| ahat_polynomials(DEFAULT_AHAT_BOUND))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AhatGenus {
    pub value: Rational,
    /// Set when the base is not spin: the number is computed, but it is not
    /// the index of a Dirac operator and carries no obstruction.
    pub non_spin_warning: bool,
}

/// `Â(B)[B]` from the Pontryagin numbers, using the shared table (or a fresh
/// computation when the base exceeds it).
pub fn ahat_genus(base: &PontryaginData) -> Result<AhatGenus> {
    let d = base.quaternionic_degree();
    if d <= DEFAULT_AHAT_BOUND {
        ahat_genus_with(base, default_ahat_series())
    } else {
        ahat_genus_with(base, &ahat_polynomials(d))
    }
}

/// As [`ahat_genus`], against an explicit table; fails when the table is too
/// short for the base.
pub fn ahat_genus_with(base: &PontryaginData, series: &MultiplicativeSeries) -> Result<AhatGenus> {
    base.validate()?;
    let d = base.quaternionic_degree();
    if d > series.max_degree() {
        return Err(CharClassError::BeyondBound {
            bound: series.max_degree(),
            needed: d,
        });
    }
    // for d = 0 the base is a finite set of points, counted under key "1"
    Ok(AhatGenus {
        value: base.pair(series.component(d))?,
        non_spin_warning: !base.spin,
    })
}

/// `ch(L) = Σ c1^j / j!` for a line bundle with first Chern class the
/// generator `c1`, keeping only terms of degree ≤ `cap`.
pub fn chern_character_line(ctx: &Arc<RingContext>, c1: &str, cap: u32) -> Result<GradedElement> {
    let g = ctx.generator(c1)?;
    if g.is_odd() {
        return Err(CharClassError::OddChernClass(c1.to_owned()));
    }
    let full = GradedElement::generator(ctx, c1)?.exp_truncated()?;
    let mut out = GradedElement::zero(ctx);
    for deg in (0..=cap.min(ctx.degree_cap())).step_by(2) {
        out = out.add(&full.homogeneous_part(deg))?;
    }
    Ok(out)
}

/// `ch` of a line bundle whose first Chern class is an arbitrary degree-2 class.
pub fn chern_character(c1: &GradedElement) -> Result<GradedElement> {
    Ok(c1.exp_truncated()?)
}

/// Mod-2 reduction of an integral class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mod2Class {
    monomials: Vec<Monomial>,
}

impl Mod2Class {
    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }
}

/// `w₂` obstruction of the vertical bundle read off as `c1(V) mod 2`. Over a
/// spin base a zero result certifies that the total space is spin-c with the
/// canonical choice; a nonzero result means the reduction must be matched by
/// an integral lift.
pub fn spinc_parity(c1_vertical: &GradedElement) -> Result<Mod2Class> {
    let two = BigInt::from(2);
    let mut monomials = Vec::new();
    for (m, c) in c1_vertical.terms() {
        if !rational::is_integer(c) {
            return Err(CharClassError::NonIntegerClass(rational::format_short(c)));
        }
        if !rational::is_multiple_of(c, &two) {
            monomials.push(m.clone());
        }
    }
    Ok(Mod2Class { monomials })
}

impl FromStr for PontryaginData {
    type Err = CharClassError;

    /// Compact `dim:spin:key=value,...` form, e.g. `4:spin:p1=-48`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CharClassError::BadPartitionKey(s.to_owned());
        let mut fields = s.splitn(3, ':');
        let dimension: u32 = fields.next().and_then(|d| d.trim().parse().ok()).ok_or_else(bad)?;
        let spin = match fields.next().map(str::trim) {
            Some("spin") => true,
            Some("nonspin") => false,
            _ => return Err(bad()),
        };
        let mut numbers = BTreeMap::new();
        for item in fields.next().unwrap_or("").split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(bad)?;
            let value: i64 = v.trim().parse().map_err(|_| bad())?;
            numbers.insert(k.parse()?, value);
        }
        PontryaginData::new(dimension, spin, numbers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn base(dim: u32, numbers: &[(&str, i64)]) -> PontryaginData {
        PontryaginData::new(
            dim,
            true,
            numbers.iter().map(|(k, v)| (p(k), *v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn partition_keys() {
        assert_eq!(p("p1^2").parts(), &[1, 1]);
        assert_eq!(p("p1p2"), p("p2p1"));
        assert_eq!(p("p1^2*p2").to_string(), "p1^2p2");
        assert_eq!(p("1").weight(), 0);
        assert!("q1".parse::<Partition>().is_err());
        assert!("p0".parse::<Partition>().is_err());
        assert!("".parse::<Partition>().is_err());
        assert_eq!(Partition::all_of(4).len(), 5);
    }

    #[test]
    fn ahat_degree_zero() {
        let s = ahat_polynomials(0);
        assert_eq!(s.coefficient(&p("1")), int(1));
        assert_eq!(s.coefficients().len(), 1);
    }

    #[test]
    fn ahat_low_degrees_match_displayed_series() {
        let s = ahat_polynomials(2);
        assert_eq!(s.coefficient(&p("p1")), ratio(-1, 24));
        assert_eq!(s.coefficient(&p("p1^2")), ratio(7, 5760));
        assert_eq!(s.coefficient(&p("p2")), ratio(-4, 5760));
    }

    #[test]
    fn ahat_degree_three() {
        let s = ahat_polynomials(3);
        assert_eq!(s.coefficient(&p("p1^3")), ratio(-31, 967680));
        assert_eq!(s.coefficient(&p("p1p2")), ratio(44, 967680));
        assert_eq!(s.coefficient(&p("p3")), ratio(-16, 967680));
    }

    #[test]
    fn series_stability() {
        let big = ahat_polynomials(5);
        for j in 0..5 {
            let small = ahat_polynomials(j);
            for (k, v) in small.coefficients() {
                assert_eq!(&big.coefficient(k), v);
            }
        }
    }

    #[test]
    fn genus_examples() {
        assert_eq!(ahat_genus(&base(4, &[("p1", -48)])).unwrap().value, int(2));
        assert_eq!(ahat_genus(&base(8, &[("p1^2", 0), ("p2", 0)])).unwrap().value, int(0));
        assert_eq!(ahat_genus(&base(8, &[("p1^2", 4), ("p2", 7)])).unwrap().value, int(0));
        assert!(matches!(
            ahat_genus(&base(8, &[("p2", 7)])),
            Err(CharClassError::MissingNumber(k)) if k == "p1^2"
        ));
    }

    #[test]
    fn genus_of_points_and_non_spin() {
        assert_eq!(ahat_genus(&base(0, &[])).unwrap().value, int(1));
        assert_eq!(ahat_genus(&base(0, &[("1", 3)])).unwrap().value, int(3));
        let mut b = base(4, &[("p1", -48)]);
        b.spin = false;
        let g = ahat_genus(&b).unwrap();
        assert!(g.non_spin_warning);
        assert_eq!(g.value, int(2));
    }

    #[test]
    fn pontryagin_validation() {
        assert!(matches!(
            PontryaginData::new(6, true, BTreeMap::new()),
            Err(CharClassError::DimensionNotMultipleOf4(6))
        ));
        assert!(matches!(
            PontryaginData::new(8, true, [(p("p1"), 1)].into()),
            Err(CharClassError::PartitionMismatch { .. })
        ));
        let parsed: PontryaginData = "4:spin:p1=-48".parse().unwrap();
        assert_eq!(parsed, base(4, &[("p1", -48)]));
    }

    #[test]
    fn table_bound_enforced() {
        let short = ahat_polynomials(1);
        assert!(matches!(
            ahat_genus_with(&base(8, &[("p1^2", 4), ("p2", 7)]), &short),
            Err(CharClassError::BeyondBound { bound: 1, needed: 2 })
        ));
    }

    fn omega_ctx(cap: u32) -> Arc<RingContext> {
        RingContext::new([Generator::new("w", 2), Generator::new("v", 2)], cap).unwrap()
    }

    #[test]
    fn chern_character_truncation() {
        let ctx = omega_ctx(4);
        assert_eq!(chern_character_line(&ctx, "w", 1).unwrap(), GradedElement::one(&ctx));
        let w = GradedElement::generator(&ctx, "w").unwrap();
        let expected = GradedElement::one(&ctx)
            .add(&w)
            .unwrap()
            .add(&w.power_truncated(2).scale(&ratio(1, 2)))
            .unwrap();
        assert_eq!(chern_character_line(&ctx, "w", 4).unwrap(), expected);
    }

    #[test]
    fn chern_character_squares_to_double_class() {
        let ctx = omega_ctx(8);
        let ch = chern_character_line(&ctx, "w", 8).unwrap();
        let w = GradedElement::generator(&ctx, "w").unwrap();
        let doubled = chern_character(&w.scale(&int(2))).unwrap();
        assert_eq!(ch.mul(&ch).unwrap(), doubled);
    }

    #[test]
    fn chern_character_rejects_odd() {
        let ctx = RingContext::new([Generator::new("y", 1)], 2).unwrap();
        assert!(matches!(
            chern_character_line(&ctx, "y", 2),
            Err(CharClassError::OddChernClass(_))
        ));
    }

    #[test]
    fn parity() {
        let ctx = omega_ctx(4);
        let w = GradedElement::generator(&ctx, "w").unwrap();
        assert!(spinc_parity(&GradedElement::zero(&ctx)).unwrap().is_zero());
        assert!(spinc_parity(&w.scale(&int(2))).unwrap().is_zero());
        let odd = spinc_parity(&w.scale(&int(3))).unwrap();
        assert_eq!(odd.monomials().len(), 1);
        assert!(matches!(
            spinc_parity(&w.scale(&ratio(1, 2))),
            Err(CharClassError::NonIntegerClass(_))
        ));
    }
}
