//! Random instances for property checks: symplectic matrices, cover nerves,
//! coboundary cocycles, bases with integral Â-genus and block metrics.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::charclass::{ahat_polynomials, Partition, PontryaginData};
use crate::cocycle::{Cocycle, CoverNerve, IntAffineMap, IntMatrix};
use crate::metric::BlockMetric;

/// Symplectic transvection `x ↦ x + ω(v, x)·v`, i.e. `I + v vᵀ J`.
pub fn transvection(v: &[i64]) -> IntMatrix {
    let n = v.len();
    let j = IntMatrix::standard_j(n / 2);
    let mut out = IntMatrix::identity(n);
    for r in 0..n {
        for c in 0..n {
            let vtj: i64 = (0..n).map(|k| v[k] * j.get(k, c)).sum();
            out.set(r, c, out.get(r, c) + v[r] * vtj);
        }
    }
    out
}

/// Product of `steps` random transvections with entries of `v` in `{-1,0,1}`;
/// always in `Sp(2k, ℤ)`.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, k: usize, steps: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(2 * k);
    for _ in 0..steps {
        let v: Vec<i64> = (0..2 * k).map(|_| rng.random_range(-1..=1)).collect();
        m = transvection(&v).mul(&m).expect("small entries");
    }
    m
}

/// Random element of `GL(m, ℤ)` of either determinant, as a product of
/// elementary matrices and sign flips.
pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R, m: usize, steps: usize) -> IntMatrix {
    let mut out = IntMatrix::identity(m);
    for _ in 0..steps {
        let mut e = IntMatrix::identity(m);
        if m >= 2 && rng.random_bool(0.7) {
            let i = rng.random_range(0..m);
            let mut j = rng.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            e.set(i, j, if rng.random_bool(0.5) { 1 } else { -1 });
        } else {
            let i = rng.random_range(0..m);
            e.set(i, i, -1);
        }
        out = e.mul(&out).expect("small entries");
    }
    out
}

/// Connected random nerve on `2..=max_charts` charts (a random spanning tree
/// plus extra edges), with every triangle of the overlap graph as a triple.
pub fn random_nerve<R: Rng + ?Sized>(rng: &mut R, max_charts: usize) -> CoverNerve {
    let n = rng.random_range(2..=max_charts.max(2));
    let charts: Vec<String> = (0..n).map(|i| format!("U{i}")).collect();
    let mut edges = Vec::new();
    for b in 1..n {
        edges.push((rng.random_range(0..b), b));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    CoverNerve::with_all_triangles(charts, edges).expect("valid indices")
}

/// Coboundary of random `Sp(2k, ℤ)` chart maps over `nerve`.
pub fn random_symplectic_coboundary<R: Rng + ?Sized>(rng: &mut R, nerve: CoverNerve, k: usize) -> Cocycle {
    let h: Vec<IntAffineMap> = (0..nerve.charts().len())
        .map(|_| IntAffineMap::linear(random_symplectic(rng, k, 3)).expect("unimodular"))
        .collect();
    Cocycle::coboundary(nerve, &h).expect("consistent ranks")
}

/// Base of dimension `4d` with random Pontryagin numbers chosen as multiples
/// of the common denominator of `Â_d`, so that the Â-genus is an integer.
pub fn random_integral_base<R: Rng + ?Sized>(rng: &mut R, d: u32) -> PontryaginData {
    let series = ahat_polynomials(d);
    let lcm = series
        .component(d)
        .map(|(_, c)| c.denom().clone())
        .fold(num_bigint::BigInt::from(1), |a, b| num_integer::Integer::lcm(&a, &b));
    let unit: i64 = lcm.try_into().expect("denominators are small");
    let numbers: BTreeMap<Partition, i64> = Partition::all_of(d)
        .into_iter()
        .map(|p| (p, unit * rng.random_range(-5..=5)))
        .collect();
    PontryaginData::new(4 * d, true, numbers).expect("well-formed")
}

fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    a.qr().q()
}

/// `Q·diag(λ)·Qᵀ` with eigenvalues log-uniform in `[1, condition]`, the
/// extremes included so the condition number is exactly `condition`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, condition: f64) -> DMatrix<f64> {
    let q = random_orthogonal(rng, n);
    let log_c = condition.ln();
    let eig = DVector::from_fn(n, |i, _| match i {
        0 => 1.0,
        1 => condition,
        _ => (rng.random_range(0.0..1.0) * log_c).exp(),
    });
    let m = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    // exact symmetry
    (&m + m.transpose()) * 0.5
}

/// A block metric with `samples` random positive-definite samples.
pub fn random_block_metric<R: Rng + ?Sized>(
    rng: &mut R,
    base_dim: usize,
    fiber_dim: usize,
    samples: usize,
    condition: f64,
) -> BlockMetric {
    let n = base_dim + fiber_dim;
    let s = (0..samples).map(|_| random_spd(rng, n, condition)).collect();
    BlockMetric::new(base_dim, fiber_dim, s).expect("positive-definite by construction")
}
