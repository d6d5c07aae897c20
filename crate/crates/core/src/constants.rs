//! Closed-form Yamabe invariants of a few standard manifolds.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstantsError {
    #[error("dimension {n} out of range (need n >= {min})")]
    Dimension { n: u32, min: u32 },
    #[error("2χ + 3τ = {0} is negative")]
    NegativeRadicand(i64),
}

pub type Result<T> = std::result::Result<T, ConstantsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// `n(n−1)·vol(Sⁿ(1))^{2/n}`, also the value for `S¹×Sⁿ⁻¹`.
    Sphere,
    /// `4πχ` for closed oriented surfaces.
    Surface,
    /// `−4√2π·√(2χ+3τ)` of the minimal model, for Kähler surfaces of
    /// non-negative Kodaira dimension.
    Kahler,
    /// `+4√2π·√(2χ+3τ)` for the complex projective plane.
    ComplexProjectivePlane,
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaId::Sphere => "sphere",
            FormulaId::Surface => "surface",
            FormulaId::Kahler => "kahler",
            FormulaId::ComplexProjectivePlane => "cp2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YamabeValue {
    pub value: f64,
    pub formula: FormulaId,
    pub inputs: Vec<(String, i64)>,
}

impl fmt::Display for YamabeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inputs: Vec<String> = self.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "Y = {} ({}; {})", self.value, self.formula, inputs.join(", "))
    }
}

/// Volume of the unit sphere `Sⁿ ⊂ ℝⁿ⁺¹`, `2π^{(n+1)/2}/Γ((n+1)/2)`.
///
/// Evaluated through `vol(Sⁿ) = 2π/(n−1)·vol(Sⁿ⁻²)` from `vol(S⁰) = 2` and
/// `vol(S¹) = 2π`, which avoids a general Gamma function.
pub fn vol_sphere(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(ConstantsError::Dimension { n, min: 1 });
    }
    let mut v = if n.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut k = if n.is_multiple_of(2) { 0 } else { 1 };
    while k < n {
        k += 2;
        v *= 2.0 * PI / f64::from(k - 1);
    }
    Ok(v)
}

pub fn yamabe_sphere(n: u32) -> Result<YamabeValue> {
    if n < 2 {
        return Err(ConstantsError::Dimension { n, min: 2 });
    }
    let nf = f64::from(n);
    Ok(YamabeValue {
        value: nf * (nf - 1.0) * vol_sphere(n)?.powf(2.0 / nf),
        formula: FormulaId::Sphere,
        inputs: vec![("n".into(), n.into())],
    })
}

pub fn yamabe_surface(chi: i64) -> YamabeValue {
    YamabeValue {
        value: 4.0 * PI * chi as f64,
        formula: FormulaId::Surface,
        inputs: vec![("chi".into(), chi)],
    }
}

/// `∓4√2π√(2χ+3τ)`, with `χ, τ` those of the minimal model. The caller is
/// responsible for the Kodaira-dimension hypothesis; `is_cp2` selects the
/// positive branch.
pub fn yamabe_kahler(chi: i64, tau: i64, is_cp2: bool) -> Result<YamabeValue> {
    let radicand = 2 * chi + 3 * tau;
    if radicand < 0 {
        return Err(ConstantsError::NegativeRadicand(radicand));
    }
    let magnitude = 4.0 * 2f64.sqrt() * PI * (radicand as f64).sqrt();
    Ok(YamabeValue {
        value: if is_cp2 || magnitude == 0.0 { magnitude } else { -magnitude },
        formula: if is_cp2 {
            FormulaId::ComplexProjectivePlane
        } else {
            FormulaId::Kahler
        },
        inputs: vec![("chi".into(), chi), ("tau".into(), tau)],
    })
}
