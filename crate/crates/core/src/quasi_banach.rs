//! lp sequence quasinorms for 0 < p <= infinity and synthesis over unit
//! sup-norm bases.
//!
//! For p < 1 the map `v -> (sum |v_n|^p)^(1/p)` is not a norm: the triangle
//! inequality only holds up to the weak constant `K = max(1, 2^(1/p - 1))`.
//! Synthesis sends coefficient vectors to grid functions through a chosen
//! basis family; every basis vector is normalized to unit sup-norm on the
//! grid, so `|synthesis(v)|_sup <= |v|_l1` always holds and sharper
//! embedding constants can be certified empirically per frame.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

/// A sequence space carrying its exponent and weak triangle constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasinormSpace {
    pub p: f64,
    pub weak_triangle: f64,
}

impl QuasinormSpace {
    pub fn new(p: f64) -> Result<Self> {
        Ok(Self {
            p: check_exponent(p)?,
            weak_triangle: weak_triangle_constant(p)?,
        })
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        lp_quasinorm(v, self.p)
    }
}

fn check_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "exponent p = {p} outside (0, infinity]"
        )));
    }
    Ok(p)
}

/// `(sum |v_n|^p)^(1/p)` for finite p, `max |v_n|` for p = infinity.
pub fn lp_quasinorm(v: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "sequence entry {bad} is not finite"
        )));
    }
    if p.is_infinite() {
        return Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    Ok(v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Smallest constant K with `|x + y| <= K (|x| + |y|)` over the whole
/// space: `max(1, 2^(1/p - 1))`.
pub fn weak_triangle_constant(p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(1.0);
    }
    Ok(1f64.max(2f64.powf(1.0 / p - 1.0)))
}

/// `sum_n |gamma_n^alpha ln gamma_n|` with the convention `0 ln 0 = 0`.
///
/// Finiteness of this functional is the extra summability condition needed
/// by stable series priors at the exponent boundaries where the scale
/// sequence alone does not decide almost-sure convergence.
pub fn orlicz_log_functional(gammas: &[f64], alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::ParameterDomain(format!(
            "alpha = {alpha} outside (0, 2)"
        )));
    }
    let mut acc = 0.0;
    for &g in gammas {
        if !g.is_finite() || g < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "scale entry {g} must be a finite nonnegative real"
            )));
        }
        if g > 0.0 {
            acc += (g.powf(alpha) * g.ln()).abs();
        }
    }
    Ok(acc)
}

/// Basis families available for synthesis on a uniform grid of `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    /// Constant, then cosine/sine pairs of increasing frequency, sampled at
    /// cell midpoints.
    Fourier,
    /// Constant, then dyadic square waves. Requires a power-of-two grid.
    Haar,
    /// `psi_n` = indicator of grid cells at index n and beyond, so synthesis
    /// is the cumulative sum of the coefficients (increment encoding).
    Difference,
    /// Coordinate vectors `e_n`.
    Canonical,
}

/// A basis family fixed to a grid size. Exactly `grid_size` linearly
/// independent vectors are available, numbered `0..grid_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub grid_size: usize,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, grid_size: usize) -> Result<Self> {
        if grid_size == 0 {
            return Err(Error::ParameterDomain("grid_size must be >= 1".into()));
        }
        if family == BasisFamily::Haar && !grid_size.is_power_of_two() {
            return Err(Error::ParameterDomain(format!(
                "Haar basis needs a power-of-two grid, got {grid_size}"
            )));
        }
        Ok(Self { family, grid_size })
    }

    /// Number of basis vectors.
    pub fn count(&self) -> usize {
        self.grid_size
    }

    /// Midpoint of grid cell `j`.
    pub fn grid_point(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.grid_size as f64
    }

    /// Basis vector `n` sampled on the grid, normalized to unit sup-norm.
    pub fn vector(&self, n: usize) -> Result<Vec<f64>> {
        let m = self.grid_size;
        if n >= m {
            return Err(Error::Shape(format!(
                "basis index {n} out of range for {m} vectors"
            )));
        }
        let v = match self.family {
            BasisFamily::Canonical => {
                let mut v = vec![0.0; m];
                v[n] = 1.0;
                v
            }
            BasisFamily::Difference => {
                let mut v = vec![0.0; m];
                for x in v.iter_mut().skip(n) {
                    *x = 1.0;
                }
                v
            }
            BasisFamily::Haar => {
                if n == 0 {
                    vec![1.0; m]
                } else {
                    let level = usize::BITS - 1 - n.leading_zeros();
                    let k = n - (1 << level);
                    let block = m >> level;
                    let start = k * block;
                    let mut v = vec![0.0; m];
                    for (j, x) in v.iter_mut().enumerate().skip(start).take(block) {
                        *x = if j < start + block / 2 { 1.0 } else { -1.0 };
                    }
                    v
                }
            }
            BasisFamily::Fourier => {
                if n == 0 {
                    vec![1.0; m]
                } else {
                    let f = n.div_ceil(2);
                    // The cosine at the Nyquist frequency of an even grid
                    // vanishes at every midpoint; its sine partner is used.
                    let use_sine = n.is_multiple_of(2) || (m.is_multiple_of(2) && 2 * f == m);
                    let raw: Vec<f64> = (0..m)
                        .map(|j| {
                            let arg = 2.0 * std::f64::consts::PI * f as f64 * self.grid_point(j);
                            if use_sine {
                                arg.sin()
                            } else {
                                arg.cos()
                            }
                        })
                        .collect();
                    let sup = raw.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                    raw.iter().map(|x| x / sup).collect()
                }
            }
        };
        Ok(v)
    }
}

/// `sum_n v_n psi_n` on the grid of `basis`. Accepts any coefficient vector
/// no longer than the basis count.
pub fn synthesis(v: &[f64], basis: &BasisSpec) -> Result<Vec<f64>> {
    if v.len() > basis.count() {
        return Err(Error::Shape(format!(
            "{} coefficients exceed the {} available basis vectors",
            v.len(),
            basis.count()
        )));
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "coefficient {bad} is not finite"
        )));
    }
    let m = basis.grid_size;
    match basis.family {
        BasisFamily::Canonical => {
            let mut out = vec![0.0; m];
            out[..v.len()].copy_from_slice(v);
            Ok(out)
        }
        BasisFamily::Difference => {
            let mut out = vec![0.0; m];
            let mut acc = 0.0;
            for j in 0..m {
                if j < v.len() {
                    acc += v[j];
                }
                out[j] = acc;
            }
            Ok(out)
        }
        _ => {
            let mut out = vec![0.0; m];
            for (n, &c) in v.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let psi = basis.vector(n)?;
                for (o, p) in out.iter_mut().zip(&psi) {
                    *o += c * p;
                }
            }
            Ok(out)
        }
    }
}

/// A basis paired with the coefficient exponent `q` it is fed from and the
/// recorded constant of the embedding `|synthesis(v)|_sup <= C |v|_lq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub basis: BasisSpec,
    pub q: f64,
    pub embedding_constant: f64,
}

impl FrameSpec {
    pub fn new(basis: BasisSpec, q: f64, embedding_constant: f64) -> Result<Self> {
        check_exponent(q)?;
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(embedding_constant > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "embedding constant {embedding_constant} must be positive"
            )));
        }
        Ok(Self {
            basis,
            q,
            embedding_constant,
        })
    }
}

/// Worst observed ratio `|synthesis(v)|_sup / |v|_lq` over `trials` random
/// dense coefficient vectors with entries uniform in [-1, 1].
pub fn certify_embedding(frame: &FrameSpec, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::ParameterDomain("trials must be >= 1".into()));
    }
    let mut rng = substream(seed, 0);
    let count = frame.basis.count();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v: Vec<f64> = (0..count).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let denom = lp_quasinorm(&v, frame.q)?;
        if denom == 0.0 {
            continue;
        }
        let sup = lp_quasinorm(&synthesis(&v, &frame.basis)?, f64::INFINITY)?;
        worst = worst.max(sup / denom);
    }
    Ok(worst)
}
