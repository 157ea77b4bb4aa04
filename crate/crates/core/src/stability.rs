//! Spectral stability of equilibria: eigenvalue classification, the Matignon
//! sector test for fractional orders, and roots of the characteristic
//! function `det(lambda^alpha I - A - k(lambda) B)` of a linearized delay system.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::delay::{self, DelayField, Kernel};
use crate::dynamics::{self, JacobianMode, VectorField};
use crate::error::{Error, Result};
use crate::fractional::FracOrder;
use crate::metriplectic::CharPoly;
use crate::state::{Mat3, StateVec};

/// Threshold on real parts (and sector distances) separating the verdicts.
pub const SPECTRAL_TOL: f64 = 1e-9;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    AsymptoticallyStable,
    SpectrallyStableMarginal,
    Unstable,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::AsymptoticallyStable => "asymptotically-stable",
            Classification::SpectrallyStableMarginal => "spectrally-stable-marginal",
            Classification::Unstable => "unstable",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub classification: Classification,
    pub eigenvalues: Vec<C>,
    pub zero_eigenvalue_flag: bool,
    pub evidence: String,
}

/// Roots of the monic cubic `lambda^3 + a lambda^2 + b lambda + c`, ordered by
/// real then imaginary part.
pub fn cubic_roots(p: &CharPoly) -> [C; 3] {
    let [lead, a, b, c] = p.coeffs;
    debug_assert!(lead == 1.0);
    let f = |x: f64| ((x + a) * x + b) * x + c;
    let r = if c == 0.0 {
        0.0
    } else {
        let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
        let (mut lo, mut hi) = (-bound, bound);
        // f(-bound) < 0 < f(bound); bisection with Newton acceleration
        let mut x = 0.0;
        for _ in 0..400 {
            let fx = f(x);
            if fx == 0.0 {
                break;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = (3.0 * x + 2.0 * a) * x + b;
            let newton = x - fx / d;
            let next = if d != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == x || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                x = next;
                break;
            }
            x = next;
        }
        x
    };
    // deflate: lambda^2 + p1 lambda + p0
    let p1 = a + r;
    let p0 = b + r * p1;
    let disc = p1 * p1 - 4.0 * p0;
    let (q1, q2) = if disc >= 0.0 {
        let s = disc.sqrt();
        let big = -0.5 * (p1 + p1.signum() * s);
        if big == 0.0 {
            (C::new(0.0, 0.0), C::new(0.0, 0.0))
        } else {
            (C::new(big, 0.0), C::new(p0 / big, 0.0))
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        (C::new(-0.5 * p1, im), C::new(-0.5 * p1, -im))
    };
    let polish = |z: C| -> C {
        let mut z = z;
        for _ in 0..2 {
            let fz = ((z + a) * z + b) * z + c;
            let dz = (3.0 * z + 2.0 * a) * z + b;
            if dz.norm() < 1e-8 * (1.0 + z.norm()).powi(2) {
                break;
            }
            let next = z - fz / dz;
            let fnext = ((next + a) * next + b) * next + c;
            if fnext.norm() < fz.norm() {
                z = next;
            } else {
                break;
            }
        }
        if q1.im == 0.0 {
            C::new(z.re, 0.0)
        } else {
            z
        }
    };
    let mut roots = [C::new(r, 0.0), polish(q1), polish(q2)];
    if roots[1].im != 0.0 {
        // keep the pair exactly conjugate
        roots[2] = roots[1].conj();
    }
    // adding zero turns -0.0 into 0.0 so the ordering is by value
    let mut roots = roots.map(|z| C::new(z.re + 0.0, z.im + 0.0));
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    roots
}

pub fn eigenvalues(j: &Mat3) -> [C; 3] {
    cubic_roots(&CharPoly::of_matrix(j))
}

fn fmt_eigs(eigs: &[C]) -> String {
    let parts: Vec<String> = eigs.iter().map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im)).collect();
    format!("[{}]", parts.join(", "))
}

/// Classification by the sign of the real parts.
pub fn classify_spectral(j: &Mat3) -> StabilityVerdict {
    let eigs = eigenvalues(j);
    let zero = eigs.iter().any(|z| z.norm() <= SPECTRAL_TOL);
    let max_re = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let classification = if !max_re.is_finite() {
        Classification::Inconclusive
    } else if max_re > SPECTRAL_TOL {
        Classification::Unstable
    } else if max_re < -SPECTRAL_TOL {
        Classification::AsymptoticallyStable
    } else {
        Classification::SpectrallyStableMarginal
    };
    StabilityVerdict {
        classification,
        eigenvalues: eigs.to_vec(),
        zero_eigenvalue_flag: zero,
        evidence: format!("eigenvalues {}; max Re = {max_re:.3e}; tol = {SPECTRAL_TOL:e}", fmt_eigs(&eigs)),
    }
}

/// Signed distance of `z` from the unstable sector `|arg| <= alpha pi / 2`;
/// positive inside the stable region. At `alpha = 1` this is `-Re z`.
pub fn sector_margin(z: C, alpha: f64) -> f64 {
    let excess = z.arg().abs() - alpha * FRAC_PI_2;
    if excess >= FRAC_PI_2 {
        z.norm()
    } else {
        z.norm() * excess.sin()
    }
}

/// Matignon's sector test on the eigenvalues of `A`.
pub fn matignon_check(a: &Mat3, alpha: FracOrder) -> StabilityVerdict {
    let eigs = eigenvalues(a);
    let al = alpha.value();
    let zero = eigs.iter().any(|z| z.norm() <= SPECTRAL_TOL);
    let margins: Vec<f64> = eigs
        .iter()
        .map(|&z| if z.norm() <= SPECTRAL_TOL { 0.0 } else { sector_margin(z, al) })
        .collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let classification = if !min_margin.is_finite() {
        Classification::Inconclusive
    } else if min_margin < -SPECTRAL_TOL {
        Classification::Unstable
    } else if min_margin > SPECTRAL_TOL && !zero {
        Classification::AsymptoticallyStable
    } else {
        Classification::SpectrallyStableMarginal
    };
    let zero_note = if zero { "; zero eigenvalue present" } else { "" };
    StabilityVerdict {
        classification,
        eigenvalues: eigs.to_vec(),
        zero_eigenvalue_flag: zero,
        evidence: format!(
            "eigenvalues {}; sector |arg| > {:.6} rad; min margin = {min_margin:.3e}{zero_note}",
            fmt_eigs(&eigs),
            al * FRAC_PI_2
        ),
    }
}

/// `A = dX/dx` and `B = dX/dxt` at an equilibrium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearizationPair {
    pub a: Mat3,
    pub b: Mat3,
}

impl LinearizationPair {
    pub fn new(a: Mat3, b: Mat3) -> Result<Self> {
        if a.iter().chain(b.iter()).all(|v| v.is_finite()) {
            Ok(LinearizationPair { a, b })
        } else {
            Err(Error::NonFinite("linearization"))
        }
    }

    /// Delay-free linearization (`B = 0`).
    pub fn of_field(field: &dyn VectorField, x0: &StateVec) -> Result<Self> {
        let a = dynamics::jacobian(field, x0, JacobianMode::Analytic)
            .or_else(|_| dynamics::jacobian(field, x0, JacobianMode::FiniteDifference))?;
        LinearizationPair::new(a, Mat3::zeros())
    }

    /// Linearization of a polynomial delay field at `x = xt = x0`.
    pub fn of_delay_field(field: &dyn DelayField, x0: &StateVec) -> Result<Self> {
        let (a, b) = delay::linearize(field, x0)
            .ok_or_else(|| Error::NoAnalyticJacobian(field.name().to_string()))?;
        LinearizationPair::new(a, b)
    }
}

fn det3(m: &[[C; 3]; 3]) -> C {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Principal `lambda^alpha`; the negative real axis (and 0) is the cut for `alpha < 1`.
pub fn principal_power(lambda: C, alpha: f64) -> Result<C> {
    if alpha == 1.0 {
        return Ok(lambda);
    }
    if lambda.im == 0.0 && lambda.re <= 0.0 {
        return Err(Error::BranchCut(lambda));
    }
    Ok((lambda.ln() * alpha).exp())
}

/// `Delta(lambda) = det(lambda^alpha I - A - k(lambda) B)`.
pub fn char_fn(l: &LinearizationPair, k: &Kernel, alpha: FracOrder, lambda: C) -> Result<C> {
    let mu = principal_power(lambda, alpha.value())?;
    let kh = if l.b.iter().all(|&v| v == 0.0) {
        C::new(0.0, 0.0)
    } else {
        k.laplace(lambda)?
    };
    let m: [[C; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let diag = if i == j { mu } else { C::new(0.0, 0.0) };
            diag - l.a[(i, j)] - kh * l.b[(i, j)]
        })
    });
    Ok(det3(&m))
}

/// Closed rectangle `[re_min, re_max] x [im_min, im_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Region {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        if [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max {
            Ok(r)
        } else {
            Err(Error::domain(format!("invalid scan region {r:?}")))
        }
    }

    pub fn contains(&self, z: C, slack: f64) -> bool {
        z.re >= self.re_min - slack && z.re <= self.re_max + slack && z.im >= self.im_min - slack && z.im <= self.im_max + slack
    }

    fn touches_cut(&self) -> bool {
        self.re_min <= 0.0 && self.im_min <= 0.0 && self.im_max >= 0.0
    }
}

pub const ROOT_TOL: f64 = 1e-10;
pub const DEDUP_TOL: f64 = 1e-6;
pub const IMAGINARY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedFailure {
    pub seed: C,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootScan {
    /// Roots ordered by real then imaginary part.
    pub roots: Vec<C>,
    pub residuals: Vec<f64>,
    /// Roots with `|Re| < IMAGINARY_TOL`.
    pub purely_imaginary: Vec<C>,
    pub failures: Vec<SeedFailure>,
}

fn newton(delta: &dyn Fn(C) -> Result<C>, seed: C, region: &Region) -> std::result::Result<(C, f64), String> {
    let mut z = seed;
    let mut fz = delta(z).map_err(|e| e.to_string())?;
    let diag = region.re_max - region.re_min + region.im_max - region.im_min;
    for _ in 0..100 {
        if fz.norm() < 1e-14 {
            break;
        }
        let h = 1e-7 * z.norm().max(1.0);
        let d = (delta(z + h).map_err(|e| e.to_string())? - delta(z - h).map_err(|e| e.to_string())?) / (2.0 * h);
        if d.norm() == 0.0 || !d.is_finite() {
            return Err("vanishing derivative".into());
        }
        let step = fz / d;
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = z - step * damping;
            if let Ok(fc) = delta(cand) {
                if fc.norm() < fz.norm() {
                    z = cand;
                    fz = fc;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !accepted || (step * damping).norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
        if !region.contains(z, diag) {
            return Err(format!("iterate left the region at {z}"));
        }
    }
    Ok((z, fz.norm()))
}

/// Grid scan of `|Delta|` local minima, each refined by damped Newton.
pub fn scan_roots(l: &LinearizationPair, k: &Kernel, alpha: FracOrder, region: Region, grid: usize) -> Result<RootScan> {
    if alpha.value() < 1.0 && region.touches_cut() {
        return Err(Error::domain(format!(
            "scan region {region:?} meets the branch cut on the non-positive real axis"
        )));
    }
    let grid = grid.max(3);
    let delta = |z: C| char_fn(l, k, alpha, z);
    let node = |i: usize, j: usize| {
        C::new(
            region.re_min + (region.re_max - region.re_min) * i as f64 / (grid - 1) as f64,
            region.im_min + (region.im_max - region.im_min) * j as f64 / (grid - 1) as f64,
        )
    };
    let mut mag = vec![f64::INFINITY; grid * grid];
    for i in 0..grid {
        for j in 0..grid {
            if let Ok(v) = delta(node(i, j)) {
                mag[i * grid + j] = v.norm();
            }
        }
    }
    let mut seeds = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let v = mag[i * grid + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= grid as i64 || nj >= grid as i64 {
                        continue;
                    }
                    if mag[ni as usize * grid + nj as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(node(i, j));
            }
        }
    }
    let cell = ((region.re_max - region.re_min) + (region.im_max - region.im_min)) / grid as f64;
    let mut found: Vec<(C, f64)> = Vec::new();
    let mut failures = Vec::new();
    for seed in seeds {
        match newton(&delta, seed, &region) {
            Ok((z, res)) if res < ROOT_TOL && region.contains(z, 1e-9 * cell) => {
                if let Some(prev) = found.iter_mut().find(|(w, _)| (*w - z).norm() < DEDUP_TOL) {
                    if res < prev.1 {
                        *prev = (z, res);
                    }
                } else {
                    found.push((z, res));
                }
            }
            Ok((z, res)) if res < ROOT_TOL => {
                // converged to a root outside the scanned rectangle
                let _ = z;
            }
            Ok((z, res)) => failures.push(SeedFailure {
                seed,
                reason: format!("stalled at {z} with |Delta| = {res:.3e}"),
            }),
            Err(reason) => failures.push(SeedFailure { seed, reason }),
        }
    }
    found.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));
    let roots: Vec<C> = found.iter().map(|r| r.0).collect();
    Ok(RootScan {
        purely_imaginary: roots.iter().copied().filter(|z| z.re.abs() < IMAGINARY_TOL).collect(),
        residuals: found.iter().map(|r| r.1).collect(),
        roots,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{equilibrium_point, EquilibriumFamily, Family, Rabinovich};

    fn jac_at(fam: Family, m: f64) -> Mat3 {
        let x = equilibrium_point(EquilibriumFamily::new(fam, m));
        dynamics::jacobian(&Rabinovich, &x, JacobianMode::Analytic).unwrap()
    }

    #[test]
    fn cubic_roots_known_cases() {
        let r = cubic_roots(&CharPoly::monic([1.0, -6.0, 11.0, -6.0]));
        for (z, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - e).norm() < 1e-14);
        }
        let r = cubic_roots(&CharPoly::monic([1.0, 0.0, 4.0, 0.0]));
        assert_eq!(r[1], C::new(0.0, 0.0));
        assert!((r[0] - C::new(0.0, -2.0)).norm() < 1e-15 && (r[2] - C::new(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(cubic_roots(&CharPoly::monic([1.0, 0.0, 0.0, 0.0])), [C::new(0.0, 0.0); 3]);
    }

    #[test]
    fn cubic_roots_agree_with_schur() {
        let mut s = 12345u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..200 {
            let m = Mat3::from_fn(|_, _| next());
            let mut ours = eigenvalues(&m).to_vec();
            let mut theirs: Vec<C> = m.complex_eigenvalues().iter().copied().collect();
            for v in [&mut ours, &mut theirs] {
                v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            }
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).norm() < 1e-9, "{m}: {ours:?} vs {theirs:?}");
            }
        }
    }

    #[test]
    fn classical_equilibria() {
        for m in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
            let e1 = classify_spectral(&jac_at(Family::E1, m));
            assert_eq!(e1.classification, Classification::SpectrallyStableMarginal);
            assert!(e1.zero_eigenvalue_flag);
            let e2 = classify_spectral(&jac_at(Family::E2, m));
            assert_eq!(e2.classification, Classification::Unstable);
            let e3 = classify_spectral(&jac_at(Family::E3, m));
            assert_eq!(e3.classification, Classification::SpectrallyStableMarginal);
            let ims: Vec<f64> = e3.eigenvalues.iter().map(|z| z.im).collect();
            assert!((ims[0] + m.abs()).abs() < 1e-14 && (ims[2] - m.abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn asymptotic_stability() {
        let a = Mat3::from_diagonal(&nalgebra::Vector3::new(-1.0, -2.0, -0.5));
        assert_eq!(classify_spectral(&a).classification, Classification::AsymptoticallyStable);
    }

    #[test]
    fn matignon_examples() {
        let a = jac_at(Family::E3, 1.0);
        let v = matignon_check(&a, FracOrder::new(0.8).unwrap());
        assert_eq!(v.classification, Classification::SpectrallyStableMarginal);
        assert!(v.zero_eigenvalue_flag);
        let rot = Mat3::new(-1e-3, 1.0, 0.0, -1.0, -1e-3, 0.0, 0.0, 0.0, -1.0);
        // eigenvalues just left of the imaginary axis clear the 0.8 sector
        assert_eq!(matignon_check(&rot, FracOrder::new(0.8).unwrap()).classification, Classification::AsymptoticallyStable);
        let un = Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, -1.0, -1.0));
        for al in [0.2, 0.7, 1.0] {
            assert_eq!(matignon_check(&un, FracOrder::new(al).unwrap()).classification, Classification::Unstable);
        }
        // pure rotation with positive real part is stable only for small alpha
        let spiral = Mat3::new(0.1, 1.0, 0.0, -1.0, 0.1, 0.0, 0.0, 0.0, -1.0);
        assert_eq!(matignon_check(&spiral, FracOrder::new(0.9).unwrap()).classification, Classification::AsymptoticallyStable);
        assert_eq!(matignon_check(&spiral, FracOrder::new(1.0).unwrap()).classification, Classification::Unstable);
    }

    #[test]
    fn sector_margin_at_unit_order_is_minus_real_part() {
        for z in [C::new(0.3, 2.0), C::new(-1.5, -0.2), C::new(-2.0, 0.0), C::new(0.0, 1.0)] {
            assert!((sector_margin(z, 1.0) + z.re).abs() < 1e-15);
        }
    }

    #[test]
    fn char_fn_reductions() {
        let zero = LinearizationPair::new(Mat3::zeros(), Mat3::zeros()).unwrap();
        let k = Kernel::dirac(1.0).unwrap();
        let lam = C::new(0.4, 1.3);
        let al = FracOrder::new(0.7).unwrap();
        let v = char_fn(&zero, &k, al, lam).unwrap();
        assert!((v - (lam.ln() * 2.1).exp()).norm() < 1e-14);
        assert!(matches!(char_fn(&zero, &k, al, C::new(-1.0, 0.0)), Err(Error::BranchCut(_))));
        assert!(char_fn(&zero, &k, al, C::new(0.0, 0.0)).is_err());
        assert!(char_fn(&zero, &k, FracOrder::new(1.0).unwrap(), C::new(-1.0, 0.0)).is_ok());
        // tau -> 0 Dirac makes the delayed term instantaneous
        let a = jac_at(Family::E2, 1.3);
        let b = Mat3::new(0.0, 0.2, 0.0, 0.1, 0.0, -0.3, 0.0, 0.0, 0.5);
        let l = LinearizationPair::new(a, b).unwrap();
        let one = FracOrder::new(1.0).unwrap();
        let tiny = char_fn(&l, &Kernel::dirac(1e-12).unwrap(), one, lam).unwrap();
        let inst = LinearizationPair::new(a + b, Mat3::zeros()).unwrap();
        assert!((tiny - char_fn(&inst, &k, one, lam).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn char_fn_vanishes_at_eigenvalues() {
        let a = Mat3::new(0.5, -1.0, 0.2, 1.0, -0.3, 0.0, 0.1, 0.4, -1.2);
        let l = LinearizationPair::new(a, Mat3::zeros()).unwrap();
        for z in eigenvalues(&a) {
            let v = char_fn(&l, &Kernel::dirac(1.0).unwrap(), FracOrder::new(1.0).unwrap(), z).unwrap();
            assert!(v.norm() < 1e-9);
        }
    }

    #[test]
    fn scan_finds_scalar_and_rotation_roots() {
        let one = FracOrder::new(1.0).unwrap();
        let k = Kernel::dirac(1.0).unwrap();
        let diag = LinearizationPair::new(-Mat3::identity(), Mat3::zeros()).unwrap();
        let s = scan_roots(&diag, &k, one, Region::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 41).unwrap();
        assert_eq!(s.roots.len(), 1);
        assert!((s.roots[0] + 1.0).norm() < 1e-4);
        let rot = LinearizationPair::new(jac_at(Family::E3, 1.0), Mat3::zeros()).unwrap();
        let s = scan_roots(&rot, &k, one, Region::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 41).unwrap();
        for target in [C::new(0.0, -1.0), C::new(0.0, 1.0), C::new(0.0, 0.0)] {
            assert!(s.roots.iter().any(|z| (z - target).norm() < 1e-8), "{target}: {:?}", s.roots);
        }
        assert_eq!(s.purely_imaginary.len(), 3);
        assert!(s.residuals.iter().all(|&r| r < ROOT_TOL));
    }

    #[test]
    fn scan_rejects_cut_for_fractional_orders() {
        let l = LinearizationPair::new(Mat3::zeros(), Mat3::zeros()).unwrap();
        let r = scan_roots(
            &l,
            &Kernel::dirac(1.0).unwrap(),
            FracOrder::new(0.5).unwrap(),
            Region::new(-1.0, 1.0, -1.0, 1.0).unwrap(),
            11,
        );
        assert!(r.is_err());
    }

    #[test]
    fn dirac_scalar_root_matches_bisection() {
        for (b, tau) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.3)] {
            let a = Mat3::from_diagonal(&nalgebra::Vector3::new(0.0, -1.0, -1.0));
            let bm = Mat3::from_diagonal(&nalgebra::Vector3::new(b, 0.0, 0.0));
            let l = LinearizationPair::new(a, bm).unwrap();
            let k = Kernel::dirac(tau).unwrap();
            let s = scan_roots(&l, &k, FracOrder::new(1.0).unwrap(), Region::new(0.01, 3.0, -1.0, 1.0).unwrap(), 61).unwrap();
            let g = |x: f64| x - b * (-x * tau).exp();
            let (mut lo, mut hi) = (0.0, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let real: Vec<_> = s.roots.iter().filter(|z| z.im.abs() < 1e-9).collect();
            assert_eq!(real.len(), 1, "{:?}", s.roots);
            assert!((real[0].re - lo).abs() < 1e-9);
        }
    }
}
