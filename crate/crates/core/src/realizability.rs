//! Coherency-matrix construction, physical-realizability testing and
//! projection of unphysical Mueller matrices by eigenvalue clipping.
//!
//! `H = ¼·Σᵢⱼ m(i,j)·(σᵢ ⊗ σⱼ*)` with `σ₀ = I₂`, `σ₁ = diag(1,−1)`,
//! `σ₂ = [[0,1],[1,0]]`, `σ₃ = [[0,−i],[i,0]]`, so `tr H = m(0,0)` and
//! `m(i,j) = tr((σᵢ ⊗ σⱼ*)ᴴ·H)`. A Mueller matrix is physically realizable
//! iff `H` is positive semidefinite.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::jacobi_symmetric;
use crate::par;
use crate::polcore::{MuellerCube, MuellerMatrix};

/// Default slack for the physicality test.
pub const DEFAULT_TOL_PHYS: f64 = 1e-9;
/// Value negative eigenvalues are raised to.
pub const DEFAULT_CLIP: f64 = 1e-6;
/// Hermiticity tolerance accepted by [`from_coherency`].
pub const HERMITIAN_TOL: f64 = 1e-10;

type CMat4 = [[Complex64; 4]; 4];

/// 4×4 Hermitian coherency matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherencyMatrix(pub CMat4);

impl CoherencyMatrix {
    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Largest `|h(i,j) − conj(h(j,i))|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                dev = dev.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_distance(&self, other: &CoherencyMatrix) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Real symmetric 8×8 embedding `[[A, −B], [B, A]]` of `H = A + iB`.
    fn real_embedding(&self) -> [[f64; 8]; 8] {
        let mut s = [[0.0; 8]; 8];
        for i in 0..4 {
            for j in 0..4 {
                let h = self.0[i][j];
                s[i][j] = h.re;
                s[i + 4][j + 4] = h.re;
                s[i][j + 4] = -h.im;
                s[i + 4][j] = h.im;
            }
        }
        s
    }

    fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `σᵢ ⊗ σⱼ*` for all 16 index pairs.
fn basis() -> &'static [[CMat4; 4]; 4] {
    static BASIS: OnceLock<[[CMat4; 4]; 4]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let pauli: [[[Complex64; 2]; 2]; 4] = [
            [[one, z], [z, one]],
            [[one, z], [z, -one]],
            [[z, one], [one, z]],
            [[z, -i], [i, z]],
        ];
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut k = [[z; 4]; 4];
                for r in 0..4 {
                    for c in 0..4 {
                        k[r][c] = pauli[a][r / 2][c / 2] * pauli[b][r % 2][c % 2].conj();
                    }
                }
                k
            })
        })
    })
}

pub fn to_coherency(m: &MuellerMatrix) -> CoherencyMatrix {
    let basis = basis();
    let mut h = [[Complex64::new(0.0, 0.0); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let w = 0.25 * m.m(a, b);
            if w == 0.0 {
                continue;
            }
            let k = &basis[a][b];
            for r in 0..4 {
                for c in 0..4 {
                    h[r][c] += k[r][c] * w;
                }
            }
        }
    }
    CoherencyMatrix(h)
}

pub fn from_coherency(h: &CoherencyMatrix) -> Result<MuellerMatrix> {
    let dev = h.hermitian_deviation();
    if !(dev <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let basis = basis();
    let mut m = MuellerMatrix::ZERO;
    for a in 0..4 {
        for b in 0..4 {
            // tr(Kᴴ·H) with K Hermitian: Σ K(r,c)·H(c,r).
            let k = &basis[a][b];
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..4 {
                for c in 0..4 {
                    acc += k[r][c] * h.0[c][r];
                }
            }
            m.0[a][b] = acc.re;
        }
    }
    Ok(m)
}

/// Eigendecomposition of a Hermitian coherency matrix.
#[derive(Clone, Copy, Debug)]
pub struct HermitianEigen {
    /// Descending.
    pub values: [f64; 4],
    /// Orthonormal; `vectors[k]` pairs with `values[k]`.
    pub vectors: [[Complex64; 4]; 4],
}

impl HermitianEigen {
    /// `Σ λₖ vₖ vₖᴴ`.
    pub fn reconstruct(&self) -> CoherencyMatrix {
        reconstruct_spectral(&self.values, &self.vectors)
    }
}

fn reconstruct_spectral(values: &[f64; 4], vectors: &[[Complex64; 4]; 4]) -> CoherencyMatrix {
    let mut h = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (lambda, v) in values.iter().zip(vectors) {
        for r in 0..4 {
            for c in 0..4 {
                h[r][c] += v[r] * v[c].conj() * *lambda;
            }
        }
    }
    CoherencyMatrix(h)
}

/// Eigenvalues only (descending), via the real embedding whose spectrum
/// is that of `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &CoherencyMatrix) -> Result<[f64; 4]> {
    let e = jacobi_symmetric(&h.real_embedding(), false)?;
    Ok(std::array::from_fn(|k| 0.5 * (e.values[2 * k] + e.values[2 * k + 1])))
}

/// Full eigendecomposition via the 8×8 real embedding.
///
/// Each real eigenvector `(x, y)` maps to the complex vector `x + iy`; the
/// pair belonging to one eigenvalue maps to `v` and `i·v`. Pivoted complex
/// Gram–Schmidt over the eight candidates keeps four independent ones.
pub fn hermitian_eigen(h: &CoherencyMatrix) -> Result<HermitianEigen> {
    let e = jacobi_symmetric(&h.real_embedding(), true)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut candidates: Vec<[Complex64; 4]> = e
        .vectors
        .iter()
        .map(|w| std::array::from_fn(|r| Complex64::new(w[r], w[r + 4])))
        .collect();

    let mut chosen: Vec<[Complex64; 4]> = Vec::with_capacity(4);
    for _ in 0..4 {
        let (best, _) = candidates
            .iter()
            .enumerate()
            .map(|(k, v)| (k, cnorm(v)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let v = candidates.swap_remove(best);
        let n = cnorm(&v);
        let unit: [Complex64; 4] = std::array::from_fn(|r| v[r] / n);
        for c in candidates.iter_mut() {
            let proj: Complex64 = (0..4).map(|r| unit[r].conj() * c[r]).sum();
            for r in 0..4 {
                c[r] -= unit[r] * proj;
            }
        }
        chosen.push(unit);
    }

    let mut pairs: Vec<(f64, [Complex64; 4])> = chosen
        .into_iter()
        .map(|v| {
            let mut q = zero;
            for r in 0..4 {
                for c in 0..4 {
                    q += v[r].conj() * h.0[r][c] * v[c];
                }
            }
            (q.re, v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(HermitianEigen {
        values: std::array::from_fn(|k| pairs[k].0),
        vectors: std::array::from_fn(|k| pairs[k].1),
    })
}

fn cnorm(v: &[Complex64; 4]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outcome of the physicality test for one matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealizabilityReport {
    /// Coherency eigenvalues, descending.
    pub eigenvalues: [f64; 4],
    pub min_eigenvalue: f64,
    pub physical: bool,
    /// `(wavelength index, row, col)` when produced over a cube.
    pub pixel: Option<(usize, usize, usize)>,
}

impl RealizabilityReport {
    fn from_eigenvalues(eigenvalues: [f64; 4], tol_phys: f64) -> Self {
        let min_eigenvalue = eigenvalues[3];
        RealizabilityReport {
            eigenvalues,
            min_eigenvalue,
            physical: min_eigenvalue >= -tol_phys,
            pixel: None,
        }
    }
}

pub fn is_physical(m: &MuellerMatrix, tol_phys: f64) -> Result<RealizabilityReport> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let values = hermitian_eigenvalues(&to_coherency(m))?;
    Ok(RealizabilityReport::from_eigenvalues(values, tol_phys))
}

/// [`project_physical_with`] at the default physicality tolerance.
pub fn project_physical(m: &MuellerMatrix, clip: f64) -> Result<(MuellerMatrix, RealizabilityReport)> {
    project_physical_with(m, clip, DEFAULT_TOL_PHYS)
}

/// Raises every negative coherency eigenvalue of an unphysical matrix to
/// `clip` and maps back. Matrices that pass [`is_physical`] at `tol_phys`
/// come back bit-for-bit unchanged. The trace (hence `m(0,0)`) is not
/// renormalized. The report describes the input.
pub fn project_physical_with(
    m: &MuellerMatrix,
    clip: f64,
    tol_phys: f64,
) -> Result<(MuellerMatrix, RealizabilityReport)> {
    let report = is_physical(m, tol_phys)?;
    if report.physical {
        return Ok((*m, report));
    }
    let h = to_coherency(m);
    let mut eig = hermitian_eigen(&h)?;
    for v in eig.values.iter_mut() {
        if *v < 0.0 {
            *v = clip;
        }
    }
    let mut projected = eig.reconstruct();
    // Symmetrize away rounding so the inverse map sees an exactly Hermitian input.
    for i in 0..4 {
        projected.0[i][i].im = 0.0;
        for j in i + 1..4 {
            let avg = (projected.0[i][j] + projected.0[j][i].conj()) * 0.5;
            projected.0[i][j] = avg;
            projected.0[j][i] = avg.conj();
        }
    }
    debug_assert!(projected.norm().is_finite());
    Ok((from_coherency(&projected)?, report))
}

/// Per-pixel physicality over a cube.
#[derive(Clone, Debug)]
pub struct CubeScan {
    pub fraction_physical: f64,
    pub n_physical: usize,
    /// One report per matrix, in cube order `[λ][row][col]`.
    pub reports: Vec<RealizabilityReport>,
}

impl CubeScan {
    pub fn min_eigenvalue_plane(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.min_eigenvalue).collect()
    }
}

/// Applies [`is_physical`] to every matrix. Non-finite matrices count as
/// unphysical with NaN eigenvalues.
pub fn scan_cube(cube: &MuellerCube, tol_phys: f64) -> Result<CubeScan> {
    let (h, w) = (cube.height(), cube.width());
    let reports = par::try_map_indexed(cube.data().len(), |k| {
        let m = &cube.data()[k];
        let mut report = if m.is_finite() {
            is_physical(m, tol_phys)?
        } else {
            RealizabilityReport {
                eigenvalues: [f64::NAN; 4],
                min_eigenvalue: f64::NAN,
                physical: false,
                pixel: None,
            }
        };
        report.pixel = Some((k / (h * w), (k / w) % h, k % w));
        Ok(report)
    })?;
    let n_physical = reports.iter().filter(|r| r.physical).count();
    Ok(CubeScan {
        fraction_physical: n_physical as f64 / reports.len() as f64,
        n_physical,
        reports,
    })
}

/// Projects every unphysical matrix of a cube.
///
/// For a normalized cube each projected matrix is renormalized and its
/// gain folded into the `m(0,0)` plane, so the cube invariants survive.
pub fn project_cube(cube: &MuellerCube, clip: f64, tol_phys: f64) -> Result<MuellerCube> {
    let normalized = cube.is_normalized();
    let projected = par::try_map_indexed(cube.data().len(), |k| {
        let m = &cube.data()[k];
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let (p, report) = project_physical_with(m, clip, tol_phys)?;
        if normalized && !report.physical {
            let (n, gain) = crate::polcore::normalize(&p)?;
            Ok((n, gain))
        } else {
            Ok((p, 1.0))
        }
    })?;
    let mut parts = cube.clone().into_parts();
    if let Some(plane) = parts.m00_plane.as_mut() {
        if normalized {
            for (g, (_, extra)) in plane.iter_mut().zip(&projected) {
                if *extra != 1.0 {
                    *g *= extra;
                }
            }
        }
    }
    parts.data = projected.into_iter().map(|(m, _)| m).collect();
    parts.build()
}
