//! Lu-Chipman polar decomposition `M = M_Δ · M_R · M_D` and batched
//! production of depolarization / retardance / diattenuation maps.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, inv3, jacobi_symmetric, mul3, transpose3, Mat3, IDENTITY3};
use crate::par;
use crate::polcore::{self, MuellerCube, MuellerMatrix};
use crate::realizability::{self, DEFAULT_CLIP, DEFAULT_TOL_PHYS};

/// Per-pixel outcome of the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum PixelStatus {
    #[default]
    Ok = 0,
    /// `D ≥ 1 − d_singular_eps`; `R` and `Δ` are reported as 0.
    DegenerateDiattenuator = 1,
    /// `|det m'| < det_eps`; retarder set to identity, `R = 0`.
    SingularDepolarizer = 2,
    /// Input failed the physicality test (projection disabled), or could
    /// not be decomposed at all (zero intensity, non-finite entries).
    UnphysicalInput = 3,
}

impl PixelStatus {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => PixelStatus::Ok,
            1 => PixelStatus::DegenerateDiattenuator,
            2 => PixelStatus::SingularDepolarizer,
            3 => PixelStatus::UnphysicalInput,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            PixelStatus::Ok => "OK",
            PixelStatus::DegenerateDiattenuator => "DEGENERATE_DIATTENUATOR",
            PixelStatus::SingularDepolarizer => "SINGULAR_DEPOLARIZER",
            PixelStatus::UnphysicalInput => "UNPHYSICAL_INPUT",
        }
    }
}

impl fmt::Display for PixelStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum WavelengthSelection {
    #[default]
    All,
    Indices(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecomposeOptions {
    pub project_unphysical: bool,
    pub d_singular_eps: f64,
    pub det_eps: f64,
    /// Target for clipped coherency eigenvalues when projecting.
    pub clip: f64,
    pub tol_phys: f64,
    pub wavelengths: WavelengthSelection,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            project_unphysical: true,
            d_singular_eps: 1e-9,
            det_eps: 1e-12,
            clip: DEFAULT_CLIP,
            tol_phys: DEFAULT_TOL_PHYS,
            wavelengths: WavelengthSelection::All,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorMagnitude {
    pub magnitude: f64,
    pub vector: [f64; 3],
    /// The raw magnitude reached or exceeded 1 and was clamped.
    pub clamped: bool,
}

fn clamped_magnitude(vector: [f64; 3]) -> VectorMagnitude {
    let raw = polcore::norm3(&vector);
    VectorMagnitude {
        magnitude: raw.clamp(0.0, 1.0),
        vector,
        clamped: raw >= 1.0,
    }
}

/// `D_vec = (m01, m02, m03)` of a normalized matrix.
pub fn diattenuation(m: &MuellerMatrix) -> VectorMagnitude {
    clamped_magnitude([m.m(0, 1), m.m(0, 2), m.m(0, 3)])
}

/// `P_vec = (m10, m20, m30)` of a normalized matrix.
pub fn polarizance(m: &MuellerMatrix) -> VectorMagnitude {
    clamped_magnitude([m.m(1, 0), m.m(2, 0), m.m(3, 0)])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LuChipmanPixel {
    /// `D ∈ [0, 1]`.
    pub diattenuation: f64,
    /// `R ∈ [0, π]`, radians.
    pub retardance: f64,
    /// `Δ ∈ [0, 1]`.
    pub depolarization: f64,
    pub diattenuation_vec: [f64; 3],
    pub polarizance_vec: [f64; 3],
    pub diattenuator: MuellerMatrix,
    pub retarder: MuellerMatrix,
    pub depolarizer: MuellerMatrix,
    pub status: PixelStatus,
    pub diattenuation_clamped: bool,
}

impl LuChipmanPixel {
    /// `(Δ, R, D)`.
    pub fn scalars(&self) -> (f64, f64, f64) {
        (self.depolarization, self.retardance, self.diattenuation)
    }
}

pub fn decompose_pixel(m: &MuellerMatrix, opts: &DecomposeOptions) -> Result<LuChipmanPixel> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let (mut m, _) = polcore::normalize(m)?;
    let mut input_unphysical = false;
    if opts.project_unphysical {
        let (projected, report) = realizability::project_physical_with(&m, opts.clip, opts.tol_phys)?;
        if !report.physical {
            m = polcore::normalize(&projected)?.0;
        }
    } else {
        input_unphysical = !realizability::is_physical(&m, opts.tol_phys)?.physical;
    }

    let d = diattenuation(&m);
    let p = polarizance(&m);
    let mut px = LuChipmanPixel {
        diattenuation: d.magnitude,
        retardance: 0.0,
        depolarization: 0.0,
        diattenuation_vec: d.vector,
        polarizance_vec: p.vector,
        diattenuator: MuellerMatrix::IDENTITY,
        retarder: MuellerMatrix::IDENTITY,
        depolarizer: MuellerMatrix::IDENTITY,
        status: PixelStatus::Ok,
        diattenuation_clamped: d.clamped,
    };

    if d.magnitude >= 1.0 - opts.d_singular_eps {
        let raw = polcore::norm3(&d.vector);
        let unit = if raw > 1.0 { d.vector.map(|x| x / raw) } else { d.vector };
        px.diattenuator = polcore::make_diattenuator(unit).unwrap_or(MuellerMatrix::IDENTITY);
        px.status = PixelStatus::DegenerateDiattenuator;
        return Ok(px);
    }

    let dv = d.vector;
    let d2 = d.magnitude * d.magnitude;
    let md_block = polcore::diattenuator_block(&dv, d.magnitude);
    px.diattenuator = MuellerMatrix::from_blocks(dv, dv, md_block);
    // M_D⁻¹ = [[1, −Dᵀ], [−D, m_D]] / (1 − D²)
    let inv_d = MuellerMatrix::from_blocks(dv.map(|x| -x), dv.map(|x| -x), md_block).scale(1.0 / (1.0 - d2));
    let m_prime = (m * inv_d).sub3();

    let lower = m.sub3();
    let p_delta: [f64; 3] = std::array::from_fn(|i| {
        let md: f64 = (0..3).map(|j| lower[i][j] * dv[j]).sum();
        (p.vector[i] - md) / (1.0 - d2)
    });

    let mmt = mul3(&m_prime, &transpose3(&m_prime));
    let eig = jacobi_symmetric(&mmt, true)?;
    let lambda = eig.values.map(|x| x.max(0.0));
    let det = linalg::det3(&m_prime);

    let factored = if det.abs() < opts.det_eps {
        None
    } else {
        depolarizer_closed_form(&mmt, &lambda, det.signum()).and_then(|m_delta| {
            let m_r = mul3(&inv3(&m_delta)?, &m_prime);
            m_r.iter().flatten().all(|x| x.is_finite()).then_some((m_delta, m_r))
        })
    };

    let (m_delta, m_r) = match factored {
        Some(pair) => pair,
        None => {
            px.status = PixelStatus::SingularDepolarizer;
            (spectral_sqrt(&lambda, &eig.vectors), IDENTITY3)
        }
    };

    px.depolarization = (1.0 - linalg::trace3(&m_delta).abs() / 3.0).clamp(0.0, 1.0);
    px.retardance = if px.status == PixelStatus::Ok {
        let cos_r = ((linalg::trace3(&m_r) + 1.0) / 2.0 - 1.0).clamp(-1.0, 1.0);
        cos_r.acos()
    } else {
        0.0
    };
    px.retarder = MuellerMatrix::from_blocks([0.0; 3], [0.0; 3], m_r);
    px.depolarizer = MuellerMatrix::from_blocks([0.0; 3], p_delta, m_delta);

    if input_unphysical && px.status == PixelStatus::Ok {
        px.status = PixelStatus::UnphysicalInput;
    }
    Ok(px)
}

/// `m_Δ = ±[m'm'ᵀ + (√λ₁λ₂ + √λ₂λ₃ + √λ₃λ₁)·I]⁻¹·[(√λ₁ + √λ₂ + √λ₃)·m'm'ᵀ + √(λ₁λ₂λ₃)·I]`.
fn depolarizer_closed_form(mmt: &Mat3, lambda: &[f64; 3], sign: f64) -> Option<Mat3> {
    let [l1, l2, l3] = *lambda;
    let s1 = l1.sqrt() + l2.sqrt() + l3.sqrt();
    let s2 = (l1 * l2).sqrt() + (l2 * l3).sqrt() + (l3 * l1).sqrt();
    let s3 = (l1 * l2 * l3).sqrt();
    let mut bracket = *mmt;
    let mut numer = [[0.0; 3]; 3];
    for i in 0..3 {
        bracket[i][i] += s2;
        for j in 0..3 {
            numer[i][j] = s1 * mmt[i][j];
        }
        numer[i][i] += s3;
    }
    let out = mul3(&inv3(&bracket)?, &numer);
    let out = out.map(|row| row.map(|x| sign * x));
    out.iter().flatten().all(|x| x.is_finite()).then_some(out)
}

/// `Σ √λₖ uₖuₖᵀ`, the positive square root of `m'm'ᵀ`.
fn spectral_sqrt(lambda: &[f64; 3], vectors: &[[f64; 3]; 3]) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (l, u) in lambda.iter().zip(vectors) {
        let s = l.sqrt();
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += s * u[i] * u[j];
            }
        }
    }
    out
}

/// `M_Δ · M_R · M_D` for a pixel with status OK or UNPHYSICAL_INPUT.
pub fn reconstruct(px: &LuChipmanPixel) -> Result<MuellerMatrix> {
    match px.status {
        PixelStatus::DegenerateDiattenuator | PixelStatus::SingularDepolarizer => {
            Err(Error::DegenerateNoReconstruction(px.status.name()))
        }
        _ => Ok(polcore::compose(&px.depolarizer, &px.retarder, &px.diattenuator)),
    }
}

/// Δ, R, D and status planes for one wavelength, each `H·W` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterPlanes {
    pub depolarization: Vec<f64>,
    pub retardance: Vec<f64>,
    pub diattenuation: Vec<f64>,
    pub status: Vec<PixelStatus>,
}

impl ParameterPlanes {
    pub fn zeros(len: usize) -> Self {
        ParameterPlanes {
            depolarization: vec![0.0; len],
            retardance: vec![0.0; len],
            diattenuation: vec![0.0; len],
            status: vec![PixelStatus::Ok; len],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LuChipmanMaps {
    pub height: usize,
    pub width: usize,
    pub wavelengths: Vec<f32>,
    /// One entry per wavelength, parallel to `wavelengths`.
    pub planes: Vec<ParameterPlanes>,
}

impl LuChipmanMaps {
    pub fn validate(&self) -> Result<()> {
        if self.planes.len() != self.wavelengths.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} plane sets for {} wavelengths",
                self.planes.len(),
                self.wavelengths.len()
            )));
        }
        let n = self.height * self.width;
        for p in &self.planes {
            if [p.depolarization.len(), p.retardance.len(), p.diattenuation.len(), p.status.len()]
                .iter()
                .any(|&l| l != n)
            {
                return Err(Error::DimensionMismatch(format!("plane length differs from {n}")));
            }
        }
        Ok(())
    }
}

/// Decomposes every selected `(wavelength, pixel)`. Pixels that cannot be
/// decomposed at all get status UNPHYSICAL_INPUT and zero parameters.
pub fn decompose_cube(cube: &MuellerCube, opts: &DecomposeOptions) -> Result<LuChipmanMaps> {
    if let Some(mask) = cube.mask() {
        return Err(Error::MaskedInput { mask: mask.bits });
    }
    let selected: Vec<usize> = match &opts.wavelengths {
        WavelengthSelection::All => (0..cube.n_wavelengths()).collect(),
        WavelengthSelection::Indices(ix) => {
            if let Some(bad) = ix.iter().find(|&&i| i >= cube.n_wavelengths()) {
                return Err(Error::DimensionMismatch(format!(
                    "wavelength index {bad} out of range (cube has {})",
                    cube.n_wavelengths()
                )));
            }
            ix.clone()
        }
    };
    let plane = cube.plane_len();
    let results = par::map_indexed(selected.len() * plane, |k| {
        let m = &cube.data()[selected[k / plane] * plane + k % plane];
        match decompose_pixel(m, opts) {
            Ok(px) => (px.depolarization, px.retardance, px.diattenuation, px.status),
            Err(_) => (0.0, 0.0, 0.0, PixelStatus::UnphysicalInput),
        }
    });
    let planes = results
        .chunks(plane)
        .map(|chunk| ParameterPlanes {
            depolarization: chunk.iter().map(|r| r.0).collect(),
            retardance: chunk.iter().map(|r| r.1).collect(),
            diattenuation: chunk.iter().map(|r| r.2).collect(),
            status: chunk.iter().map(|r| r.3).collect(),
        })
        .collect();
    Ok(LuChipmanMaps {
        height: cube.height(),
        width: cube.width(),
        wavelengths: selected.iter().map(|&i| cube.wavelengths()[i]).collect(),
        planes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polcore::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

    fn opts() -> DecomposeOptions {
        DecomposeOptions::default()
    }

    #[test]
    fn diattenuation_examples() {
        let d = diattenuation(&MuellerMatrix::IDENTITY);
        assert_eq!((d.magnitude, d.vector, d.clamped), (0.0, [0.0; 3], false));
        let d = diattenuation(&make_diattenuator([0.6, 0.0, 0.0]).unwrap());
        assert_eq!(d.magnitude, 0.6);
        assert_eq!(d.vector, [0.6, 0.0, 0.0]);
        let mut top = MuellerMatrix::IDENTITY;
        top.0[0] = [1.0, 0.6, 0.8, 0.0];
        let d = diattenuation(&top);
        assert_eq!(d.magnitude, 1.0);
        assert!(d.clamped);
    }

    #[test]
    fn polarizance_examples() {
        assert_eq!(polarizance(&MuellerMatrix::IDENTITY).magnitude, 0.0);
        let p = polarizance(&make_diattenuator([0.6, 0.0, 0.0]).unwrap().transpose());
        assert_eq!((p.magnitude, p.vector), (0.6, [0.6, 0.0, 0.0]));
        let p = polarizance(&make_diagonal_depolarizer(0.3, -0.2, 0.9));
        assert_eq!((p.magnitude, p.vector), (0.0, [0.0; 3]));
    }

    #[test]
    fn identity_decomposes_to_zero() {
        let px = decompose_pixel(&MuellerMatrix::IDENTITY, &opts()).unwrap();
        assert_eq!(px.scalars(), (0.0, 0.0, 0.0));
        assert_eq!(px.status, PixelStatus::Ok);
        assert_eq!(reconstruct(&px).unwrap(), MuellerMatrix::IDENTITY);
    }

    #[test]
    fn diagonal_depolarizer() {
        let px = decompose_pixel(&make_diagonal_depolarizer(0.6, 0.5, 0.4), &opts()).unwrap();
        assert!((px.depolarization - 0.5).abs() < 1e-12);
        assert_eq!(px.diattenuation, 0.0);
        assert!(px.retardance.abs() < 1e-7);
    }

    #[test]
    fn quarter_wave_plate() {
        let px = decompose_pixel(&make_linear_retarder(0.0, FRAC_PI_2), &opts()).unwrap();
        assert!((px.retardance - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(px.diattenuation, 0.0);
        assert!(px.depolarization.abs() < 1e-12);
    }

    #[test]
    fn composed_oracle() {
        let m = compose(
            &make_diagonal_depolarizer(0.7, 0.6, 0.5),
            &make_linear_retarder(FRAC_PI_8, 1.0),
            &make_diattenuator([0.3, 0.1, 0.0]).unwrap(),
        );
        let px = decompose_pixel(&m, &opts()).unwrap();
        assert_eq!(px.status, PixelStatus::Ok);
        assert!((px.depolarization - 0.4).abs() < 1e-8);
        assert!((px.retardance - 1.0).abs() < 1e-8);
        assert!((px.diattenuation - 0.1f64.sqrt()).abs() < 1e-8);
        assert!(reconstruct(&px).unwrap().max_abs_diff(&m) < 1e-8);
    }

    #[test]
    fn ideal_polarizer_is_degenerate_and_finite() {
        let pol = MuellerMatrix([
            [0.5, 0.5, 0.0, 0.0],
            [0.5, 0.5, 0.0, 0.0],
            [0.0; 4],
            [0.0; 4],
        ]);
        let px = decompose_pixel(&pol, &opts()).unwrap();
        assert_eq!(px.status, PixelStatus::DegenerateDiattenuator);
        assert_eq!(px.diattenuation, 1.0);
        assert_eq!((px.retardance, px.depolarization), (0.0, 0.0));
        assert!(px.diattenuator.is_finite() && px.depolarizer.is_finite());
        assert!(matches!(reconstruct(&px), Err(Error::DegenerateNoReconstruction(_))));
    }

    #[test]
    fn ideal_depolarizer_is_singular_and_finite() {
        let px = decompose_pixel(&make_diagonal_depolarizer(0.0, 0.0, 0.0), &opts()).unwrap();
        assert_eq!(px.status, PixelStatus::SingularDepolarizer);
        assert_eq!(px.depolarization, 1.0);
        assert_eq!(px.retardance, 0.0);
        assert!(px.depolarizer.is_finite());
        // Rank-one m'.
        let px = decompose_pixel(&make_diagonal_depolarizer(0.5, 0.0, 0.0), &opts()).unwrap();
        assert_eq!(px.status, PixelStatus::SingularDepolarizer);
        assert!((px.depolarization - (1.0 - 0.5 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_spectral_sqrt() {
        // Independent route: eigenvector square root of m'm'ᵀ.
        let m_prime = [[0.7, 0.1, -0.2], [0.05, 0.5, 0.1], [0.0, -0.1, 0.6]];
        let mmt = mul3(&m_prime, &transpose3(&m_prime));
        let e = jacobi_symmetric(&mmt, true).unwrap();
        let closed = depolarizer_closed_form(&mmt, &e.values, 1.0).unwrap();
        let spectral = spectral_sqrt(&e.values, &e.vectors);
        for i in 0..3 {
            for j in 0..3 {
                assert!((closed[i][j] - spectral[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn negative_determinant_depolarizer() {
        // Physical (coherency spectrum 0.35, 0.3, 0.25, 0.1) with det m' < 0.
        let m = make_diagonal_depolarizer(0.3, 0.2, -0.1);
        let px = decompose_pixel(&m, &opts()).unwrap();
        assert_eq!(px.status, PixelStatus::Ok);
        assert!(is_in_range(&px));
        assert!(reconstruct(&px).unwrap().max_abs_diff(&m) < 1e-12);
        // m_Δ = −diag(.3,.2,.1), m_R = diag(−1,−1,1): a half-turn.
        assert!((px.depolarization - 0.8).abs() < 1e-12);
        assert!((px.retardance - PI).abs() < 1e-7);
    }

    fn is_in_range(px: &LuChipmanPixel) -> bool {
        (0.0..=1.0).contains(&px.diattenuation)
            && (0.0..=PI).contains(&px.retardance)
            && (0.0..=1.0).contains(&px.depolarization)
    }

    #[test]
    fn unphysical_without_projection_is_flagged() {
        let m = make_diagonal_depolarizer(0.9, 0.9, -0.9);
        let no_proj = DecomposeOptions { project_unphysical: false, ..opts() };
        let px = decompose_pixel(&m, &no_proj).unwrap();
        assert_eq!(px.status, PixelStatus::UnphysicalInput);
        assert!(is_in_range(&px));
        let px = decompose_pixel(&m, &opts()).unwrap();
        assert_eq!(px.status, PixelStatus::Ok);
    }

    #[test]
    fn errors_for_bad_input() {
        let mut nan = MuellerMatrix::IDENTITY;
        nan[(1, 2)] = f64::INFINITY;
        assert!(matches!(decompose_pixel(&nan, &opts()), Err(Error::NonFinite)));
        assert!(matches!(
            decompose_pixel(&MuellerMatrix::ZERO, &opts()),
            Err(Error::M00NonPositive { .. })
        ));
    }

    #[test]
    fn cube_examples() {
        let ident = MuellerCube::filled(2, 2, vec![500.0], MuellerMatrix::IDENTITY).unwrap();
        let maps = decompose_cube(&ident, &opts()).unwrap();
        maps.validate().unwrap();
        let p = &maps.planes[0];
        assert!(p.depolarization.iter().chain(&p.retardance).chain(&p.diattenuation).all(|&x| x == 0.0));
        assert!(p.status.iter().all(|&s| s == PixelStatus::Ok));

        let dark = MuellerCube::from_fn(2, 2, vec![500.0], |_, r, c| {
            if (r, c) == (1, 0) { MuellerMatrix::ZERO } else { make_diagonal_depolarizer(0.6, 0.5, 0.4) }
        })
        .unwrap();
        let maps = decompose_cube(&dark, &opts()).unwrap();
        let p = &maps.planes[0];
        assert_eq!(p.status[2], PixelStatus::UnphysicalInput);
        assert_eq!(p.depolarization[2], 0.0);
        for k in [0, 1, 3] {
            assert_eq!(p.status[k], PixelStatus::Ok);
            assert!((p.depolarization[k] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn wavelength_selection() {
        let cube = MuellerCube::from_fn(1, 1, vec![450.0, 550.0, 650.0], |l, _, _| {
            make_diagonal_depolarizer(0.9 - 0.2 * l as f64, 0.5, 0.4)
        })
        .unwrap();
        let sel = DecomposeOptions { wavelengths: WavelengthSelection::Indices(vec![2]), ..opts() };
        let maps = decompose_cube(&cube, &sel).unwrap();
        assert_eq!(maps.wavelengths, vec![650.0]);
        assert!((maps.planes[0].depolarization[0] - (1.0 - 1.4 / 3.0)).abs() < 1e-12);
        let bad = DecomposeOptions { wavelengths: WavelengthSelection::Indices(vec![3]), ..opts() };
        assert!(matches!(decompose_cube(&cube, &bad), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn status_codes_round_trip() {
        for s in [
            PixelStatus::Ok,
            PixelStatus::DegenerateDiattenuator,
            PixelStatus::SingularDepolarizer,
            PixelStatus::UnphysicalInput,
        ] {
            assert_eq!(PixelStatus::from_code(s.code()), Some(s));
        }
        assert_eq!(PixelStatus::from_code(9), None);
    }
}
