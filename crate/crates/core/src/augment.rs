//! Rotation augmentation for Mueller cubes, the matching shortcut on
//! Lu-Chipman maps, and element masking for reduced acquisition setups.
//!
//! Only exact transforms are supported: quarter turns and mirror flips.
//! Rotating the image by 90° rotates the polarization frame by 90°, whose
//! Stokes operator is `R(π/2) = diag(1, −1, −1, 1)`; a mirror flips the
//! sign of `U` and `V`, i.e. conjugation by `diag(1, 1, −1, −1)`. Both are
//! sign flips, so the frame part of a cube transform is exact.

use crate::error::Result;
use crate::luchipman::{LuChipmanMaps, ParameterPlanes};
use crate::par;
use crate::polcore::{make_rotator, ElementMask, MuellerCube, MuellerMatrix};

/// Counter-clockwise rotation in multiples of 90°.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum QuarterTurn {
    #[default]
    Deg0,
    Deg90,
    Deg180,
    Deg270,
}

impl QuarterTurn {
    pub const ALL: [QuarterTurn; 4] = [Self::Deg0, Self::Deg90, Self::Deg180, Self::Deg270];

    pub fn from_degrees(deg: i64) -> Option<Self> {
        match deg.rem_euclid(360) {
            0 => Some(Self::Deg0),
            90 => Some(Self::Deg90),
            180 => Some(Self::Deg180),
            270 => Some(Self::Deg270),
            _ => None,
        }
    }

    pub fn turns(self) -> usize {
        self as usize
    }
}

/// Mirror flips (applied first) followed by a counter-clockwise rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct SpatialTransform {
    pub rotation: QuarterTurn,
    /// Mirror left-right.
    pub flip_h: bool,
    /// Mirror top-bottom.
    pub flip_v: bool,
}

impl SpatialTransform {
    pub const IDENTITY: SpatialTransform = SpatialTransform {
        rotation: QuarterTurn::Deg0,
        flip_h: false,
        flip_v: false,
    };

    pub fn rotate(rotation: QuarterTurn) -> Self {
        SpatialTransform { rotation, ..Self::IDENTITY }
    }

    /// The eight distinct transforms of the square's symmetry group.
    pub fn all() -> [SpatialTransform; 8] {
        std::array::from_fn(|k| SpatialTransform {
            rotation: QuarterTurn::ALL[k % 4],
            flip_h: k >= 4,
            flip_v: false,
        })
    }

    pub fn output_dims(&self, height: usize, width: usize) -> (usize, usize) {
        if self.rotation.turns() % 2 == 1 {
            (width, height)
        } else {
            (height, width)
        }
    }

    /// Source pixel for output pixel `(row, col)` of an `height × width` input.
    pub fn source_of(&self, row: usize, col: usize, height: usize, width: usize) -> (usize, usize) {
        let (r, c) = match self.rotation {
            QuarterTurn::Deg0 => (row, col),
            QuarterTurn::Deg90 => (col, width - 1 - row),
            QuarterTurn::Deg180 => (height - 1 - row, width - 1 - col),
            QuarterTurn::Deg270 => (height - 1 - col, row),
        };
        let r = if self.flip_v { height - 1 - r } else { r };
        let c = if self.flip_h { width - 1 - c } else { c };
        (r, c)
    }

    /// Diagonal of the sign operator `S` with `M ↦ S·M·S`.
    pub fn frame_signs(&self) -> [f64; 4] {
        let mut s = [1.0; 4];
        if self.rotation.turns() % 2 == 1 {
            s[1] = -s[1];
            s[2] = -s[2];
        }
        if self.flip_h != self.flip_v {
            s[2] = -s[2];
            s[3] = -s[3];
        }
        s
    }

    /// Output index → source index permutation for one plane.
    fn permutation(&self, height: usize, width: usize) -> Vec<usize> {
        let (oh, ow) = self.output_dims(height, width);
        let mut perm = Vec::with_capacity(oh * ow);
        for r in 0..oh {
            for c in 0..ow {
                let (sr, sc) = self.source_of(r, c, height, width);
                perm.push(sr * width + sc);
            }
        }
        perm
    }
}

/// Rotates the element by `theta`: `R(−θ)·M·R(θ)`, so a retarder with
/// axis `φ` becomes one with axis `φ + θ`.
pub fn rotate_frame(m: &MuellerMatrix, theta: f64) -> MuellerMatrix {
    make_rotator(-theta) * *m * make_rotator(theta)
}

fn conjugate_signs(m: &MuellerMatrix, s: &[f64; 4]) -> MuellerMatrix {
    let mut out = *m;
    for i in 0..4 {
        for j in 0..4 {
            out.0[i][j] *= s[i] * s[j];
        }
    }
    out
}

/// Spatially permutes the cube and applies the matching frame operator to
/// every matrix. The `m(0,0)` plane moves with its pixels.
pub fn rotate_cube(cube: &MuellerCube, t: SpatialTransform) -> Result<MuellerCube> {
    let (h, w) = (cube.height(), cube.width());
    let (oh, ow) = t.output_dims(h, w);
    let perm = t.permutation(h, w);
    let plane = h * w;
    let signs = t.frame_signs();
    let data = par::map_indexed(cube.data().len(), |k| {
        let (l, p) = (k / plane, k % plane);
        conjugate_signs(&cube.data()[l * plane + perm[p]], &signs)
    });
    let mut parts = cube.clone().into_parts();
    parts.m00_plane = parts
        .m00_plane
        .map(|g| (0..g.len()).map(|k| g[(k / plane) * plane + perm[k % plane]]).collect());
    parts.height = oh;
    parts.width = ow;
    parts.data = data;
    parts.build()
}

/// Applies `t` to the parameter maps by permutation alone: Δ, R and D do
/// not depend on the viewing direction, so no values change.
pub fn augment_params(maps: &LuChipmanMaps, t: SpatialTransform) -> LuChipmanMaps {
    let (h, w) = (maps.height, maps.width);
    let (oh, ow) = t.output_dims(h, w);
    let perm = t.permutation(h, w);
    fn permute<T: Copy>(v: &[T], perm: &[usize]) -> Vec<T> {
        perm.iter().map(|&i| v[i]).collect()
    }
    LuChipmanMaps {
        height: oh,
        width: ow,
        wavelengths: maps.wavelengths.clone(),
        planes: maps
            .planes
            .iter()
            .map(|p| ParameterPlanes {
                depolarization: permute(&p.depolarization, &perm),
                retardance: permute(&p.retardance, &perm),
                diattenuation: permute(&p.diattenuation, &perm),
                status: permute(&p.status, &perm),
            })
            .collect(),
    }
}

/// Replaces unmeasured elements with `fill`. The cube's recorded mask
/// becomes the intersection of its previous mask and `mask`.
pub fn apply_mask(cube: &MuellerCube, mask: ElementMask, fill: f64) -> Result<MuellerCube> {
    let combined = match cube.mask() {
        Some(prev) => prev.intersect(&mask),
        None => mask,
    };
    if combined.is_full() {
        return Ok(cube.clone());
    }
    let mut parts = cube.clone().into_parts();
    parts.data = par::map_indexed(cube.data().len(), |k| combined.apply(&cube.data()[k], fill));
    parts.mask = Some(combined);
    // Masking m(0,0) breaks the normalization invariant.
    if !combined.contains(0, 0) {
        parts.normalized = false;
    }
    parts.build()
}
