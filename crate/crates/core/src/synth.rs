//! Seeded synthetic Mueller matrices and cubes with known parameters, used
//! as oracles by tests, benchmarks and the `synth` command.

use std::f64::consts::PI;

use crate::error::Result;
use crate::evalkit::ShuffleRng;
use crate::polcore::{
    compose, make_diagonal_depolarizer, make_diattenuator, make_retarder, MuellerCube, MuellerMatrix,
};

/// Generating parameters of `M_Δ·M_R·M_D` with a diagonal depolarizer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Composition {
    pub depolarizer: [f64; 3],
    pub retarder_axis: [f64; 3],
    pub retardance: f64,
    pub diattenuation_vec: [f64; 3],
}

impl Composition {
    pub fn matrix(&self) -> MuellerMatrix {
        let [a, b, c] = self.depolarizer;
        compose(
            &make_diagonal_depolarizer(a, b, c),
            &make_retarder(self.retarder_axis, self.retardance),
            &make_diattenuator(self.diattenuation_vec).expect("|D| ≤ 1 by construction"),
        )
    }

    pub fn depolarization(&self) -> f64 {
        let [a, b, c] = self.depolarizer;
        1.0 - (a + b + c).abs() / 3.0
    }

    pub fn diattenuation(&self) -> f64 {
        let d = self.diattenuation_vec;
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Whether `diag(1, a, b, c)` has a positive semidefinite coherency matrix.
pub fn diagonal_is_physical(a: f64, b: f64, c: f64) -> bool {
    [1.0 + a + b + c, 1.0 + a - b - c, 1.0 - a + b - c, 1.0 - a - b + c]
        .iter()
        .all(|&x| x >= 0.0)
}

fn unit_vector(rng: &mut ShuffleRng) -> [f64; 3] {
    let z = rng.uniform(-1.0, 1.0);
    let phi = rng.uniform(0.0, 2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Physical composition: depolarizer entries in `[0.3, 1]` (redrawn until
/// the diagonal is physical), retarder with a uniform axis and retardance
/// in `[0.1, π−0.1]`, diattenuation vector with `|D| ≤ 0.8`.
pub fn random_composition(rng: &mut ShuffleRng) -> Composition {
    let depolarizer = loop {
        let d = [rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)];
        if diagonal_is_physical(d[0], d[1], d[2]) {
            break d;
        }
    };
    let retarder_axis = unit_vector(rng);
    let retardance = rng.uniform(0.1, PI - 0.1);
    let dir = unit_vector(rng);
    let mag = rng.uniform(0.0, 0.8);
    Composition {
        depolarizer,
        retarder_axis,
        retardance,
        diattenuation_vec: dir.map(|x| x * mag),
    }
}

/// Matrix with every entry uniform in `[−1, 1]`; almost always unphysical.
pub fn random_entries(rng: &mut ShuffleRng) -> MuellerMatrix {
    let mut m = MuellerMatrix::ZERO;
    m.0.iter_mut().flatten().for_each(|x| *x = rng.uniform(-1.0, 1.0));
    m
}

/// Cube of [`random_composition`] pixels with a random gain in `[0.5, 2]`,
/// drawn in storage order from one generator.
pub fn random_physical_cube(height: usize, width: usize, wavelengths: Vec<f32>, seed: u64) -> Result<MuellerCube> {
    let mut rng = ShuffleRng::new(seed);
    let n = height * width * wavelengths.len();
    let data = (0..n)
        .map(|_| {
            let m = random_composition(&mut rng).matrix();
            m.scale(rng.uniform(0.5, 2.0))
        })
        .collect();
    MuellerCube::new(height, width, wavelengths, data)
}

/// Left half `diag(1, .6, .5, .4)` (physical), right half
/// `diag(1, .9, .9, −.9)` (unphysical, λ_min = −0.425).
pub fn unphysical_tile_cube(height: usize, width: usize, wavelengths: Vec<f32>) -> Result<MuellerCube> {
    MuellerCube::from_fn(height, width, wavelengths, |_, _, c| {
        if c < width.div_ceil(2) {
            make_diagonal_depolarizer(0.6, 0.5, 0.4)
        } else {
            make_diagonal_depolarizer(0.9, 0.9, -0.9)
        }
    })
}
