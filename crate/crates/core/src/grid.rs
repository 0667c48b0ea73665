use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on the centered box `[-L/2, L/2)^dim`.
///
/// Sample `i` along an axis sits at `(i - n/2) * spacing`, so the origin is
/// always a grid point. Only `dim`, `n_per_axis` and `box_length` are
/// serialized; the spacing is derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    dim: usize,
    n: usize,
    box_length: f64,
    spacing: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n_per_axis: usize,
    pub box_length: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.dim, s.n_per_axis, s.box_length)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            dim: g.dim,
            n_per_axis: g.n,
            box_length: g.box_length,
        }
    }
}

/// Builds a grid, validating dimension, size and box length.
pub fn make_grid(dim: usize, n_per_axis: usize, box_length: f64) -> Result<Grid> {
    Grid::new(dim, n_per_axis, box_length)
}

impl Grid {
    pub fn new(dim: usize, n_per_axis: usize, box_length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dim must be 1 or 2, got {dim}")));
        }
        if n_per_axis < 8 || !n_per_axis.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "n_per_axis must be a power of two >= 8, got {n_per_axis}"
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "box_length must be positive, got {box_length}"
            )));
        }
        Ok(Grid {
            dim,
            n: n_per_axis,
            box_length,
            spacing: box_length / n_per_axis as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of sample sites, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `spacing^dim` of the Riemann sum.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Per-axis Nyquist angular frequency `π / spacing`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing
    }

    /// Smallest nonzero lattice frequency `2π / L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Coordinate of axis index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing
    }

    /// Multi-index of a flat index (row-major, axis 0 slowest).
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    /// Position of a flat index.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.unflatten(flat);
        if self.dim == 1 {
            [self.coord(a), 0.0]
        } else {
            [self.coord(a), self.coord(b)]
        }
    }

    /// Flat index of the site reached from `flat` by the integer offset
    /// `off`, wrapping periodically.
    pub fn shifted(&self, flat: usize, off: [i64; 2]) -> usize {
        let n = self.n as i64;
        let [a, b] = self.unflatten(flat);
        let a2 = (a as i64 + off[0]).rem_euclid(n) as usize;
        if self.dim == 1 {
            a2
        } else {
            let b2 = (b as i64 + off[1]).rem_euclid(n) as usize;
            a2 * self.n + b2
        }
    }

    /// Signed lattice mode index for FFT bin `k` along an axis.
    pub fn mode(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Angular frequency vector of a flat FFT bin.
    pub fn frequency(&self, flat: usize) -> [f64; 2] {
        let w = self.fundamental();
        let [a, b] = self.unflatten(flat);
        if self.dim == 1 {
            [w * self.mode(a) as f64, 0.0]
        } else {
            [w * self.mode(a) as f64, w * self.mode(b) as f64]
        }
    }

    pub fn frequency_norm(&self, flat: usize) -> f64 {
        let [x, y] = self.frequency(flat);
        x.hypot(y)
    }

    /// All integer offsets `k` with `1 <= |k| <= radius_cells` (Euclidean),
    /// each axis component in `[-n/2, n/2]`.
    pub fn offsets_within(&self, radius_cells: f64) -> Vec<[i64; 2]> {
        let half = (self.n / 2) as i64;
        let r = radius_cells.floor() as i64;
        let lim = r.min(half);
        let r2 = radius_cells * radius_cells + 1e-9;
        let mut out = Vec::new();
        if self.dim == 1 {
            for a in -lim..=lim {
                if a != 0 {
                    out.push([a, 0]);
                }
            }
        } else {
            for a in -lim..=lim {
                for b in -lim..=lim {
                    if (a, b) != (0, 0) && ((a * a + b * b) as f64) <= r2 {
                        out.push([a, b]);
                    }
                }
            }
        }
        out
    }

    /// Short identifier for calibration fingerprints.
    pub fn fingerprint(&self) -> String {
        format!("d{}n{}L{}", self.dim, self.n, self.box_length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_follows_box_and_count() {
        let g = make_grid(1, 256, 16.0).unwrap();
        assert_eq!(g.spacing(), 0.0625);
        assert_eq!(g.spacing() * g.n_per_axis() as f64, g.box_length());
        let g2 = make_grid(2, 64, 8.0).unwrap();
        assert_eq!(g2.len(), 4096);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(make_grid(1, 100, 1.0).unwrap_err().code(), "invalid-argument");
        assert!(make_grid(3, 64, 1.0).is_err());
        assert!(make_grid(1, 4, 1.0).is_err());
        assert!(make_grid(1, 64, 0.0).is_err());
        assert!(make_grid(1, 64, -2.0).is_err());
    }

    #[test]
    fn origin_is_a_sample_and_modes_wrap() {
        let g = make_grid(1, 16, 4.0).unwrap();
        assert_eq!(g.coord(8), 0.0);
        assert_eq!(g.mode(0), 0);
        assert_eq!(g.mode(7), 7);
        assert_eq!(g.mode(8), -8);
        assert_eq!(g.mode(15), -1);
        assert_eq!(g.shifted(15, [1, 0]), 0);
        assert_eq!(g.shifted(0, [-1, 0]), 15);
    }

    #[test]
    fn serializes_without_spacing() {
        let g = make_grid(2, 32, 8.0).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"dim":2,"n_per_axis":32,"box_length":8.0}"#);
        let back: Grid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Grid>(r#"{"dim":1,"n_per_axis":12,"box_length":1}"#).is_err());
    }

    #[test]
    fn offsets_are_symmetric() {
        let g = make_grid(2, 16, 1.0).unwrap();
        let offs = g.offsets_within(3.0);
        for o in &offs {
            assert!(offs.contains(&[-o[0], -o[1]]));
        }
        assert_eq!(make_grid(1, 16, 1.0).unwrap().offsets_within(8.0).len(), 16);
    }
}
