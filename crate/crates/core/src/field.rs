//! Marked Poisson fields of transmitter/receiver dipoles on a disc window.
//!
//! Receivers form a homogeneous Poisson process of intensity `n` on a disc
//! window. Each transmitter sits at `rx + W` where `W` is uniform on a small
//! disc. Displacements that would leave the window are redrawn, which only
//! affects dipoles within `mark_radius` of the boundary.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::NetworkParams;
use crate::rng;

/// Radius of the disc of unit area, `1 / sqrt(pi)`.
pub const UNIT_DISC_RADIUS: f64 = FRAC_2_SQRT_PI / 2.0;

const FIELD_STREAM: u64 = 0xF1E1D;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dipole {
    pub index: usize,
    pub tx: Point2,
    pub rx: Point2,
}

/// One realization of the dipole process. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleField {
    dipoles: Vec<Dipole>,
    intensity: f64,
    region_radius: f64,
    seed: u64,
}

/// Uniform point in the disc of radius `radius` centred at the origin.
fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point2 {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point2::new(r * theta.cos(), r * theta.sin())
}

fn check_window(params: &NetworkParams) -> Result<()> {
    if !(params.n.is_finite() && params.n > 0.0) {
        return Err(Error::param(format!(
            "intensity must be positive, got {}",
            params.n
        )));
    }
    if !(params.window_area.is_finite() && params.window_area >= 1.0) {
        return Err(Error::param(format!(
            "window must cover at least one unit area, got {}",
            params.window_area
        )));
    }
    if !(params.mark_radius.is_finite() && params.mark_radius >= 0.0) {
        return Err(Error::param(format!(
            "mark radius must be nonnegative, got {}",
            params.mark_radius
        )));
    }
    Ok(())
}

/// Samples a field whose dipole count is Poisson(`n * window_area`).
pub fn sample_field(params: &NetworkParams, seed: u64) -> Result<DipoleField> {
    check_window(params)?;
    let mut rng = rng::stream(rng::derive_seed(seed, FIELD_STREAM));
    let mean = params.n * params.window_area;
    let count = Poisson::new(mean)
        .map_err(|e| Error::param(format!("poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    Ok(populate(params, seed, count, &mut rng))
}

/// Samples a field with exactly `count` dipoles (binomial rather than Poisson).
pub fn sample_field_fixed(params: &NetworkParams, seed: u64, count: usize) -> Result<DipoleField> {
    check_window(params)?;
    let mut rng = rng::stream(rng::derive_seed(seed, FIELD_STREAM));
    Ok(populate(params, seed, count, &mut rng))
}

fn populate(params: &NetworkParams, seed: u64, count: usize, rng: &mut rng::Stream) -> DipoleField {
    let radius = params.window_radius();
    let mut dipoles = Vec::with_capacity(count);
    for index in 0..count {
        let rx = uniform_in_disc(rng, radius);
        let tx = if params.mark_radius > 0.0 {
            loop {
                let w = uniform_in_disc(rng, params.mark_radius);
                let tx = Point2::new(rx.x + w.x, rx.y + w.y);
                if tx.norm() <= radius {
                    break tx;
                }
            }
        } else {
            rx
        };
        dipoles.push(Dipole { index, tx, rx });
    }
    DipoleField {
        dipoles,
        intensity: params.n,
        region_radius: radius,
        seed,
    }
}

impl DipoleField {
    /// Builds a field from explicit `(tx, rx)` positions; indices follow input order.
    pub fn from_positions(
        pairs: impl IntoIterator<Item = (Point2, Point2)>,
        intensity: f64,
        region_radius: f64,
    ) -> Result<Self> {
        if !(intensity > 0.0 && region_radius > 0.0) {
            return Err(Error::param("intensity and region radius must be positive"));
        }
        let mut dipoles = Vec::new();
        for (index, (tx, rx)) in pairs.into_iter().enumerate() {
            if !tx.is_finite() || !rx.is_finite() {
                return Err(Error::param(format!("dipole {index} has a non-finite coordinate")));
            }
            dipoles.push(Dipole { index, tx, rx });
        }
        Ok(DipoleField {
            dipoles,
            intensity,
            region_radius,
            seed: 0,
        })
    }

    /// Same field plus one extra dipole appended at the end (a "typical" point
    /// for Palm-style measurements).
    pub fn with_dipole(&self, tx: Point2, rx: Point2) -> (DipoleField, usize) {
        let mut out = self.clone();
        let index = out.dipoles.len();
        out.dipoles.push(Dipole { index, tx, rx });
        (out, index)
    }

    pub fn len(&self) -> usize {
        self.dipoles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dipoles.is_empty()
    }

    pub fn dipoles(&self) -> &[Dipole] {
        &self.dipoles
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn region_radius(&self) -> f64 {
        self.region_radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, index: usize) -> Result<&Dipole> {
        self.dipoles.get(index).ok_or(Error::Index {
            index,
            len: self.dipoles.len(),
        })
    }

    /// Indices `i != j` whose transmitter lies in the unit-area disc around receiver `j`.
    pub fn neighborhood(&self, j: usize) -> Result<Vec<usize>> {
        let centre = self.get(j)?.rx;
        Ok(self
            .dipoles
            .iter()
            .filter(|d| d.index != j && d.tx.distance(&centre) <= UNIT_DISC_RADIUS)
            .map(|d| d.index)
            .collect())
    }

    /// `|t_i - r_j|`.
    pub fn pair_distance(&self, i: usize, j: usize) -> Result<f64> {
        let tx = self.get(i)?.tx;
        let rx = self.get(j)?.rx;
        Ok(tx.distance(&rx))
    }

    pub fn transmitters_within(&self, centre: Point2, radius: f64) -> usize {
        self.dipoles
            .iter()
            .filter(|d| d.tx.distance(&centre) <= radius)
            .count()
    }

    /// True when a disc of radius `margin` around `p` stays inside the window.
    pub fn is_interior(&self, p: &Point2, margin: f64) -> bool {
        p.norm() + margin <= self.region_radius
    }

    pub fn transmitters(&self) -> impl Iterator<Item = Point2> + '_ {
        self.dipoles.iter().map(|d| d.tx)
    }

    pub fn receivers(&self) -> impl Iterator<Item = Point2> + '_ {
        self.dipoles.iter().map(|d| d.rx)
    }

    /// CSV dump: `index,tx_x,tx_y,rx_x,rx_y`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,tx_x,tx_y,rx_x,rx_y")?;
        for d in &self.dipoles {
            writeln!(out, "{},{},{},{},{}", d.index, d.tx.x, d.tx.y, d.rx.x, d.rx.y)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: f64) -> NetworkParams {
        NetworkParams {
            n,
            window_area: 4.0,
            ..NetworkParams::default()
        }
    }

    #[test]
    fn unit_disc_has_unit_area() {
        assert!((PI * UNIT_DISC_RADIUS * UNIT_DISC_RADIUS - 1.0).abs() < 1e-15);
        assert!((UNIT_DISC_RADIUS - 0.5641895835477563).abs() < 1e-15);
    }

    #[test]
    fn tiny_intensity_can_give_empty_field() {
        let p = NetworkParams {
            n: 1e-9,
            window_area: 1.0,
            ..NetworkParams::default()
        };
        let f = sample_field(&p, 3).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_field(&params(50.0), 11).unwrap();
        let b = sample_field(&params(50.0), 11).unwrap();
        let c = sample_field(&params(50.0), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn points_stay_in_window_and_marks_bounded() {
        let p = NetworkParams {
            mark_radius: 0.05,
            ..params(200.0)
        };
        let f = sample_field(&p, 5).unwrap();
        for d in f.dipoles() {
            assert!(d.rx.norm() <= f.region_radius() + 1e-12);
            assert!(d.tx.norm() <= f.region_radius() + 1e-12);
            assert!(d.tx.distance(&d.rx) <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(sample_field(&params(0.0), 1).is_err());
        let p = NetworkParams {
            window_area: 0.5,
            ..params(10.0)
        };
        assert!(sample_field(&p, 1).is_err());
    }

    #[test]
    fn neighborhood_of_single_dipole_is_empty() {
        let f = DipoleField::from_positions([(Point2::ORIGIN, Point2::ORIGIN)], 1.0, 1.0).unwrap();
        assert!(f.neighborhood(0).unwrap().is_empty());
    }

    #[test]
    fn neighborhood_uses_unit_area_disc() {
        let f = DipoleField::from_positions(
            [
                (Point2::ORIGIN, Point2::ORIGIN),
                (Point2::new(0.3, 0.0), Point2::new(0.3, 0.0)),
                (Point2::new(0.0, 0.9), Point2::new(0.0, 0.9)),
            ],
            1.0,
            2.0,
        )
        .unwrap();
        assert_eq!(f.neighborhood(0).unwrap(), vec![1]);
        assert!(matches!(f.neighborhood(3), Err(Error::Index { index: 3, len: 3 })));
    }

    #[test]
    fn pair_distance_cases() {
        let f = DipoleField::from_positions(
            [
                (Point2::new(3.0, 4.0), Point2::new(1.0, 1.0)),
                (Point2::new(7.0, 7.0), Point2::ORIGIN),
                (Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)),
            ],
            1.0,
            10.0,
        )
        .unwrap();
        assert_eq!(f.pair_distance(0, 1).unwrap(), 5.0);
        assert_eq!(f.pair_distance(2, 0).unwrap(), 0.0);
        assert!(f.pair_distance(0, 9).is_err());
        // swapping which point plays tx and rx leaves the norm unchanged
        let g = DipoleField::from_positions(
            [
                (Point2::new(1.0, 1.0), Point2::new(3.0, 4.0)),
                (Point2::ORIGIN, Point2::new(7.0, 7.0)),
            ],
            1.0,
            10.0,
        )
        .unwrap();
        assert_eq!(g.pair_distance(1, 0).unwrap(), f.pair_distance(0, 1).unwrap());
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let f = sample_field(&params(2.0), 9).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,tx_x,tx_y,rx_x,rx_y"));
        assert_eq!(lines.count(), f.len());
    }
}
