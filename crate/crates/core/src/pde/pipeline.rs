//! Capacity of a pair of curves on S³: choose a chart, rasterize tubes, solve.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Rotation3, Unit};
use serde::Serialize;

use super::grid::{rasterize_sets, CondenserSet, GridBox};
use super::solver::{solve_capacity, CapacityResult, SolverSettings};
use super::PdeError;
use crate::geometry::{CurveS3, EuclideanPoint, PointS3, StereoChart, Vec3};
use crate::topology::chart_avoiding;

/// How curves on S³ are placed in ℝ³.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ChartChoice {
    /// Pole `(i, 0)`: `H₀` is the z-axis and `H₁` the unit circle.
    Default,
    /// Pole on the circle `{z1 = z2}` of the Clifford torus, rotated so that the swap
    /// `(z1, z2) ↦ (z2, z1)` is the half-turn about the z-axis.
    Symmetric,
    /// Pole as far as possible from both curves.
    Auto,
    Pole([f64; 4]),
}

/// `x ↦ scale · R · π(x) + translation` with `π` the stereographic chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub pole: [f64; 4],
    #[serde(serialize_with = "rotation_rows")]
    pub rotation: Rotation3<f64>,
    pub scale: f64,
    pub translation: [f64; 3],
    /// Smallest chordal distance from the pole to a curve vertex.
    pub pole_gap: f64,
}

fn rotation_rows<S: serde::Serializer>(r: &Rotation3<f64>, s: S) -> Result<S::Ok, S::Error> {
    let m = r.matrix();
    let rows: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
    serde::Serialize::serialize(&rows, s)
}

impl Normalization {
    pub fn identity() -> Self {
        Normalization::with_chart(&StereoChart::default(), Rotation3::identity())
    }

    fn with_chart(chart: &StereoChart, rotation: Rotation3<f64>) -> Self {
        Normalization { pole: chart.pole().coords(), rotation, scale: 1.0, translation: [0.0; 3], pole_gap: 0.0 }
    }

    pub fn chart(&self) -> StereoChart {
        StereoChart::new(PointS3::from_coords(self.pole))
    }

    fn shift(&self) -> Vec3 {
        Vec3::from(self.translation)
    }

    pub fn to_box(&self, p: &PointS3) -> EuclideanPoint {
        self.map_chart(&self.chart(), p)
    }

    fn map_chart(&self, chart: &StereoChart, p: &PointS3) -> EuclideanPoint {
        match chart.project(p) {
            EuclideanPoint::Finite(x) => EuclideanPoint::Finite(self.rotation * x * self.scale + self.shift()),
            EuclideanPoint::Infinity => EuclideanPoint::Infinity,
        }
    }

    pub fn from_box(&self, x: &Vec3) -> PointS3 {
        self.lift_with(&self.chart(), x)
    }

    fn lift_with(&self, chart: &StereoChart, x: &Vec3) -> PointS3 {
        let q = self.rotation.inverse() * ((x - self.shift()) / self.scale);
        chart.lift(&EuclideanPoint::Finite(q))
    }
}

/// A point of S³ mapped into ℝ³ by a fixed normalization, cached for repeated lifts.
#[derive(Clone, Debug)]
pub struct BoxChart {
    pub normalization: Normalization,
    chart: StereoChart,
}

impl BoxChart {
    pub fn new(normalization: Normalization) -> Self {
        let chart = normalization.chart();
        BoxChart { normalization, chart }
    }

    pub fn to_box(&self, p: &PointS3) -> EuclideanPoint {
        self.normalization.map_chart(&self.chart, p)
    }

    pub fn from_box(&self, x: &Vec3) -> PointS3 {
        self.normalization.lift_with(&self.chart, x)
    }
}

/// Pole `(0, 1/√2, 0, 1/√2)`, i.e. `z1 = z2 = i/√2`.
pub fn symmetric_pole() -> PointS3 {
    PointS3::from_coords([0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2])
}

fn symmetric_normalization() -> Normalization {
    let chart = StereoChart::new(symmetric_pole());
    // the fixed circle of the swap passes through the pole, so its image is a line
    // through the image of the antipode, the origin
    let fixed = PointS3::from_coords([FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0]);
    let dir = chart.project(&fixed).finite().expect("fixed point is not the pole");
    let rotation = Rotation3::rotation_between(&dir, &Vec3::z()).unwrap_or_else(|| {
        Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::x()), std::f64::consts::PI)
    });
    Normalization::with_chart(&chart, rotation)
}

fn min_gap(curves: &[&CurveS3], pole: &PointS3) -> f64 {
    curves.iter().flat_map(|c| c.vertices().iter()).map(|v| v.chordal_distance(pole)).fold(f64::INFINITY, f64::min)
}

/// Pole maximizing the distance to the curves: the best of a fixed candidate set, then a
/// compass search.
pub fn farthest_pole(curves: &[&CurveS3]) -> PointS3 {
    let mut pole = chart_avoiding(curves).pole();
    let mut gap = min_gap(curves, &pole);
    let mut step = 0.25;
    while step > 1e-3 {
        let mut improved = false;
        for d in 0..4 {
            for sign in [1.0, -1.0] {
                let mut c = pole.coords();
                c[d] += sign * step;
                let cand = PointS3::from_coords(c).normalized();
                let g = min_gap(curves, &cand);
                if g > gap + 1e-12 {
                    pole = cand;
                    gap = g;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    pole
}

impl ChartChoice {
    pub fn normalization(&self, curves: &[&CurveS3]) -> Normalization {
        let mut n = match self {
            ChartChoice::Default => Normalization::identity(),
            ChartChoice::Symmetric => symmetric_normalization(),
            ChartChoice::Auto => Normalization::with_chart(&StereoChart::new(farthest_pole(curves)), Rotation3::identity()),
            ChartChoice::Pole(c) => Normalization::with_chart(&StereoChart::new(PointS3::from_coords(*c)), Rotation3::identity()),
        };
        n.pole_gap = min_gap(curves, &PointS3::from_coords(n.pole));
        n
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacitySettings {
    /// The box is `[-half, half]³`.
    pub half: f64,
    pub h: f64,
    /// Tube radius; `None` means one grid step.
    pub r_thick: Option<f64>,
    pub chart: ChartChoice,
    /// Rescale so the curves fit in the ball of this radius about the centre of their
    /// bounding box (translated to the origin). For the symmetric chart only the scale is
    /// applied, about the origin.
    pub fit_radius: Option<f64>,
    pub solver: SolverSettings,
}

impl Default for CapacitySettings {
    fn default() -> Self {
        CapacitySettings { half: 3.0, h: 1.0 / 32.0, r_thick: None, chart: ChartChoice::Auto, fit_radius: None, solver: SolverSettings::default() }
    }
}

impl CapacitySettings {
    pub fn r_thick(&self) -> f64 {
        self.r_thick.unwrap_or(self.h)
    }

    pub fn grid_box(&self) -> Result<GridBox, PdeError> {
        GridBox::cube(-self.half, self.half)
    }

    /// The chart with the fit applied.
    pub fn normalization(&self, curves: &[&CurveS3]) -> Normalization {
        let mut n = self.chart.normalization(curves);
        if let Some(radius) = self.fit_radius {
            let pts: Vec<Vec3> = curves.iter().flat_map(|c| c.vertices().iter()).filter_map(|p| n.to_box(p).finite()).collect();
            let (lo, hi) = pts.iter().fold((Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)), |(a, b), x| (a.inf(x), b.sup(x)));
            let centre = if self.chart == ChartChoice::Symmetric { Vec3::zeros() } else { (lo + hi) * 0.5 };
            let extent = pts.iter().map(|x| (x - centre).norm()).fold(0.0, f64::max);
            if extent > 0.0 {
                n.scale = radius / extent;
                n.translation = (-centre * n.scale).into();
            }
        }
        n
    }
}

/// Tube pieces of a curve inside the ball of radius `reach`: one closed tube when the whole
/// curve is inside, otherwise clipped open runs.
pub fn tube_sets(c: &CurveS3, chart: &BoxChart, radius: f64, reach: f64) -> Vec<CondenserSet> {
    let pts: Vec<Option<Vec3>> =
        c.vertices().iter().map(|p| chart.to_box(p).finite().filter(|x| x.norm() <= reach)).collect();
    if pts.iter().all(Option::is_some) {
        let curve = crate::geometry::Curve3::new(pts.into_iter().flatten().collect(), c.is_closed()).expect("distinct vertices");
        return vec![CondenserSet::Tube { curve, radius, clip: false }];
    }
    let n = pts.len();
    let start = pts.iter().position(Option::is_none).unwrap();
    let mut out = Vec::new();
    let mut run: Vec<Vec3> = Vec::new();
    for k in 1..=n {
        match pts[(start + k) % n] {
            Some(x) => run.push(x),
            None => {
                if run.len() >= 2 {
                    let curve = crate::geometry::Curve3::new(std::mem::take(&mut run), false).expect("distinct vertices");
                    out.push(CondenserSet::Tube { curve, radius, clip: true });
                }
                run.clear();
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct CapacityRun {
    pub result: CapacityResult,
    pub normalization: Normalization,
}

/// Extra plate pieces for [`capacity_with`].
#[derive(Clone, Debug, Default)]
pub struct ExtraPlates {
    pub c0: Vec<CondenserSet>,
    pub c1: Vec<CondenserSet>,
}

/// Normalizes the chart, rasterizes `r_thick`-tubes around both curves and solves at the
/// configured exponent.
pub fn capacity(c0: &CurveS3, c1: &CurveS3, s: &CapacitySettings) -> Result<CapacityRun, PdeError> {
    capacity_with(Some(c0), Some(c1), ExtraPlates::default(), s)
}

/// [`capacity`] with optional curves and additional plate pieces (given in box coordinates
/// of the normalization fitted to the curves that are present).
pub fn capacity_with(
    c0: Option<&CurveS3>,
    c1: Option<&CurveS3>,
    extra: ExtraPlates,
    s: &CapacitySettings,
) -> Result<CapacityRun, PdeError> {
    let curves: Vec<&CurveS3> = c0.iter().chain(c1.iter()).copied().collect();
    let normalization = s.normalization(&curves);
    let chart = BoxChart::new(normalization.clone());
    capacity_in(c0, c1, extra, &chart, s)
}

/// [`capacity_with`] under a given normalization.
pub fn capacity_in(
    c0: Option<&CurveS3>,
    c1: Option<&CurveS3>,
    extra: ExtraPlates,
    chart: &BoxChart,
    s: &CapacitySettings,
) -> Result<CapacityRun, PdeError> {
    let r = s.r_thick();
    if r < s.h {
        return Err(PdeError::ThinTube { r_thick: r, h: s.h });
    }
    let reach = 4.0 * s.half;
    let mut p0 = c0.map(|c| tube_sets(c, chart, r, reach)).unwrap_or_default();
    let mut p1 = c1.map(|c| tube_sets(c, chart, r, reach)).unwrap_or_default();
    p0.extend(extra.c0);
    p1.extend(extra.c1);
    let grid = rasterize_sets(&p0, &p1, &s.grid_box()?, s.h)?;
    let result = solve_capacity(&grid, &s.solver)?;
    Ok(CapacityRun { result, normalization: chart.normalization.clone() })
}

/// Limit `a` of the least-squares fit `E(h) = a + b√h + c·h`.
pub fn extrapolate_sqrt(hs: &[f64], values: &[f64]) -> Option<f64> {
    if hs.len() < 3 || hs.len() != values.len() {
        return None;
    }
    let a = nalgebra::DMatrix::from_fn(hs.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => f64::sqrt(hs[i]),
        _ => hs[i],
    });
    let b = nalgebra::DVector::from_column_slice(values);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14).ok().map(|x| x[0])
}
