//! Points, curves and conformal maps of S³ and ℝ³.

mod mobius;
mod point;
mod polyline;
mod stereo;

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

pub use mobius::{apply_mobius, clifford_swap, MobiusMap, MobiusPrimitive, MobiusTarget};
pub use point::{
    hopf_to_point, normalize_angle, point_to_hopf, EuclideanPoint, HopfCoords, PointS3, Vec3, UNIT_NORM_TOL,
};
pub use polyline::{curve_length, AmbientPoint, Curve3, CurveS3, Polyline};
pub use stereo::{
    clifford_torus_point, clifford_torus_signed_distance, inverse_stereographic, stereographic, StereoChart,
    DEFAULT_POLE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a curve needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} repeats its predecessor")]
    RepeatedVertex(usize),
    #[error("vertex {0} is mapped to infinity")]
    VertexAtInfinity(usize),
    #[error("polygon sampling needs n >= 3, got {0}")]
    SampleCount(usize),
    #[error("curve file: {0}")]
    Parse(String),
}

/// `n`-gon samples of `H₀ = {(z1, 0)}` and `H₁ = {(0, z2)}`, both oriented by increasing angle.
pub fn sample_hopf_link(n: usize) -> Result<(CurveS3, CurveS3), GeometryError> {
    if n < 3 {
        return Err(GeometryError::SampleCount(n));
    }
    let zero = Complex64::new(0.0, 0.0);
    let angle = |k: usize| Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
    let h0 = (0..n).map(|k| PointS3::new(angle(k), zero)).collect();
    let h1 = (0..n).map(|k| PointS3::new(zero, angle(k))).collect();
    Ok((Polyline::new(h0, true)?, Polyline::new(h1, true)?))
}

/// Which component of `S³ \ ψ(𝕋)` a point lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Side {
    /// Image of `{|z1|² < 1/2}`, the solid torus around `H₁`.
    Zero,
    /// Image of `{|z1|² > 1/2}`, the solid torus around `H₀`.
    One,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Zero => Side::One,
            Side::One => Side::Zero,
        }
    }
}

/// A conformal Clifford torus `T = ψ(𝕋)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CliffordFrame {
    psi: MobiusMap,
    psi_inv: MobiusMap,
}

impl CliffordFrame {
    pub fn new(psi: MobiusMap) -> Self {
        let psi_inv = psi.inverse();
        CliffordFrame { psi, psi_inv }
    }

    pub fn identity() -> Self {
        CliffordFrame::default()
    }

    pub fn psi(&self) -> &MobiusMap {
        &self.psi
    }

    pub fn psi_inverse(&self) -> &MobiusMap {
        &self.psi_inv
    }

    /// `|z1|² − 1/2` at the preimage of `p`; negative on side zero.
    pub fn side_value(&self, p: &PointS3) -> f64 {
        self.psi_inv.apply_s3(p).z1.norm_sqr() - 0.5
    }

    /// The side containing `p`, or `None` within `tol` of the torus.
    pub fn side(&self, p: &PointS3, tol: f64) -> Option<Side> {
        let v = self.side_value(p);
        if v.abs() <= tol {
            None
        } else if v < 0.0 {
            Some(Side::Zero)
        } else {
            Some(Side::One)
        }
    }

    /// Core circle of the solid torus on the given side (`ψ(H₁)` for side zero).
    pub fn core(&self, side: Side, n: usize) -> Result<CurveS3, GeometryError> {
        let (h0, h1) = sample_hopf_link(n)?;
        let core = match side {
            Side::Zero => h1,
            Side::One => h0,
        };
        apply_mobius(&self.psi, &core)
    }
}

/// Serializes a curve in the text format: a header `ambient=r3|s3,closed=true|false`
/// followed by one comma-separated vertex per line.
pub fn write_curve<P: AmbientPoint>(c: &Polyline<P>) -> String {
    let mut out = format!("ambient={},closed={}\n", P::TAG, c.is_closed());
    for v in c.vertices() {
        let e = v.embed();
        let cols = if P::TAG == "r3" { &e[..3] } else { &e[..] };
        let line: Vec<String> = cols.iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    out
}

fn parse_header(line: &str) -> Result<(String, bool), GeometryError> {
    let mut ambient = None;
    let mut closed = None;
    for field in line.trim().split(',') {
        match field.split_once('=') {
            Some(("ambient", a)) => ambient = Some(a.trim().to_string()),
            Some(("closed", "true")) => closed = Some(true),
            Some(("closed", "false")) => closed = Some(false),
            _ => return Err(GeometryError::Parse(format!("bad header field `{field}`"))),
        }
    }
    match (ambient, closed) {
        (Some(a), Some(c)) => Ok((a, c)),
        _ => Err(GeometryError::Parse("header needs ambient and closed".into())),
    }
}

fn parse_rows(lines: std::str::Lines<'_>, width: usize) -> Result<Vec<Vec<f64>>, GeometryError> {
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GeometryError::Parse(format!("line {}: {e}", i + 2)))?;
        if row.len() != width {
            return Err(GeometryError::Parse(format!("line {}: expected {width} columns", i + 2)));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_curve_r3(text: &str) -> Result<Curve3, GeometryError> {
    let mut lines = text.lines();
    let (ambient, closed) = parse_header(lines.next().unwrap_or(""))?;
    if ambient != "r3" {
        return Err(GeometryError::Parse(format!("expected ambient=r3, got {ambient}")));
    }
    let verts = parse_rows(lines, 3)?.into_iter().map(|r| Vec3::new(r[0], r[1], r[2])).collect();
    Polyline::new(verts, closed)
}

pub fn read_curve_s3(text: &str) -> Result<CurveS3, GeometryError> {
    let mut lines = text.lines();
    let (ambient, closed) = parse_header(lines.next().unwrap_or(""))?;
    if ambient != "s3" {
        return Err(GeometryError::Parse(format!("expected ambient=s3, got {ambient}")));
    }
    let verts = parse_rows(lines, 4)?
        .into_iter()
        .map(|r| PointS3::from_coords([r[0], r[1], r[2], r[3]]))
        .collect();
    Polyline::new(verts, closed)
}
