//! `∫_{u=t} |∇u|^{p−1} dA` on the piecewise-linear interpolant of a solution over the
//! Kuhn split of every cell into six tetrahedra.

use serde::Serialize;

use super::solver::CapacityResult;
use super::PdeError;

#[derive(Clone, Debug, Serialize)]
pub struct LevelSetFlux {
    pub t: f64,
    pub flux: f64,
    pub area: f64,
    /// The level surface reaches a face of the box. With natural boundary conditions the
    /// flux is still independent of `t`.
    pub boundary_contact: bool,
}

/// Corner paths `0 → e_a → e_a + e_b → (1,1,1)` of the six Kuhn tetrahedra.
const KUHN: [[usize; 4]; 6] = [[0, 1, 3, 7], [0, 1, 5, 7], [0, 2, 3, 7], [0, 2, 6, 7], [0, 4, 5, 7], [0, 4, 6, 7]];

fn corner(m: usize) -> [f64; 3] {
    [(m & 1) as f64, ((m >> 1) & 1) as f64, (m >> 2) as f64]
}

/// Area of `{ℓ = t}` inside the tetrahedron with unit-cell corner indices `tet` and
/// values `v`, in units of `h²`.
fn section_area(tet: &[usize; 4], v: &[f64; 4], t: f64) -> f64 {
    let mut pts: Vec<[f64; 3]> = Vec::with_capacity(4);
    let below: Vec<usize> = (0..4).filter(|&i| v[i] < t).collect();
    let above: Vec<usize> = (0..4).filter(|&i| v[i] >= t).collect();
    if below.is_empty() || above.is_empty() {
        return 0.0;
    }
    let cut = |a: usize, b: usize| {
        let s = (t - v[a]) / (v[b] - v[a]);
        let (pa, pb) = (corner(tet[a]), corner(tet[b]));
        [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1]), pa[2] + s * (pb[2] - pa[2])]
    };
    if below.len() == 2 {
        let (a, b) = (below[0], below[1]);
        let (c, d) = (above[0], above[1]);
        // cyclic order around the quadrilateral
        pts.extend([cut(a, c), cut(a, d), cut(b, d), cut(b, c)]);
    } else {
        let (lone, rest) = if below.len() == 1 { (below[0], &above) } else { (above[0], &below) };
        pts.extend(rest.iter().map(|&r| cut(lone, r)));
    }
    let tri = |p: &[f64; 3], q: &[f64; 3], r: &[f64; 3]| {
        let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
        let w = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
        let c = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    };
    let mut area = tri(&pts[0], &pts[1], &pts[2]);
    if pts.len() == 4 {
        area += tri(&pts[0], &pts[2], &pts[3]);
    }
    area
}

pub fn level_set_flux(res: &CapacityResult, t: f64) -> Result<LevelSetFlux, PdeError> {
    if !(t > 0.0 && t < 1.0) {
        return Err(PdeError::BadLevel(t));
    }
    let grid = &res.grid;
    let u = &res.field.values;
    let [nx, ny, nz] = grid.dims();
    let h = grid.h();
    let q = res.p - 1.0;
    let (mut flux, mut area, mut contact) = (0.0, 0.0, false);
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let v: [f64; 8] = std::array::from_fn(|m| u[grid.index(i + (m & 1), j + ((m >> 1) & 1), k + (m >> 2))]);
                let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                if !(lo < t && hi >= t) {
                    continue;
                }
                if i == 0 || j == 0 || k == 0 || i == nx - 2 || j == ny - 2 || k == nz - 2 {
                    contact = true;
                }
                for tet in &KUHN {
                    let tv = tet.map(|m| v[m]);
                    let a = section_area(tet, &tv, t);
                    if a == 0.0 {
                        continue;
                    }
                    let g = (tv[1] - tv[0]).powi(2) + (tv[2] - tv[1]).powi(2) + (tv[3] - tv[2]).powi(2);
                    let grad = g.sqrt() / h;
                    flux += grad.powf(q) * a * h * h;
                    area += a * h * h;
                }
            }
        }
    }
    Ok(LevelSetFlux { t, flux, area, boundary_contact: contact })
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxSpread {
    pub levels: Vec<LevelSetFlux>,
    pub mean: f64,
    /// Standard deviation over the mean.
    pub spread: f64,
    /// `(max − min) / mean`.
    pub range: f64,
}

/// Fluxes at several levels and their relative spread.
pub fn flux_spread(res: &CapacityResult, ts: &[f64]) -> Result<FluxSpread, PdeError> {
    let levels = ts.iter().map(|&t| level_set_flux(res, t)).collect::<Result<Vec<_>, _>>()?;
    let n = levels.len() as f64;
    let mean = levels.iter().map(|l| l.flux).sum::<f64>() / n;
    let var = levels.iter().map(|l| (l.flux - mean).powi(2)).sum::<f64>() / n;
    let (lo, hi) = levels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| (a.min(l.flux), b.max(l.flux)));
    Ok(FluxSpread { levels, mean, spread: var.sqrt() / mean, range: (hi - lo) / mean })
}

/// The levels at which flux consistency is checked.
pub const FLUX_LEVELS: [f64; 5] = [0.2, 0.35, 0.5, 0.65, 0.8];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_sections() {
        // u = x on the unit cube: every section is a unit square
        let v: [f64; 8] = std::array::from_fn(|m| (m & 1) as f64);
        let total: f64 = KUHN.iter().map(|tet| section_area(tet, &tet.map(|m| v[m]), 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // u = x + y + z at t = 1.5: the regular hexagon of side √2/2
        let v: [f64; 8] = std::array::from_fn(|m| corner(m).iter().sum());
        let total: f64 = KUHN.iter().map(|tet| section_area(tet, &tet.map(|m| v[m]), 1.5)).sum();
        let hexagon = 1.5 * 3f64.sqrt() * 0.5;
        assert!((total - hexagon).abs() < 1e-12, "{total}");
    }
}
